# Copyright 2024 Linx Software, Inc.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""权重序列 M_p、结构条件 (M.1)–(M.4) 与伴随函数 M(ρ)。

所有运算在对数域进行，只有在接口边界才取指数。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from weyllab.errors import InputError, RangeError

WEIGHT_KINDS = ("gevrey", "power_sequence", "custom")
MAX_LOG_INDEX = 10 ** 7
LOG_FLOAT_MAX = math.log(np.finfo(float).max)
M2_GRID = (1.0, 1.25, 1.5, 2.0, 4.0)
M2_H_LIMIT = 1024.0
M3_RATIO_THRESHOLD = 0.999
DECREASING_RUN = 8


@dataclass(frozen=True)
class WeightSequence:
    """正数序列 M_p。

    Attributes:
        kind (str): gevrey、power_sequence 或 custom。
        s (float): gevrey 与 power_sequence 的指数。
        values (tuple): custom 序列的取值 M_0, M_1, ...
    """

    kind: str
    s: float = 1.0
    values: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise InputError(f"未知的权重序列类型 '{self.kind}'")
        if self.kind != "custom" and not (math.isfinite(self.s) and self.s > 0):
            raise InputError(f"{self.kind} 指数必须为有限正数，收到 {self.s}")
        if self.kind == "custom":
            if not self.values:
                raise InputError("custom 权重序列不能为空")
            array = np.asarray(self.values, dtype=float)
            if not np.all(np.isfinite(array)) or np.any(array <= 0):
                raise InputError("custom 权重序列必须全部为有限正数")
            if array[0] != 1.0:
                raise InputError(f"custom 权重序列要求 M_0 = 1，收到 {array[0]}")

    @classmethod
    def gevrey(cls, s: float) -> "WeightSequence":
        return cls("gevrey", s=float(s))

    @classmethod
    def power_sequence(cls, s: float) -> "WeightSequence":
        return cls("power_sequence", s=float(s))

    @classmethod
    def custom(cls, values: Sequence[float]) -> "WeightSequence":
        return cls("custom", values=tuple(float(v) for v in values))

    @classmethod
    def from_config(cls, spec: Dict) -> "WeightSequence":
        """由配置记录构造，例如 ``{"kind": "gevrey", "s": 2.0}``。"""

        kind = spec.get("kind")
        if kind == "custom":
            return cls.custom(spec.get("values", ()))
        if kind in ("gevrey", "power_sequence"):
            return cls(kind, s=float(spec.get("s", 1.0)))
        raise InputError(f"未知的权重序列类型 '{kind}'")

    def to_config(self) -> Dict:
        if self.kind == "custom":
            return {"kind": "custom", "values": list(self.values)}
        return {"kind": self.kind, "s": self.s}

    @property
    def available(self) -> Optional[int]:
        """可用的最大下标；内置序列返回 None。"""

        if self.kind == "custom":
            return len(self.values) - 1
        return None


def log_weight_values(seq: WeightSequence, P: int) -> NDArray:
    """
    返回 ln M_0 .. ln M_P。

    Args:
        seq (WeightSequence): 权重序列。
        P (int): 最大下标。

    Returns:
        numpy.ndarray: 长度 P+1 的对数值。

    Raises:
        InputError: P 为负、超过对数域上限，或 custom 序列长度不足。
    """

    if P < 0:
        raise InputError(f"下标上限必须非负，收到 {P}")
    if P > MAX_LOG_INDEX:
        raise InputError(f"下标上限 {P} 超出对数域可表示范围")
    p = np.arange(P + 1, dtype=float)
    if seq.kind == "gevrey":
        return seq.s * gammaln(p + 1.0)
    if seq.kind == "power_sequence":
        # 0^0 := 1
        logs = np.zeros(P + 1)
        logs[1:] = seq.s * p[1:] * np.log(p[1:])
        return logs
    if len(seq.values) < P + 1:
        raise InputError(
            f"custom 权重序列只有 {len(seq.values)} 项，无法提供到 M_{P}")
    return np.log(np.asarray(seq.values[:P + 1], dtype=float))


def weight_values(seq: WeightSequence, P: int) -> NDArray:
    """
    返回 M_0 .. M_P 的线性值。

    Args:
        seq (WeightSequence): 权重序列。
        P (int): 最大下标。

    Returns:
        numpy.ndarray: 长度 P+1 的数组。

    Raises:
        RangeError: 线性值溢出双精度，此时应改用 ``log_weight_values``。
    """

    logs = log_weight_values(seq, P)
    if np.max(logs) >= LOG_FLOAT_MAX:
        first = int(np.argmax(logs >= LOG_FLOAT_MAX))
        raise RangeError(
            f"M_{first} 超出双精度范围，请改用 log_weight_values")
    return np.exp(logs)


def weight_quotients(seq: WeightSequence, P: int) -> NDArray:
    """
    返回 m_p = M_p / M_{p-1}，并约定 m_0 = 0。

    Args:
        seq (WeightSequence): 权重序列。
        P (int): 最大下标。

    Returns:
        numpy.ndarray: 长度 P+1 的数组。
    """

    logs = log_weight_values(seq, P)
    quotients = np.zeros(P + 1)
    quotients[1:] = np.exp(np.diff(logs))
    return quotients


def _first_decreasing_run(values: NDArray, run: int) -> Optional[int]:
    """返回第一个连续 run 次严格下降段的终点下标。"""

    decreasing = (np.diff(values) < 0).astype(int)
    if len(decreasing) < run:
        return None
    window = np.convolve(decreasing, np.ones(run, dtype=int), mode="valid")
    hits = np.nonzero(window == run)[0]
    if len(hits) == 0:
        return None
    return int(hits[0]) + run


def associated_function(seq: WeightSequence, rho: float, P_max: int = 100) -> float:
    """
    伴随函数 M(ρ) = sup_p ln_+ ρ^p / M_p。

    自 p=0 起向上扫描，当被取上确界的量连续 8 次严格下降后停止；
    若在 P_max 内未出现这样的下降段，则自动加倍扫描范围。

    Args:
        seq (WeightSequence): 权重序列。
        rho (float): 正实数 ρ。
        P_max (int): 初始扫描上限。

    Returns:
        float: M(ρ) ≥ 0。

    Raises:
        InputError: ρ 非正。
        RangeError: custom 序列长度不足以确认上确界。
    """

    if not rho > 0 or not math.isfinite(rho):
        raise InputError(f"ρ 必须为有限正数，收到 {rho}")
    log_rho = math.log(rho)
    P = max(int(P_max), 2 * DECREASING_RUN)
    while True:
        limit = seq.available
        if limit is not None:
            P = min(P, limit)
        logs = log_weight_values(seq, P)
        supremand = np.arange(P + 1) * log_rho - logs
        stop = _first_decreasing_run(supremand, DECREASING_RUN)
        if stop is not None:
            return max(0.0, float(np.max(supremand[:stop + 1])))
        if limit is not None and P >= limit:
            raise RangeError(
                f"custom 权重序列在 M_{limit} 前未能确认 ρ={rho} 处的上确界")
        logging.debug(f"伴随函数扫描范围扩展至 {2 * P}")
        P *= 2


def associated_function_log(seq: WeightSequence, log_rho: float, P_max: int = 100) -> float:
    """以 ln ρ 为参数的伴随函数，用于 ρ 超出双精度范围的情形。"""

    if not math.isfinite(log_rho):
        raise InputError(f"ln ρ 必须有限，收到 {log_rho}")
    P = max(int(P_max), 2 * DECREASING_RUN)
    while True:
        limit = seq.available
        if limit is not None:
            P = min(P, limit)
        supremand = np.arange(P + 1) * log_rho - log_weight_values(seq, P)
        stop = _first_decreasing_run(supremand, DECREASING_RUN)
        if stop is not None:
            return max(0.0, float(np.max(supremand[:stop + 1])))
        if limit is not None and P >= limit:
            raise RangeError(f"custom 权重序列在 M_{limit} 前未能确认上确界")
        P *= 2


@dataclass
class ConditionReport:
    """权重序列结构条件的扫描结果。

    Attributes:
        m1 (bool): 对数凸性 (M.1)。
        m2 (tuple): (是否成立, c0, H)，不成立时 c0 与 H 为 None。
        m3prime (tuple): (收敛迹象, 部分和)。该字段是“迹象”而非证明。
        m4 (bool): (M.4)。
        checked_up_to (int): 扫描上限 P。
        m4_first_failure (int | None): (M.4) 首个失败的 p。
    """

    m1: bool
    m2: Tuple[bool, Optional[float], Optional[float]]
    m3prime: Tuple[bool, float]
    m4: bool
    checked_up_to: int
    m4_first_failure: Optional[int] = None

    def to_dict(self) -> Dict:
        return {
            "m1": self.m1,
            "m2": {"holds": self.m2[0], "c0": self.m2[1], "H": self.m2[2]},
            "m3prime": {"indicated": self.m3prime[0], "partial_sum": self.m3prime[1]},
            "m4": self.m4,
            "m4_first_failure": self.m4_first_failure,
            "checked_up_to": self.checked_up_to,
        }


def _log_convex_failures(logs: NDArray) -> NDArray:
    """返回 2 ln M_p > ln M_{p-1} + ln M_{p+1} 的 p (1 ≤ p < P)。"""

    lhs = 2.0 * logs[1:-1]
    rhs = logs[:-2] + logs[2:]
    slack = 1e-12 * np.maximum(1.0, np.abs(lhs))
    return np.nonzero(lhs > rhs + slack)[0] + 1


def _m2_search(logs: NDArray) -> Tuple[bool, Optional[float], Optional[float]]:
    """在 H 网格上搜索 M_{p+q} ≤ c0 H^{p+q} M_p M_q 的最小可行 (c0, H)。"""

    P = len(logs) - 1
    p, q = np.meshgrid(np.arange(P + 1), np.arange(P + 1), indexing="ij")
    mask = p + q <= P
    n = (p + q)[mask]
    excess = logs[n] - logs[p[mask]] - logs[q[mask]]
    # 每一层 n=p+q 上的最大值
    layer_max = np.full(P + 1, -np.inf)
    np.maximum.at(layer_max, n, excess)
    quarter = max(1, (P + 1) // 4)

    candidates = list(M2_GRID)
    H = M2_GRID[-1] * 2.0
    while H <= M2_H_LIMIT:
        candidates.append(H)
        H *= 2.0
    layers = np.arange(P + 1)
    for H in candidates:
        scaled = layer_max - layers * math.log(H)
        head = np.max(scaled[:-quarter])
        tail = np.max(scaled[-quarter:])
        if tail <= head + 1e-12:
            return True, float(math.exp(max(0.0, np.max(scaled)))), float(H)
    return False, None, None


def _m3prime_check(logs: NDArray) -> Tuple[bool, float]:
    """部分和 Σ M_{p-1}/M_p 与尾部比值、Raabe 判别的收敛迹象。"""

    log_terms = logs[:-1] - logs[1:]
    partial_sum = float(np.sum(np.exp(log_terms)))
    ratios = np.exp(np.diff(log_terms))
    quarter = max(2, len(ratios) // 4)
    tail_ratios = ratios[-quarter:]
    p = np.arange(1, len(log_terms) + 1, dtype=float)[-quarter - 1:-1]
    raabe = p * (np.expm1(-np.diff(log_terms)[-quarter:]))
    indicated = bool(np.max(tail_ratios) < M3_RATIO_THRESHOLD
                     and np.min(raabe) > 1.0 + 1e-6)
    return indicated, partial_sum


def condition_report(seq: WeightSequence, P: int) -> ConditionReport:
    """
    扫描 (M.1)、(M.2)、(M.3)' 与 (M.4) 到下标 P。

    Args:
        seq (WeightSequence): 权重序列。
        P (int): 扫描上限，至少为 3。

    Returns:
        ConditionReport: 扫描结果。

    Raises:
        InputError: P < 3。
    """

    if P < 3:
        raise InputError(f"条件扫描要求 P ≥ 3，收到 {P}")
    logs = log_weight_values(seq, P)
    m1 = len(_log_convex_failures(logs)) == 0
    m2 = _m2_search(logs)
    m3prime = _m3prime_check(logs)
    m4_failures = _log_convex_failures(logs - gammaln(np.arange(P + 1) + 1.0))
    m4 = len(m4_failures) == 0
    first = int(m4_failures[0]) if not m4 else None
    logging.debug(f"权重条件扫描完成: m1={m1}, m2={m2[0]}, m3'={m3prime[0]}, m4={m4}")
    return ConditionReport(m1=m1, m2=m2, m3prime=m3prime, m4=m4,
                           checked_up_to=P, m4_first_failure=first)


def associated_function_values(seq: WeightSequence, rhos: NDArray, P_max: int = 100) -> NDArray:
    """
    对一组 ρ 向量化计算 M(ρ)，ρ ≤ 0 处取 0。

    扫描上限自动扩展，直到每个 ρ 的最大值下标之后都留有至少 8 个下降位置。

    Args:
        seq (WeightSequence): 权重序列。
        rhos (numpy.ndarray): ρ 数组。
        P_max (int): 初始扫描上限。

    Returns:
        numpy.ndarray: 与 rhos 同形状的 M(ρ)。
    """

    rhos = np.asarray(rhos, dtype=float)
    flat = rhos.ravel()
    result = np.zeros_like(flat)
    positive = flat > 0
    if not np.any(positive):
        return result.reshape(rhos.shape)
    log_rho = np.log(flat[positive])
    P = max(int(P_max), 2 * DECREASING_RUN)
    while True:
        limit = seq.available
        if limit is not None:
            P = min(P, limit)
        logs = log_weight_values(seq, P)
        supremand = log_rho[:, None] * np.arange(P + 1)[None, :] - logs[None, :]
        peak = np.argmax(supremand, axis=1)
        if np.all(peak <= P - DECREASING_RUN) or (limit is not None and P >= limit):
            result[positive] = np.maximum(0.0, np.max(supremand, axis=1))
            return result.reshape(rhos.shape)
        P *= 2
