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

"""热迹、相空间热积分、余项积分与 Mehler 闭式。"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad as scipy_quad
from scipy.special import logsumexp

from weyllab.errors import AccuracyError, InputError, RangeError, ResolutionError
from weyllab.spectral.asymptotics_helper import ComparisonFunction, upper_bound_const
from weyllab.spectral.quadrature_helper import QuadratureSpec, integrate_panels, sphere_rule
from weyllab.spectral.quantize_helper import SpectralData
from weyllab.spectral.symbols_helper import RadialSymbol, SeparableSum, Symbol, as_coordinates

TAIL_RELATIVE_LIMIT = 1e-3
LOWER_BOUND_SAFETY = 0.8
RADIAL_R_MAX = 1e8
RADIAL_PANELS = 16
DIRECTION_BLOCK = 256


@dataclass
class HeatTraceValue:
    value: float
    tail_bound: float


@dataclass
class HeatSample:
    """
    单个 t 上的热迹公式各项。

    Attributes:
        t (float): 时间参数。
        spectral_trace (float): Σ e^{−tλ_j}。
        phase_integral (float): (2π)^{−d} ∫ e^{−ta}。
        remainder (float): ∫ e^{−(t/4)a} ⟨w⟩^{−2ρ}。
        tail_bound (float): 未可信谱尾项的上界。
    """

    t: float
    spectral_trace: float
    phase_integral: float
    remainder: float
    tail_bound: float

    @property
    def residual(self) -> float:
        return abs(self.spectral_trace - self.phase_integral)

    @property
    def ratio(self) -> float:
        return self.residual / self.remainder

    def to_row(self) -> Tuple[float, float, float, float, float, float]:
        return (self.t, self.spectral_trace, self.phase_integral, self.remainder,
                self.residual, self.ratio)


@dataclass
class HeatReport:
    samples: List[HeatSample]
    spread_limit: float
    passed: bool
    notes: List[str] = field(default_factory=list)

    @property
    def ratios(self) -> List[float]:
        return [sample.ratio for sample in self.samples]

    @property
    def spread(self) -> float:
        ratios = self.ratios
        return max(ratios) / min(ratios) if min(ratios) > 0 else math.inf

    def to_dict(self) -> Dict:
        return {"passed": self.passed, "spread": self.spread, "spread_limit": self.spread_limit,
                "ratios": self.ratios, "notes": list(self.notes)}


# ---------------------------------------------------------------------------
# 谱热迹
# ---------------------------------------------------------------------------

def default_lower_bound_scale(f_lower: ComparisonFunction, C_lower: float,
                              safety: float = LOWER_BOUND_SAFETY) -> float:
    """尾项控制使用的 h：极限情形阈值乘以 safety。"""

    _, threshold = upper_bound_const(f_lower.d, f_lower.index, C_lower, limit_case=True)
    return safety * threshold


def _tail_bound(first: int, t: float, f_lower: ComparisonFunction, C_lower: float, h: float) -> float:
    """Σ_{j≥first} exp(−t C f(h j^{1/(2d)})) ≤ g(first) + ∫_first^∞ g。"""

    exponent = 1.0 / (2.0 * f_lower.d)

    def g(j):
        log_y = max(math.log(h) + exponent * math.log(max(j, 1.0)), math.log(f_lower.Y))
        log_f = f_lower.log_value_at(log_y)
        return math.exp(-t * C_lower * math.exp(min(log_f, 700.0)))

    integral, _ = scipy_quad(g, first, math.inf, limit=200)
    return g(first) + integral


def heat_trace(spec: SpectralData, t: float, f_lower: ComparisonFunction, C_lower: float = 1.0,
               h: Optional[float] = None, tolerance: float = TAIL_RELATIVE_LIMIT) -> HeatTraceValue:
    """
    可信谱上的 Σ e^{−tλ_j} 与未可信尾项的上界。

    尾项以 λ_j ≥ C f(h j^{1/(2d)}) 作积分比较；显式给出的完整谱（ceiling 为 inf）没有尾项。

    Args:
        spec (SpectralData): 谱数据。
        t (float): t > 0。
        f_lower (ComparisonFunction): 特征值下界使用的比较函数。
        C_lower (float): 下界常数。
        h (float, optional): 下界尺度，缺省为 0.8 倍的极限情形阈值。
        tolerance (float): 允许的尾项相对大小。

    Returns:
        HeatTraceValue: (value, tail_bound)。

    Raises:
        ResolutionError: 尾项超过 tolerance·value。
    """

    if not t > 0:
        raise InputError(f"t 必须为正，收到 {t}")
    trusted = spec.trusted
    value = float(np.exp(logsumexp(-t * trusted))) if trusted.size else 0.0
    complete = spec.trusted_count == spec.eigenvalues.size and math.isinf(spec.ceiling)
    if complete:
        tail = 0.0
    else:
        scale = default_lower_bound_scale(f_lower, C_lower) if h is None else h
        tail = _tail_bound(spec.trusted_count, t, f_lower, C_lower, scale)
    if tail > tolerance * value:
        raise ResolutionError(
            f"t={t:g} 时谱尾项上界 {tail:.3e} 超过热迹 {value:.6g} 的 {tolerance:g} 倍，"
            f"请增大基的维数或增大 t")
    return HeatTraceValue(value, tail)


def heat_trace_curve(spec: SpectralData, ts: Sequence[float], f_lower: ComparisonFunction,
                     C_lower: float = 1.0, h: Optional[float] = None) -> List[HeatTraceValue]:
    return [heat_trace(spec, t, f_lower, C_lower, h) for t in ts]


def trace_shape_checks(ts: Sequence[float], values: Sequence[float]) -> Dict[str, bool]:
    """热迹关于 t 严格递减且对数凸。"""

    order = np.argsort(ts)
    t = np.asarray(ts, dtype=float)[order]
    logs = np.log(np.asarray(values, dtype=float)[order])
    slopes = np.diff(logs) / np.diff(t)
    return {
        "decreasing": bool(np.all(np.diff(logs) < 0)),
        "log_convex": bool(np.all(np.diff(slopes) >= -1e-12 * np.max(np.abs(slopes), initial=1.0))),
    }


# ---------------------------------------------------------------------------
# 相空间积分
# ---------------------------------------------------------------------------

def _radial_window(log_integrand: Callable[[NDArray], NDArray], window: float,
                   label: str) -> Tuple[float, float]:
    """截断半径与峰值：log_integrand 在截断处低于峰值 window 奈特。"""

    hi = 1.0
    peak = float(np.max(log_integrand(np.linspace(hi / 256.0, hi, 256))))
    while float(np.max(log_integrand(np.array([hi])))) >= peak - window:
        hi *= 1.5
        if hi > RADIAL_R_MAX:
            raise RangeError(f"{label}的径向被积函数在 r ≤ {RADIAL_R_MAX:g} 内未衰减，积分不收敛")
        peak = max(peak, float(np.max(log_integrand(np.linspace(hi / 256.0, hi, 256)))))
    return hi, peak


def _polar_integral(sym: Symbol, radial_log: Callable[[NDArray, NDArray], NDArray],
                    quad: QuadratureSpec, label: str) -> float:
    """
    ∫_{R^{2d}} exp(radial_log(r, ln a)) dw。

    极坐标下按方向分块，每块共用截断半径并在对数域平移峰值后一次性求积；径向符号只取一个方向。
    """

    n = 2 * sym.d
    vectors, weights = sphere_rule(sym.d, quad.sphere_order)
    if isinstance(sym, RadialSymbol):
        vectors, weights = vectors[:1], np.array([float(np.sum(weights))])

    total = 0.0
    for start in range(0, len(weights), DIRECTION_BLOCK):
        block = vectors[start:start + DIRECTION_BLOCK]

        def log_integrand(r, block=block):
            r = np.asarray(r, dtype=float)
            sign, log_a = sym.log_values((block[:, None, :] * r[None, :, None]).reshape(-1, n))
            if np.any(np.real(sign) <= 0):
                raise InputError(f"{label}要求符号为正")
            log_a = log_a.reshape(len(block), r.size)
            with np.errstate(divide="ignore", over="ignore"):
                return radial_log(r[None, :], log_a) + (n - 1) * np.log(r)[None, :]

        hi, peak = _radial_window(log_integrand, quad.radial_log_window, label)
        try:
            values = integrate_panels(lambda r: np.exp(log_integrand(r) - peak), 0.0, hi,
                                      RADIAL_PANELS, quad, label=label)
        except AccuracyError as exc:
            raise RangeError(f"{label}的径向积分不收敛: {exc}") from exc
        total += float(np.dot(weights[start:start + DIRECTION_BLOCK], values)) * math.exp(peak)
    return total


def phase_integral(sym: Symbol, t: float, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """
    (2π)^{−d} ∫ e^{−t a(w)} dw。可分离直和按因子乘积计算。

    Raises:
        RangeError: 径向积分不收敛。
    """

    if not t > 0:
        raise InputError(f"t 必须为正，收到 {t}")
    if isinstance(sym, SeparableSum):
        return math.prod(phase_integral(part, t, quad) for part in sym.parts)
    integral = _polar_integral(sym, lambda r, log_a: -t * np.exp(log_a), quad, "相空间热积分")
    return integral / (2.0 * math.pi) ** sym.d


def remainder_integral(sym: Symbol, t: float, rho: float,
                       quad: QuadratureSpec = QuadratureSpec()) -> float:
    """∫ e^{−(t/4) a(w)} ⟨w⟩^{−2ρ} dw。"""

    if not t > 0:
        raise InputError(f"t 必须为正，收到 {t}")
    if not 0 < rho <= 1:
        raise InputError(f"rho 必须在 (0, 1] 内，收到 {rho}")
    return _polar_integral(
        sym, lambda r, log_a: -0.25 * t * np.exp(log_a) - rho * np.log1p(r * r), quad, "余项积分")


def verify_heat_formula(spec: SpectralData, sym: Symbol, ts: Sequence[float], rho: float,
                        f_lower: ComparisonFunction, C_lower: float = 1.0,
                        quad: QuadratureSpec = QuadratureSpec(), h: Optional[float] = None,
                        spread_limit: float = 3.0) -> HeatReport:
    """
    在 t 网格上比较谱热迹与相空间积分，报告 |trace − phase| / remainder。

    比值随 t 减小不增，或 max/min ≤ spread_limit 时判定通过。
    """

    samples = []
    for t in sorted(ts, reverse=True):
        trace = heat_trace(spec, t, f_lower, C_lower, h)
        sample = HeatSample(float(t), trace.value, phase_integral(sym, t, quad),
                            remainder_integral(sym, t, rho, quad), trace.tail_bound)
        logging.info(f"t={t:g}: 热迹 {sample.spectral_trace:.10g}，相空间积分 {sample.phase_integral:.10g}，"
                     f"比值 {sample.ratio:.4g}")
        samples.append(sample)
    ratios = [sample.ratio for sample in samples]
    non_increasing = all(b <= a * (1.0 + 1e-12) for a, b in zip(ratios, ratios[1:]))
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
    report = HeatReport(samples, spread_limit, non_increasing or spread <= spread_limit)
    if not report.passed:
        report.notes.append(f"比值随 t 减小而增大，且 max/min = {spread:.4g} 超过 {spread_limit:g}")
    return report


# ---------------------------------------------------------------------------
# Mehler 闭式
# ---------------------------------------------------------------------------

def mehler_symbol(t: float, w) -> float:
    """谐振子热半群的 Weyl 符号 sech(t) exp(−tanh(t) r²)，要求 0 < t < π/2。"""

    if not 0 < t < math.pi / 2:
        raise InputError(f"Mehler 符号要求 0 < t < π/2，收到 {t}")
    point = as_coordinates(w, 1)
    return math.exp(-math.tanh(t) * float(np.dot(point, point))) / math.cosh(t)


def mehler_trace(t: float) -> float:
    """谐振子热迹 Σ e^{−t(2n+1)} = 1/(2 sinh t)。"""

    if not t > 0:
        raise InputError(f"t 必须为正，收到 {t}")
    return 0.5 / math.sinh(t)
