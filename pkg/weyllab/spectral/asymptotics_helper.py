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

"""比较函数 f、σ(λ)、计数函数、Weyl 型常数与 Tauber 反演。

所有 f 的取值都在对数域进行：ln f(y) 与 ln λ。指数型与 assoc 型比较函数的指标 β 记为 inf。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq
from scipy.special import gammaln

from weyllab.errors import DomainError, FitQualityError, InputError, RangeError
from weyllab.spectral.quadrature_helper import QuadratureSpec, sphere_rule
from weyllab.spectral.quantize_helper import SpectralData
from weyllab.spectral.symbols_helper import Symbol
from weyllab.spectral.weights_helper import WeightSequence, associated_function_log

COMPARISON_FAMILIES = ("power_log", "exp_gevrey", "exp_root_scaled", "assoc")
INVERSE_RTOL = 1e-12
ASSOC_LOG_STEP = 1e-6
RAY_R_MAX = 1e8


@dataclass(frozen=True)
class ComparisonFunction:
    """
    正的严格递增比较函数 f，定义在 [Y, ∞) 上。

    Attributes:
        family (str): power_log、exp_gevrey、exp_root_scaled 或 assoc。
        d (int): 维数。
        beta (float): power_log 的指数 β。
        alpha (float): power_log 的对数指数 α。
        h (float): 指数型与 assoc 型的尺度 h。
        s (float): 指数型的 Gevrey 指数 s。
        c (float): exp_root_scaled 的系数 c。
        weights (WeightSequence): assoc 型的权重序列。
        Y (float): 定义域起点，None 时按族取默认值。
    """

    family: str
    d: int = 1
    beta: float = 1.0
    alpha: float = 0.0
    h: float = 1.0
    s: float = 2.0
    c: float = 1.0
    weights: Optional[WeightSequence] = None
    Y: Optional[float] = None

    def __post_init__(self):
        if self.family not in COMPARISON_FAMILIES:
            raise InputError(f"未知的比较函数族 '{self.family}'")
        if self.d < 1:
            raise InputError(f"维数 d 必须 ≥ 1，收到 {self.d}")
        if self.family == "power_log" and not self.beta > 0:
            raise InputError(f"power_log 要求 β > 0，收到 {self.beta}")
        if self.family in ("exp_gevrey", "exp_root_scaled") and not (self.h > 0 and self.s > 1):
            raise InputError(f"{self.family} 要求 h > 0 且 s > 1，收到 h={self.h}, s={self.s}")
        if self.family == "exp_root_scaled" and not self.c > 0:
            raise InputError(f"exp_root_scaled 要求 c > 0，收到 {self.c}")
        if self.family == "assoc":
            if self.weights is None:
                raise InputError("assoc 比较函数需要权重序列")
            if not self.h > 0:
                raise InputError(f"assoc 比较函数要求 h > 0，收到 {self.h}")
        if self.Y is None:
            object.__setattr__(self, "Y", self._default_start())
        if not self.Y >= 1:
            raise InputError(f"定义域起点 Y 必须 ≥ 1，收到 {self.Y}")

    @classmethod
    def power_log(cls, beta: float, alpha: float = 0.0, d: int = 1, Y: Optional[float] = None):
        return cls("power_log", d=d, beta=float(beta), alpha=float(alpha), Y=Y)

    @classmethod
    def exp_gevrey(cls, h: float, s: float, d: int = 1, Y: Optional[float] = None):
        return cls("exp_gevrey", d=d, h=float(h), s=float(s), Y=Y)

    @classmethod
    def exp_root_scaled(cls, h: float, s: float, c: float, d: int = 1, Y: Optional[float] = None):
        return cls("exp_root_scaled", d=d, h=float(h), s=float(s), c=float(c), Y=Y)

    @classmethod
    def assoc(cls, weights: WeightSequence, h: float, d: int = 1, Y: Optional[float] = None):
        return cls("assoc", d=d, h=float(h), weights=weights, Y=Y)

    def _default_start(self) -> float:
        if self.family == "power_log" and self.alpha != 0.0:
            return math.exp(max(1.0, 1.0 - self.alpha / self.beta))
        return 1.0

    @property
    def index(self) -> float:
        """β；指数型与 assoc 型为 inf。"""

        return self.beta if self.family == "power_log" else math.inf

    @property
    def variation_index(self) -> float:
        """σ 的正则变化指标 2d/β。"""

        return 0.0 if math.isinf(self.index) else 2.0 * self.d / self.index

    def log_value_at(self, log_y: float) -> float:
        """以 ln y 为参数的 ln f(y)。"""

        if self.family == "power_log":
            return self.beta * log_y + (self.alpha * math.log(log_y) if self.alpha else 0.0)
        if self.family == "exp_gevrey":
            return math.exp((math.log(self.h) + log_y) / self.s)
        if self.family == "exp_root_scaled":
            return self.c * math.exp((math.log(self.h) + log_y) / self.s)
        return associated_function_log(self.weights, math.log(self.h) + log_y)

    def log_value(self, y: float) -> float:
        """ln f(y)。"""

        return self.log_value_at(math.log(y))

    def value(self, y: float) -> float:
        return math.exp(self.log_value(y))

    def elasticity(self, y: float) -> float:
        """y f'(y) / f(y)。"""

        if self.family == "power_log":
            return self.beta + self.alpha / math.log(y)
        if self.family in ("exp_gevrey", "exp_root_scaled"):
            return self.log_value(y) / self.s
        log_y = math.log(y)
        upper = self.log_value_at(log_y + ASSOC_LOG_STEP)
        lower = self.log_value_at(log_y - ASSOC_LOG_STEP)
        return (upper - lower) / (2.0 * ASSOC_LOG_STEP)

    @property
    def log_lower(self) -> float:
        """ln f(Y)。"""

        return self.log_value(self.Y)

    def _check_domain(self, log_lam: float) -> None:
        if log_lam < self.log_lower - 1e-12 * max(1.0, abs(self.log_lower)):
            raise DomainError(
                f"ln λ = {log_lam:.6g} 低于比较函数定义域下界 ln f(Y) = {self.log_lower:.6g}")

    def log_inverse(self, log_lam: float) -> float:
        """ln f⁻¹(λ)，以 ln λ 为参数。

        Raises:
            DomainError: λ < f(Y)。
        """

        self._check_domain(log_lam)
        if self.family == "exp_gevrey":
            return self.s * math.log(log_lam) - math.log(self.h)
        if self.family == "exp_root_scaled":
            return self.s * math.log(log_lam / self.c) - math.log(self.h)
        if self.family == "power_log" and self.alpha == 0.0:
            return log_lam / self.beta
        lo = math.log(self.Y)
        hi = max(lo + 1.0, 2.0 * lo)
        while self.log_value_at(hi) < log_lam:
            hi = lo + 2.0 * (hi - lo)
        if self.log_value_at(lo) >= log_lam:
            return lo
        return brentq(lambda ly: self.log_value_at(ly) - log_lam, lo, hi,
                      xtol=1e-300, rtol=INVERSE_RTOL)

    def inverse(self, lam: float) -> float:
        return math.exp(self.log_inverse(_log_positive(lam)))

    def to_config(self) -> Dict:
        config = {"family": self.family, "d": self.d, "Y": self.Y}
        if self.family == "power_log":
            config.update(beta=self.beta, alpha=self.alpha)
        elif self.family == "assoc":
            config.update(h=self.h, weights=self.weights.to_config())
        else:
            config.update(h=self.h, s=self.s)
            if self.family == "exp_root_scaled":
                config["c"] = self.c
        return config


def _log_positive(lam: float) -> float:
    if not lam > 0:
        raise DomainError(f"λ 必须为正，收到 {lam}")
    return math.log(lam)


class SphereProfile:
    """
    球面 S^{2d−1} 上的正连续函数 Φ。

    Args:
        d (int): 维数。
        func (Callable): 作用在单位向量数组 (Q, 2d) 上的向量化函数。
        order (int): 球面求积阶数。
        description (dict): 序列化描述。
    """

    def __init__(self, d: int, func: Callable[[NDArray], NDArray], order: int = 24,
                 description: Optional[Dict] = None):
        self.d = int(d)
        self.func = func
        self.order = int(order)
        self.description = description or {"kind": "callable"}
        vectors, _ = sphere_rule(self.d, self.order)
        values = np.asarray(func(vectors), dtype=float)
        if not np.all(np.isfinite(values)) or np.min(values) <= 0:
            raise InputError("球面剖面 Φ 在求积网格上必须为有限正数")

    @classmethod
    def constant(cls, value: float = 1.0, d: int = 1, order: int = 24) -> "SphereProfile":
        return cls(d, lambda v: np.full(v.shape[0], float(value)), order,
                   {"kind": "constant", "value": float(value)})

    @classmethod
    def fourier(cls, constant: float, cosines: Sequence[float] = (), sines: Sequence[float] = (),
                order: int = 24) -> "SphereProfile":
        """d=1 时 Φ(θ) = c_0 + Σ a_k cos kθ + Σ b_k sin kθ。"""

        cosines, sines = tuple(map(float, cosines)), tuple(map(float, sines))

        def func(v):
            theta = np.arctan2(v[:, 1], v[:, 0])
            total = np.full(v.shape[0], float(constant))
            for k, a in enumerate(cosines, start=1):
                total += a * np.cos(k * theta)
            for k, b in enumerate(sines, start=1):
                total += b * np.sin(k * theta)
            return total

        return cls(1, func, order, {"kind": "fourier", "constant": float(constant),
                                    "cos": list(cosines), "sin": list(sines)})

    def integral(self, power: float) -> float:
        """∫_{S^{2d−1}} Φ^{−power} dϑ。"""

        vectors, weights = sphere_rule(self.d, self.order)
        return float(np.dot(weights, np.asarray(self.func(vectors), dtype=float) ** (-power)))

    def to_config(self) -> Dict:
        return dict(self.description)


# ---------------------------------------------------------------------------
# σ、η 与常数
# ---------------------------------------------------------------------------

def log_sigma(f: ComparisonFunction, log_lam: float) -> float:
    return 2.0 * f.d * f.log_inverse(log_lam)


def sigma(f: ComparisonFunction, lam: float) -> float:
    """σ(λ) = (f⁻¹(λ))^{2d}。"""

    return math.exp(log_sigma(f, _log_positive(lam)))


def eta(f: ComparisonFunction, lam: float) -> float:
    """η(λ) = λσ'(λ)/σ(λ) = 2d / (y f'(y)/f(y))，y = f⁻¹(λ)。"""

    y = math.exp(f.log_inverse(_log_positive(lam)))
    elasticity = f.elasticity(y)
    if not elasticity > 0:
        raise DomainError(f"f' 在 y={y:.6g} 处不为正，η 无定义")
    return 2.0 * f.d / elasticity


def counting(spec: SpectralData, lam: float) -> int:
    return spec.counting(lam)


def _sphere_exponent(d: int, beta: float) -> float:
    return 2.0 * d if math.isinf(beta) else 2.0 * d / beta


def weyl_constant(d: int, beta: float, phi: SphereProfile) -> float:
    """π/((2π)^{d+1} d) ∫ Φ^{−2d/β} dϑ，β = inf 时指数为 2d。"""

    if phi.d != d:
        raise InputError(f"球面剖面维数 {phi.d} 与 d={d} 不一致")
    return math.pi / ((2.0 * math.pi) ** (d + 1) * d) * phi.integral(_sphere_exponent(d, beta))


def gamma_const(d: int, phi: SphereProfile) -> float:
    """γ = √(2π) (2d / ∫ Φ^{−2d} dϑ)^{1/(2d)}。"""

    if phi.d != d:
        raise InputError(f"球面剖面维数 {phi.d} 与 d={d} 不一致")
    return math.sqrt(2.0 * math.pi) * (2.0 * d / phi.integral(2.0 * d)) ** (1.0 / (2.0 * d))


def log_eigenvalue_prediction(j: int, f: ComparisonFunction, d: int, phi: SphereProfile,
                              beta: Optional[float] = None) -> float:
    """ln λ_j 的主项预测。"""

    if j < 1:
        raise InputError(f"特征值序号 j 必须 ≥ 1，收到 {j}")
    beta = f.index if beta is None else beta
    root = j ** (1.0 / (2.0 * d))
    if math.isinf(beta):
        return f.log_value(gamma_const(d, phi) * root)
    return -beta / (2.0 * d) * math.log(weyl_constant(d, beta, phi)) + f.log_value(root)


def eigenvalue_prediction(j: int, f: ComparisonFunction, d: int, phi: SphereProfile,
                          beta: Optional[float] = None) -> float:
    """
    λ_j 的主项预测：β = inf 时为 f(γ j^{1/(2d)})，否则为 C^{−β/(2d)} f(j^{1/(2d)})。
    """

    return math.exp(log_eigenvalue_prediction(j, f, d, phi, beta))


def upper_bound_const(d: int, beta_prime: float, C_lower: float,
                      limit_case: bool = False) -> Tuple[float, float]:
    """
    计数函数上界常数及特征值下界的 h 阈值。

    Args:
        d (int): 维数。
        beta_prime (float): β'，可为 inf。
        C_lower (float): 下界常数 C > 0。
        limit_case (bool): 是否为极限情形（否则为下极限情形）。

    Returns:
        tuple: (bound, h_threshold)。
    """

    if not C_lower > 0:
        raise InputError(f"C_lower 必须为正，收到 {C_lower}")
    p = 0.0 if math.isinf(beta_prime) else 2.0 * d / beta_prime
    root_c = 1.0 if math.isinf(beta_prime) else C_lower ** (1.0 / beta_prime)
    gamma_p = math.exp(gammaln(1.0 + p))
    c_p = C_lower ** p
    d_fact = math.factorial(d)
    if limit_case:
        bound = gamma_p * math.e / (2 ** d * c_p * d_fact)
        h = math.sqrt(2.0) * root_c * d_fact ** (1.0 / (2 * d)) * (math.e * gamma_p) ** (-1.0 / (2 * d))
    else:
        bound = math.e / (2 ** d * d_fact) * (1.0 + gamma_p / c_p)
        h = (math.sqrt(2.0) * root_c * math.exp(-1.0 / (2 * d)) * d_fact ** (1.0 / (2 * d))
             * (c_p + gamma_p) ** (-1.0 / (2 * d)))
    return bound, h


def counting_upper_bound(f: ComparisonFunction, lam: float, C_lower: float,
                         limit_case: bool = False) -> float:
    """N(λ) 的有效上界 bound·σ(λ)，β' 取 f 的指标。"""

    bound, _ = upper_bound_const(f.d, f.index, C_lower, limit_case)
    return bound * sigma(f, lam)


# ---------------------------------------------------------------------------
# 几何计数
# ---------------------------------------------------------------------------

def _ray_radius(sym: Symbol, direction: NDArray, lam: float, R_max: float) -> float:
    def gap(r):
        sign, logs = sym.log_values((r * direction)[None, :])
        if lam > 0:
            return (float(logs[0]) if np.real(sign[0]) > 0 else -1e300) - math.log(lam)
        return float(np.real(sign[0])) * math.exp(float(logs[0])) - lam

    if gap(0.0) >= 0:
        return 0.0
    hi = 1.0
    while gap(hi) < 0:
        hi *= 2.0
        if hi > R_max:
            raise RangeError(f"次水平集 {{a < {lam:.6g}}} 沿方向 {direction.tolist()} 超出 R_max={R_max:g}")
    return brentq(gap, 0.0 if hi == 1.0 else hi / 2.0, hi, xtol=1e-13, rtol=1e-13)


def geometric_count(sym: Symbol, lam: float, quad: QuadratureSpec = QuadratureSpec(),
                    R_max: float = RAY_R_MAX) -> float:
    """
    (2π)^{−d} vol{a < λ}，极坐标下 vol = ∫ R(ϑ)^{2d}/(2d) dϑ，R(ϑ) 由逐射线求根得到。

    Raises:
        RangeError: 某条射线的根超出 R_max。
    """

    vectors, weights = sphere_rule(sym.d, quad.sphere_order)
    radii = np.array([_ray_radius(sym, v, lam, R_max) for v in vectors])
    volume = float(np.dot(weights, radii ** (2 * sym.d))) / (2 * sym.d)
    return volume / (2.0 * math.pi) ** sym.d


# ---------------------------------------------------------------------------
# 正则变化与 Tauber 反演
# ---------------------------------------------------------------------------

@dataclass
class RegularVariationReport:
    """σ(αλ)/σ(λ) 的抽样偏差。"""

    target_index: float
    max_deviation: float
    nu: float
    samples: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"target_index": self.target_index, "max_deviation": self.max_deviation,
                "nu": self.nu, "samples": self.samples}


def regular_variation_check(f: ComparisonFunction, alphas: Sequence[float],
                            lambdas: Sequence[float]) -> RegularVariationReport:
    """
    抽样检查 σ(αλ)/σ(λ) → α^{2d/β}（β = inf 时 → 1），并拟合 σ(αλ)/σ(λ) ≤ (α+1)^ν 的最小 ν。
    """

    index = f.variation_index
    deviation, nu = 0.0, 0.0
    samples = []
    for lam in lambdas:
        log_lam = _log_positive(lam)
        base = log_sigma(f, log_lam)
        for alpha in alphas:
            if not alpha > 0:
                raise InputError(f"α 必须为正，收到 {alpha}")
            log_ratio = log_sigma(f, log_lam + math.log(alpha)) - base
            ratio = math.exp(log_ratio)
            target = alpha ** index
            deviation = max(deviation, abs(ratio - target))
            nu = max(nu, log_ratio / math.log(alpha + 1.0))
            samples.append({"lambda": lam, "alpha": alpha, "ratio": ratio, "target": target})
    return RegularVariationReport(index, deviation, max(0.0, nu), samples)


@dataclass
class KaramataEstimate:
    """
    热迹到计数函数的 Tauber 反演。

    Attributes:
        limit (float): L = lim trace(t)/σ(1/t) 的外推值。
        index (float): 正则变化指标 2d/β。
        ratios (list): 各样本的 trace/σ(1/t)。
        extrapolated (bool): 是否使用了 Richardson 外推（至少三个样本）。
    """

    limit: float
    index: float
    f: ComparisonFunction
    ratios: List[float]
    extrapolated: bool

    @property
    def gamma_factor(self) -> float:
        return math.exp(gammaln(1.0 + self.index))

    def counting_estimate(self, lam: float) -> float:
        """N_est(λ) = L σ(λ) / Γ(1 + 2d/β)。"""

        return self.limit * sigma(self.f, lam) / self.gamma_factor

    def to_dict(self) -> Dict:
        return {"limit": self.limit, "index": self.index, "gamma_factor": self.gamma_factor,
                "ratios": list(self.ratios), "extrapolated": self.extrapolated}


def karamata_estimate(heat_samples: Sequence[Tuple[float, float]],
                      f: ComparisonFunction) -> KaramataEstimate:
    """
    由 (t, trace) 样本外推 L，并给出 Karamata 反演的计数估计。

    L 取最后三个样本的 Richardson 外推：过三点 (t, trace/σ(1/t)) 的二次多项式在 t = 0 处的值。
    只有两个样本时取最小 t 处的比值。

    Raises:
        FitQualityError: 样本少于两个、t 重复、迹随 t 减小而不增，或比值序列振荡。
    """

    samples = sorted(heat_samples, key=lambda item: -item[0])
    if len(samples) < 2:
        raise FitQualityError(f"Tauber 外推至少需要两个样本，收到 {len(samples)} 个")
    if len({t for t, _ in samples}) < len(samples):
        raise FitQualityError("Tauber 外推的 t 样本不能重复")
    traces = [trace for _, trace in samples]
    if any(b < a for a, b in zip(traces, traces[1:])):
        raise FitQualityError(f"热迹随 t 减小不单调: {traces}")
    ratios = [trace / math.exp(log_sigma(f, -math.log(t))) for t, trace in samples]
    differences = np.diff(ratios)
    if np.any(differences[1:] * differences[:-1] < 0):
        raise FitQualityError(f"trace/σ(1/t) 比值振荡，残差 {differences.tolist()}")

    limit, extrapolated = ratios[-1], False
    if len(ratios) >= 3:
        nodes = [t for t, _ in samples[-3:]]
        limit, extrapolated = 0.0, True
        for i, (t_i, r_i) in enumerate(zip(nodes, ratios[-3:])):
            # Lagrange 基函数在 t = 0 处的值
            basis = math.prod(t_j / (t_j - t_i) for j, t_j in enumerate(nodes) if j != i)
            limit += r_i * basis
    logging.info(f"Tauber 外推 L = {limit:.10g}（样本 {len(ratios)} 个）")
    return KaramataEstimate(float(limit), f.variation_index, f, [float(r) for r in ratios], extrapolated)


# ---------------------------------------------------------------------------
# 特征值诊断
# ---------------------------------------------------------------------------

@dataclass
class LowerBoundReport:
    """λ_j ≥ f(h j^{1/(2d)}) 的逐项检查。"""

    h: float
    checked: int
    violations: int
    onset: Optional[int]

    def to_dict(self) -> Dict:
        return {"h": self.h, "checked": self.checked, "violations": self.violations,
                "onset": self.onset}


def eigenvalue_lower_bound_check(eigs: SpectralData, f: ComparisonFunction, h: float) -> LowerBoundReport:
    """
    对可信且为正的 λ_j（j ≥ 1）检查 λ_j ≥ f(h j^{1/(2d)})，并报告观察到的起始序号 j_h。
    """

    trusted = eigs.trusted
    failures = []
    checked = 0
    for j in range(1, trusted.size):
        if trusted[j] <= 0:
            continue
        y = h * j ** (1.0 / (2 * f.d))
        if y < f.Y:
            continue
        checked += 1
        if math.log(trusted[j]) < f.log_value(y):
            failures.append(j)
    onset = None
    if checked:
        onset = failures[-1] + 1 if failures else 1
        if onset >= trusted.size:
            onset = None
    return LowerBoundReport(float(h), checked, len(failures), onset)


def empirical_lower_bound_scale(eigs: SpectralData, f: ComparisonFunction,
                                fraction: float = 0.5, safety: float = 0.95) -> float:
    """可信谱后 fraction 部分上 safety·min f⁻¹(λ_j)/j^{1/(2d)}。"""

    trusted = eigs.trusted
    start = max(1, int(trusted.size * (1.0 - fraction)))
    scales = [math.exp(f.log_inverse(math.log(trusted[j]))) / j ** (1.0 / (2 * f.d))
              for j in range(start, trusted.size)
              if trusted[j] > 0 and math.log(trusted[j]) >= f.log_lower]
    if not scales:
        raise RangeError("可信谱中没有落在比较函数定义域内的特征值")
    return safety * min(scales)


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    rms_residual: float
    j_range: Tuple[int, int]

    def to_dict(self) -> Dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "rms_residual": self.rms_residual, "j_range": list(self.j_range)}


def log_slope_fit(eigs: SpectralData, j_range: Tuple[int, int], d: int, s: float) -> SlopeFit:
    """ln λ_j 对 j^{1/(2ds)} 在 j_range 上的最小二乘直线。"""

    lo, hi = int(j_range[0]), int(j_range[1])
    if hi >= eigs.trusted_count:
        raise RangeError(f"j 范围上界 {hi} 超出可信前缀 {eigs.trusted_count}")
    if hi - lo < 2:
        raise InputError(f"j 范围 {j_range} 太短，无法拟合")
    j = np.arange(lo, hi + 1, dtype=float)
    values = eigs.trusted[lo:hi + 1]
    if np.any(values <= 0):
        raise InputError("对数斜率拟合要求特征值为正")
    abscissa = j ** (1.0 / (2.0 * d * s))
    slope, intercept = np.polyfit(abscissa, np.log(values), 1)
    residual = np.log(values) - (slope * abscissa + intercept)
    return SlopeFit(float(slope), float(intercept), float(np.sqrt(np.mean(residual ** 2))), (lo, hi))


@dataclass
class CountingTrend:
    """N(λ)/σ(λ) 在 λ 网格上的取值与单调趋势（仅作记录）。"""

    rows: List[Tuple[float, int, float, float, float]]
    trend: str

    def to_dict(self) -> Dict:
        return {"trend": self.trend, "rows": [list(row) for row in self.rows]}


def counting_ratio_trend(eigs: SpectralData, f: ComparisonFunction, lambdas: Sequence[float],
                         predicted_constant: float) -> CountingTrend:
    """
    计算 (λ, N, σ, N/σ, C) 行，并判定 N/σ 的趋势：increasing、decreasing 或 mixed。
    """

    rows = []
    for lam in sorted(lambdas):
        count = eigs.counting(lam)
        sig = sigma(f, lam)
        rows.append((float(lam), count, sig, count / sig, float(predicted_constant)))
    ratios = np.array([row[3] for row in rows])
    steps = np.diff(ratios)
    if steps.size and np.all(steps >= 0):
        trend = "increasing"
    elif steps.size and np.all(steps <= 0):
        trend = "decreasing"
    else:
        trend = "mixed"
    return CountingTrend(rows, trend)
