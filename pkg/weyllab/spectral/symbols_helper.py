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

"""相空间符号：取值、导数 jet、亚椭圆性扫描与正化。

坐标顺序固定为 w = (x_1, ..., x_d, ξ_1, ..., ξ_d)。径向符号以 u = |w|² 的函数给出，
因此在原点处同样光滑。取值统一返回 (符号, log|a|)，以容纳超多项式增长。
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln, logsumexp

from weyllab.errors import CapabilityError, DegenerateInputError, InputError, PreconditionError
from weyllab.spectral.jet_helper import Jet, jet_space
from weyllab.spectral.quadrature_helper import sphere_rule
from weyllab.spectral.weights_helper import (WeightSequence, associated_function_values,
                                             log_weight_values)

Number = Union[int, float, complex]

JET_ORDER_CAP = 12
FD_MAX_ORDER = 4
EXP_SATURATION = 700.0
GROWTH_TOLERANCE = 0.25
LOWER_BOUND_M_GRID = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
POSITIVITY_DIRECTIONS = 64


@dataclass(frozen=True)
class PhasePoint:
    """相空间中的点 w = (x, ξ)。"""

    coordinates: Tuple[float, ...]

    def __post_init__(self):
        n = len(self.coordinates)
        if n == 0 or n % 2:
            raise InputError(f"相空间坐标个数必须为正偶数，收到 {n}")
        if not all(math.isfinite(c) for c in self.coordinates):
            raise InputError(f"相空间坐标必须有限: {self.coordinates}")

    @classmethod
    def of(cls, coordinates: Sequence[float]) -> "PhasePoint":
        return cls(tuple(float(c) for c in coordinates))

    @property
    def d(self) -> int:
        return len(self.coordinates) // 2

    @property
    def x(self) -> Tuple[float, ...]:
        return self.coordinates[:self.d]

    @property
    def xi(self) -> Tuple[float, ...]:
        return self.coordinates[self.d:]

    @property
    def array(self) -> NDArray:
        return np.array(self.coordinates, dtype=float)

    @property
    def norm(self) -> float:
        return math.hypot(*self.coordinates)

    @property
    def bracket(self) -> float:
        return math.sqrt(1.0 + self.norm ** 2)


def as_coordinates(w: Union[PhasePoint, Sequence[float]], d: int) -> NDArray:
    """把 PhasePoint 或坐标序列转换为长度 2d 的数组，并校验有限性。"""

    array = w.array if isinstance(w, PhasePoint) else np.asarray(w, dtype=float).ravel()
    if array.shape != (2 * d,):
        raise InputError(f"期望 {2 * d} 个相空间坐标，收到 {array.size} 个")
    if not np.all(np.isfinite(array)):
        raise InputError(f"相空间坐标必须有限: {array.tolist()}")
    return array


def _sign_and_log(values: NDArray) -> Tuple[NDArray, NDArray]:
    magnitude = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(magnitude)
        if np.iscomplexobj(values):
            sign = np.where(magnitude > 0, values / np.where(magnitude > 0, magnitude, 1.0), 0.0)
        else:
            sign = np.sign(values)
    return sign, logs


def _univariate(coeffs: Sequence[Number]) -> Jet:
    coeffs = np.asarray(coeffs)
    return Jet(jet_space(1, len(coeffs) - 1), coeffs.astype(np.result_type(coeffs, float)))


def _shift_variable(value: float, order: int) -> Jet:
    return Jet.variable(0, value, 1, order)


# ---------------------------------------------------------------------------
# 径向剖面 g(u)
# ---------------------------------------------------------------------------

class RadialProfile:
    """u = |w|² 的标量函数 g(u)。"""

    polynomial_coefficients: Optional[Tuple[float, ...]] = None

    def log_values(self, u: NDArray) -> Tuple[NDArray, NDArray]:
        return _sign_and_log(self.values(u))

    def values(self, u: NDArray) -> NDArray:
        sign, logs = self.log_values(u)
        return sign * np.exp(logs)

    def taylor(self, u0: float, D: int) -> Optional[NDArray]:
        """g 在 u0 处的 Taylor 系数 g^{(k)}(u0)/k!，k ≤ D；没有导数路径时返回 None。"""

        return None

    def to_config(self) -> Dict:
        raise NotImplementedError


class PolynomialProfile(RadialProfile):
    """g(u) = Σ c_k u^k，exp_wrap 为真时取 exp(Σ c_k u^k)。"""

    def __init__(self, coefficients: Sequence[float], exp_wrap: bool = False):
        coefficients = tuple(float(c) for c in coefficients)
        if not coefficients or not all(math.isfinite(c) for c in coefficients):
            raise InputError(f"多项式剖面系数必须非空且有限: {coefficients}")
        self.coefficients = coefficients
        self.exp_wrap = bool(exp_wrap)
        self.polynomial_coefficients = None if self.exp_wrap else coefficients

    def _poly(self, u):
        return np.polynomial.polynomial.polyval(u, self.coefficients)

    def log_values(self, u):
        p = self._poly(np.asarray(u, dtype=float))
        if self.exp_wrap:
            return np.ones_like(p), p
        return _sign_and_log(p)

    def values(self, u):
        p = self._poly(np.asarray(u, dtype=float))
        return np.exp(p) if self.exp_wrap else p

    def taylor(self, u0, D):
        coeffs = np.asarray(self.coefficients)
        shifted = []
        for k in range(D + 1):
            shifted.append(np.polynomial.polynomial.polyval(u0, coeffs) / math.factorial(k)
                           if coeffs.size else 0.0)
            coeffs = np.polynomial.polynomial.polyder(coeffs) if coeffs.size > 1 else np.zeros(0)
        if self.exp_wrap:
            return _univariate(shifted).exp().coeffs
        return np.array(shifted, dtype=float)

    def to_config(self):
        return {"coefficients": list(self.coefficients), "exp": self.exp_wrap}


class BracketExpProfile(RadialProfile):
    """g(u) = exp((h²(1+u))^{1/(2s)})，即 exp((h⟨w⟩)^{1/s})。"""

    def __init__(self, h: float, s: float):
        self.h = float(h)
        self.s = float(s)

    def log_values(self, u):
        u = np.asarray(u, dtype=float)
        return np.ones_like(u), self.h ** (1.0 / self.s) * (1.0 + u) ** (0.5 / self.s)

    def taylor(self, u0, D):
        inner = (1.0 + _shift_variable(u0, D)).power(0.5 / self.s) * self.h ** (1.0 / self.s)
        return inner.exp().coeffs

    def to_config(self):
        return {"h": self.h, "s": self.s}


class EntireSeriesProfile(RadialProfile):
    """g(u) = P(⟨w⟩)，P(y) = 1 + Σ_{n≥1} (hy)^n / n^{sn}，在对数域按 logsumexp 求和。"""

    def __init__(self, h: float, s: float):
        self.h = float(h)
        self.s = float(s)

    def _term_count(self, y_max: float, extra: int = 0) -> int:
        peak = (self.h * y_max) ** (1.0 / self.s) / math.e
        return int(max(20.0, 3.0 * peak + 50.0)) + extra

    def log_values(self, u):
        u = np.asarray(u, dtype=float)
        y = np.sqrt(1.0 + u).ravel()
        n = np.arange(1, self._term_count(float(np.max(y))) + 1, dtype=float)
        terms = np.log(self.h * y)[:, None] * n[None, :] - self.s * n * np.log(n)
        terms = np.concatenate([np.zeros((y.size, 1)), terms], axis=1)
        return np.ones_like(u), logsumexp(terms, axis=1).reshape(u.shape)

    def series_taylor(self, y0: float, D: int) -> NDArray:
        """P 在 y0 处的 Taylor 系数 Σ_n C(n,k) h^n y0^{n-k} / n^{sn}。"""

        n = np.arange(1, self._term_count(y0, D) + 1, dtype=float)
        coeffs = []
        for k in range(D + 1):
            m = n[n >= k]
            logs = (gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
                    + m * math.log(self.h) + (m - k) * math.log(y0) - self.s * m * np.log(m))
            total = math.exp(logsumexp(logs)) if m.size else 0.0
            coeffs.append(total + (1.0 if k == 0 else 0.0))
        return np.array(coeffs)

    def taylor(self, u0, D):
        y = (1.0 + _shift_variable(u0, D)).sqrt()
        return y.compose(self.series_taylor(math.sqrt(1.0 + u0), D)).coeffs

    def to_config(self):
        return {"h": self.h, "s": self.s}


class CallableProfile(RadialProfile):
    """
    由可调用对象给出的剖面。

    Args:
        func (Callable): 向量化的 g(u)。
        derivatives (Callable, optional): 导数预言 (u0, D) -> [g(u0), g'(u0), ..., g^{(D)}(u0)]。
    """

    def __init__(self, func: Callable[[NDArray], NDArray],
                 derivatives: Optional[Callable[[float, int], Sequence[Number]]] = None):
        self.func = func
        self.derivatives = derivatives

    def values(self, u):
        return np.asarray(self.func(np.asarray(u, dtype=float)))

    def taylor(self, u0, D):
        if self.derivatives is None:
            return None
        derivs = list(self.derivatives(u0, D))
        if len(derivs) < D + 1:
            raise CapabilityError(f"导数预言只给出 {len(derivs) - 1} 阶，需要 {D} 阶")
        return np.array([derivs[k] / math.factorial(k) for k in range(D + 1)])

    def to_config(self):
        return {"callable": getattr(self.func, "__name__", "profile")}


# ---------------------------------------------------------------------------
# 符号族
# ---------------------------------------------------------------------------

class Symbol:
    """相空间符号的公共接口。子类实现 values，并在有闭式导数时实现 _exact_jet。"""

    family = "symbol"

    def __init__(self, d: int):
        if int(d) < 1:
            raise InputError(f"维数 d 必须 ≥ 1，收到 {d}")
        self.d = int(d)

    @property
    def is_real(self) -> bool:
        return True

    def values(self, points: NDArray) -> NDArray:
        raise NotImplementedError

    def log_values(self, points: NDArray) -> Tuple[NDArray, NDArray]:
        return _sign_and_log(self.values(points))

    def evaluate(self, w) -> Tuple[Number, float]:
        """返回 (符号, log|a(w)|)；复值符号的符号部分是单位复数。"""

        point = as_coordinates(w, self.d)
        sign, logs = self.log_values(point[None, :])
        sign = complex(sign[0]) if np.iscomplexobj(sign) else float(sign[0])
        return sign, float(logs[0])

    def value(self, w) -> Number:
        sign, log_magnitude = self.evaluate(w)
        return sign * math.exp(log_magnitude) if log_magnitude > -math.inf else 0.0 * sign

    def _exact_jet(self, w: NDArray, D: int) -> Optional[Jet]:
        return None

    def jet(self, w, D: int, cap: int = JET_ORDER_CAP, allow_fd: bool = True) -> Jet:
        """
        w 处阶数 D 的导数 jet，优先使用闭式 Taylor 算术，否则退回有限差分。

        Args:
            w: 相空间点。
            D (int): jet 阶数。
            cap (int): 阶数上限。
            allow_fd (bool): 是否允许有限差分回退。

        Returns:
            Jet: 2d 元 jet。

        Raises:
            InputError: D 超过上限或为负。
            CapabilityError: 没有导数路径且禁止回退。
        """

        if D < 0 or D > cap:
            raise InputError(f"jet 阶数 {D} 超出允许范围 [0, {cap}]")
        point = as_coordinates(w, self.d)
        exact = self._exact_jet(point, D)
        if exact is not None:
            return exact
        if not allow_fd:
            raise CapabilityError(f"{self.family} 符号没有导数预言，且禁用了有限差分回退")
        return finite_difference_jet(self, point, D)

    def to_config(self) -> Dict:
        raise NotImplementedError


def _phase_variables(w: NDArray, D: int) -> List[Jet]:
    n = w.size
    return [Jet.variable(i, float(w[i]), n, D) for i in range(n)]


def _squared_norm_jet(w: NDArray, D: int) -> Jet:
    variables = _phase_variables(w, D)
    total = variables[0] * variables[0]
    for var in variables[1:]:
        total = total + var * var
    return total


class RadialSymbol(Symbol):
    """a(w) = g(|w|²)。"""

    family = "radial"

    def __init__(self, profile: RadialProfile, d: int = 1):
        super().__init__(d)
        self.profile = profile

    @property
    def is_real(self):
        return not isinstance(self.profile, CallableProfile) or not np.iscomplexobj(
            self.profile.values(np.zeros(1)))

    def values(self, points):
        return self.profile.values(np.sum(np.square(points), axis=1))

    def log_values(self, points):
        return self.profile.log_values(np.sum(np.square(points), axis=1))

    def _exact_jet(self, w, D):
        taylor = self.profile.taylor(float(np.dot(w, w)), D)
        if taylor is None:
            return None
        return _squared_norm_jet(w, D).compose(taylor)

    def to_config(self):
        return {"family": "radial", "d": self.d, **self.profile.to_config()}


class ExpGevreySymbol(RadialSymbol):
    """exp((h⟨w⟩)^{1/s})。"""

    family = "exp_gevrey"

    def __init__(self, h: float, s: float, d: int = 1):
        if not h > 0 or not s > 1:
            raise InputError(f"exp_gevrey 要求 h > 0 且 s > 1，收到 h={h}, s={s}")
        super().__init__(BracketExpProfile(h, s), d)
        self.h = float(h)
        self.s = float(s)

    def to_config(self):
        return {"family": "exp_gevrey", "h": self.h, "s": self.s, "d": self.d}


class EntireSeriesSymbol(RadialSymbol):
    """P(⟨w⟩)，P(y) = 1 + Σ (hy)^n / n^{sn}。"""

    family = "entire_series"

    def __init__(self, h: float, s: float, d: int = 1):
        if not h > 0 or not s > 1:
            raise InputError(f"entire_series 要求 h > 0 且 s > 1，收到 h={h}, s={s}")
        super().__init__(EntireSeriesProfile(h, s), d)
        self.h = float(h)
        self.s = float(s)

    def to_config(self):
        return {"family": "entire_series", "h": self.h, "s": self.s, "d": self.d}


class PolynomialSymbol(Symbol):
    """(x, ξ) 的多项式 Σ c_e w^e，指数 e 长度为 2d。"""

    family = "polynomial"

    def __init__(self, terms: Mapping[Tuple[int, ...], Number], d: int = 1):
        super().__init__(d)
        cleaned: Dict[Tuple[int, ...], Number] = {}
        for exponent, coefficient in terms.items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != 2 * self.d or any(e < 0 for e in exponent):
                raise InputError(f"单项式指数 {exponent} 与 d={self.d} 不匹配")
            cleaned[exponent] = cleaned.get(exponent, 0.0) + coefficient
        if not cleaned:
            raise InputError("多项式符号至少需要一项")
        self.terms = cleaned

    @classmethod
    def coordinate(cls, index: int, d: int = 1, coefficient: Number = 1.0) -> "PolynomialSymbol":
        """单个坐标 w_index 的倍数，例如 x_1 或 ξ_1。"""

        exponent = [0] * (2 * d)
        exponent[index] = 1
        return cls({tuple(exponent): coefficient}, d)

    @property
    def is_real(self):
        return all(complex(c).imag == 0 for c in self.terms.values())

    @property
    def degree(self) -> int:
        return max(sum(e) for e in self.terms)

    def values(self, points):
        points = np.asarray(points, dtype=float)
        total = np.zeros(points.shape[0], dtype=complex if not self.is_real else float)
        for exponent, coefficient in self.terms.items():
            total = total + coefficient * np.prod(points ** np.asarray(exponent), axis=1)
        return total

    def _exact_jet(self, w, D):
        variables = _phase_variables(w, D)
        total = Jet.constant(0.0, w.size, D)
        for exponent, coefficient in self.terms.items():
            term = Jet.constant(coefficient, w.size, D)
            for var, e in zip(variables, exponent):
                if e:
                    term = term * var ** e
            total = total + term
        return total

    def to_config(self):
        return {"family": "polynomial", "d": self.d,
                "terms": [{"powers": list(e), "coefficient": c} for e, c in self.terms.items()]}


class SeparableSum(Symbol):
    """Σ_i a_i(x^{(i)}, ξ^{(i)})，各部分作用在互不相交的坐标块上。"""

    family = "separable_sum"

    def __init__(self, parts: Sequence[Symbol]):
        if not parts:
            raise InputError("separable_sum 至少需要一个部分")
        super().__init__(sum(p.d for p in parts))
        self.parts = tuple(parts)
        self.var_maps = []
        offset = 0
        for part in self.parts:
            block = list(range(offset, offset + part.d))
            self.var_maps.append(block + [self.d + i for i in block])
            offset += part.d

    @property
    def is_real(self):
        return all(p.is_real for p in self.parts)

    def values(self, points):
        return sum(part.values(points[:, vm]) for part, vm in zip(self.parts, self.var_maps))

    def log_values(self, points):
        if not self.is_real:
            return super().log_values(points)
        signs, logs = zip(*(part.log_values(points[:, vm])
                            for part, vm in zip(self.parts, self.var_maps)))
        logs, sign = logsumexp(np.array(logs), axis=0, b=np.array(signs), return_sign=True)
        return sign, logs

    def _exact_jet(self, w, D):
        total = Jet.constant(0.0, w.size, D)
        for part, vm in zip(self.parts, self.var_maps):
            jet = part._exact_jet(w[vm], D)
            if jet is None:
                return None
            total = total + jet.embed(w.size, vm)
        return total

    def to_config(self):
        return {"family": "separable_sum", "parts": [p.to_config() for p in self.parts]}


class ShiftedSymbol(Symbol):
    """a(w) + z，z 可为复数。"""

    family = "shifted"

    def __init__(self, base: Symbol, z: Number):
        super().__init__(base.d)
        self.base = base
        self.z = complex(z) if complex(z).imag != 0 else float(complex(z).real)

    @property
    def is_real(self):
        return self.base.is_real and isinstance(self.z, float)

    def values(self, points):
        return self.base.values(points) + self.z

    def _exact_jet(self, w, D):
        jet = self.base._exact_jet(w, D)
        return None if jet is None else jet + self.z

    def to_config(self):
        z = complex(self.z)
        return {"family": "shifted", "base": self.base.to_config(), "z": [z.real, z.imag]}


# ---------------------------------------------------------------------------
# 光滑截断与正化
# ---------------------------------------------------------------------------

def _log_bump(tau):
    return 1.0 - 1.0 / (1.0 - tau * tau)


def smooth_step(tau) -> NDArray:
    """
    由 B(τ) = exp(1 − 1/(1−τ²)) 构造的 C^∞ 台阶：τ ≤ 0 时为 0，τ ≥ 1 时为 1，
    中间取 B(1−τ) / (B(1−τ) + B(τ))。

    Args:
        tau: 标量或数组。

    Returns:
        numpy.ndarray: 与 tau 同形状的台阶值。
    """

    tau = np.asarray(tau, dtype=float)
    result = np.where(tau >= 1.0, 1.0, 0.0)
    inside = (tau > 0.0) & (tau < 1.0)
    if np.any(inside):
        t = tau[inside]
        exponent = np.clip(_log_bump(t) - _log_bump(1.0 - t), -EXP_SATURATION, EXP_SATURATION)
        result[inside] = 1.0 / (1.0 + np.exp(exponent))
    return result


def smooth_step_taylor(tau0: float, D: int) -> NDArray:
    """smooth_step 在 tau0 处的一元 Taylor 系数。"""

    coeffs = np.zeros(D + 1)
    if tau0 >= 1.0:
        coeffs[0] = 1.0
        return coeffs
    if tau0 <= 0.0:
        return coeffs
    tau = _shift_variable(tau0, D)
    exponent = _log_bump(tau) - _log_bump(1.0 - tau)
    if exponent.value > EXP_SATURATION:
        return coeffs
    if exponent.value < -EXP_SATURATION:
        coeffs[0] = 1.0
        return coeffs
    return (1.0 + exponent.exp()).reciprocal().coeffs


class PositivizedSymbol(Symbol):
    """b = (1−χ)a + χ，χ(r) = 1 − smooth_step((r − r_in)/(r_out − r_in))。"""

    family = "positivized"

    def __init__(self, base: Symbol, r_in: float, r_out: float):
        super().__init__(base.d)
        self.base = base
        self.r_in = float(r_in)
        self.r_out = float(r_out)

    def _cutoff(self, r):
        return 1.0 - smooth_step((r - self.r_in) / (self.r_out - self.r_in))

    def values(self, points):
        points = np.asarray(points, dtype=float)
        r = np.sqrt(np.sum(np.square(points), axis=1))
        result = np.ones(points.shape[0])
        outer = r >= self.r_out
        middle = (r > self.r_in) & ~outer
        if np.any(outer):
            result[outer] = self.base.values(points[outer])
        if np.any(middle):
            chi = self._cutoff(r[middle])
            result[middle] = (1.0 - chi) * self.base.values(points[middle]) + chi
        return result

    def log_values(self, points):
        points = np.asarray(points, dtype=float)
        sign, logs = _sign_and_log(self.values(points))
        outer = np.sqrt(np.sum(np.square(points), axis=1)) >= self.r_out
        if np.any(outer):
            sign[outer], logs[outer] = self.base.log_values(points[outer])
        return sign, logs

    def evaluate(self, w):
        point = as_coordinates(w, self.d)
        if math.hypot(*point) >= self.r_out:
            return self.base.evaluate(point)
        return super().evaluate(point)

    def _exact_jet(self, w, D):
        r0 = math.hypot(*w)
        if r0 >= self.r_out:
            return self.base._exact_jet(w, D)
        if r0 <= self.r_in:
            return Jet.constant(1.0, w.size, D)
        a = self.base._exact_jet(w, D)
        if a is None:
            return None
        tau = (_squared_norm_jet(w, D).sqrt() - self.r_in) / (self.r_out - self.r_in)
        chi = 1.0 - tau.compose(smooth_step_taylor(tau.value, D))
        return (1.0 - chi) * a + chi

    def to_config(self):
        return {"family": "positivized", "base": self.base.to_config(),
                "r_in": self.r_in, "r_out": self.r_out}


def _scan_directions(d: int, count: int) -> NDArray:
    """单位球面 S^{2d-1} 上的扫描方向。"""

    if d == 1:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    vectors, _ = sphere_rule(d, max(2, count // 4))
    return vectors


def positivize(sym: Symbol, r_in: float, r_out: float) -> PositivizedSymbol:
    """
    把在 {|w| ≥ r_in} 上为正的实符号改造成处处为正的符号，外部保持不变。

    Args:
        sym (Symbol): 原符号。
        r_in (float): 过渡区内半径。
        r_out (float): 过渡区外半径。

    Returns:
        PositivizedSymbol: 正化后的符号。

    Raises:
        InputError: 半径不满足 0 < r_in < r_out。
        PreconditionError: 原符号在 {|w| ≥ r_in} 的扫描点上非正或非实。
    """

    if not 0 < r_in < r_out:
        raise InputError(f"正化要求 0 < r_in < r_out，收到 r_in={r_in}, r_out={r_out}")
    if not sym.is_real:
        raise PreconditionError("只能正化实值符号")
    radii = np.geomspace(r_in, 4.0 * r_out, 32)
    directions = _scan_directions(sym.d, POSITIVITY_DIRECTIONS)
    points = (radii[:, None, None] * directions[None, :, :]).reshape(-1, 2 * sym.d)
    sign, _ = sym.log_values(points)
    bad = np.nonzero(np.real(sign) <= 0)[0]
    if bad.size:
        raise PreconditionError(
            f"符号在 |w| ≥ {r_in} 的点 {points[bad[0]].tolist()} 处不为正，无法正化")
    logging.debug(f"正化符号 {sym.family}，过渡区 [{r_in}, {r_out}]")
    return PositivizedSymbol(sym, r_in, r_out)


# ---------------------------------------------------------------------------
# 有限差分 jet
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _central_stencil(k: int) -> Tuple[Tuple[int, ...], Tuple[float, ...]]:
    """k 阶导数的四阶中心差分模板 (偏移, 权重)。"""

    if k == 0:
        return (0,), (1.0,)
    half = (k + 1) // 2 + 1
    offsets = np.arange(-half, half + 1)
    vandermonde = np.array([offsets ** q / math.factorial(q) for q in range(offsets.size)],
                           dtype=float)
    rhs = np.zeros(offsets.size)
    rhs[k] = 1.0
    weights = np.linalg.solve(vandermonde, rhs)
    return tuple(int(o) for o in offsets), tuple(float(c) for c in weights)


def finite_difference_jet(sym: Symbol, w: NDArray, D: int) -> Jet:
    """
    用张量积中心差分构造 jet。二阶以内步长 h = max(1e-4, 1e-4⟨w⟩)，k ≥ 3 阶的步长为 10^{k−2} h。

    Raises:
        CapabilityError: D 超过有限差分支持的阶数。
    """

    if D > FD_MAX_ORDER:
        raise CapabilityError(f"有限差分 jet 最高支持 {FD_MAX_ORDER} 阶，请求 {D} 阶")
    w = np.asarray(w, dtype=float)
    n = w.size
    base_step = max(1e-4, 1e-4 * math.sqrt(1.0 + float(np.dot(w, w))))
    space = jet_space(n, D)
    partials = {}
    for exponent in space.exponents:
        order = int(exponent.sum())
        step = base_step * 10.0 ** max(0, order - 2)
        grids = [np.array(_central_stencil(int(k))[0]) * step for k in exponent]
        weights = [np.array(_central_stencil(int(k))[1]) for k in exponent]
        mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, n)
        samples = sym.values(w[None, :] + mesh)
        tensor = weights[0]
        for weight in weights[1:]:
            tensor = np.multiply.outer(tensor, weight)
        partials[tuple(int(e) for e in exponent)] = np.dot(tensor.ravel(), samples) / step ** order
    return Jet.from_partials(partials, n, D)


def evaluate(sym: Symbol, w) -> Tuple[Number, float]:
    return sym.evaluate(w)


def jet(sym: Symbol, w, D: int, cap: int = JET_ORDER_CAP, allow_fd: bool = True) -> Jet:
    return sym.jet(w, D, cap=cap, allow_fd=allow_fd)


# ---------------------------------------------------------------------------
# 亚椭圆性扫描
# ---------------------------------------------------------------------------

@dataclass
class HypoellipticityReport:
    """
    亚椭圆性条件的网格扫描结果。

    Attributes:
        B (float): 扫描环域内半径。
        R_out (float): 扫描环域外半径。
        D (int): 导数阶数。
        rho (float): 增益指数 ρ。
        per_order_constants (tuple): 各阶 sup |∂^α a|⟨w⟩^{ρk}/(|a|A_k)。
        growth_exponents (tuple): 各阶环上最大值对 log⟨r⟩ 的外半段斜率。
        bounded (tuple): 各阶斜率是否不超过 GROWTH_TOLERANCE。
        geometric_ratio (float): 使 per_order_constants[k] ≤ h^k 的最小 h。
        lower_bound_c (float): 下界条件中的常数 c。
        lower_bound_m (float): 下界条件中的最小 m，网格上找不到时为 None。
    """

    B: float
    R_out: float
    D: int
    rho: float
    per_order_constants: Tuple[float, ...]
    growth_exponents: Tuple[float, ...]
    bounded: Tuple[bool, ...]
    geometric_ratio: float
    lower_bound_c: Optional[float] = None
    lower_bound_m: Optional[float] = None
    grid_points: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def hypoelliptic_on_grid(self) -> bool:
        return all(self.bounded) and self.lower_bound_m is not None

    def to_dict(self) -> Dict:
        return {
            "B": self.B, "R_out": self.R_out, "D": self.D, "rho": self.rho,
            "per_order_constants": list(self.per_order_constants),
            "growth_exponents": list(self.growth_exponents),
            "bounded": list(self.bounded),
            "geometric_ratio": self.geometric_ratio,
            "lower_bound": {"c": self.lower_bound_c, "m": self.lower_bound_m},
            "grid_points": self.grid_points,
            "notes": list(self.notes),
        }


def _block_norms(points: NDArray, d: int) -> Tuple[NDArray, NDArray]:
    return (np.sqrt(np.sum(np.square(points[:, :d]), axis=1)),
            np.sqrt(np.sum(np.square(points[:, d:]), axis=1)))


def hypoellipticity_report(sym: Symbol, B: float, R_out: float, grid_n: int, D: int,
                           rho: float, A: WeightSequence, cap: int = JET_ORDER_CAP
                           ) -> HypoellipticityReport:
    """
    在极坐标网格 {B ≤ |w| ≤ R_out} 上扫描亚椭圆性条件。

    Args:
        sym (Symbol): 被检查的符号。
        B (float): 环域内半径。
        R_out (float): 环域外半径。
        grid_n (int): 径向层数与方向数。
        D (int): 检查的最高导数阶。
        rho (float): ρ ∈ (0, 1]。
        A (WeightSequence): 导数估计使用的权重序列 A_p，下界拟合的 M 也由它给出。
        cap (int): jet 阶数上限。

    Returns:
        HypoellipticityReport: 扫描结果。

    Raises:
        InputError: 参数不满足前置条件。
        DegenerateInputError: 符号在网格点上为零。
    """

    if not 0 <= B < R_out:
        raise InputError(f"扫描要求 0 ≤ B < R_out，收到 B={B}, R_out={R_out}")
    if grid_n < 8:
        raise InputError(f"grid_n 至少为 8，收到 {grid_n}")
    if not 0 < rho <= 1:
        raise InputError(f"rho 必须在 (0, 1] 内，收到 {rho}")

    radii = np.linspace(B, R_out, grid_n)
    directions = _scan_directions(sym.d, grid_n)
    points = (radii[:, None, None] * directions[None, :, :]).reshape(-1, 2 * sym.d)
    logging.info(f"亚椭圆性扫描：{len(radii)} 层 × {len(directions)} 个方向，D={D}，ρ={rho}")

    log_a = np.empty(points.shape[0])
    log_A = log_weight_values(A, D)
    ratios = np.zeros((points.shape[0], D + 1))
    for idx, point in enumerate(points):
        local = sym.jet(point, D, cap=cap)
        magnitude = abs(local.value)
        if not magnitude > 0 or not math.isfinite(magnitude):
            raise DegenerateInputError(f"符号在点 {point.tolist()} 处为零或不可表示，无法扫描")
        log_a[idx] = math.log(magnitude)
        bracket = math.sqrt(1.0 + float(np.dot(point, point)))
        partial_moduli = np.abs(local.coeffs) * local.space.factorials
        for k in range(D + 1):
            top = np.max(partial_moduli[local.space.degrees == k])
            ratios[idx, k] = top * bracket ** (rho * k) / magnitude / math.exp(log_A[k])

    constants = tuple(float(c) for c in np.max(ratios, axis=0))
    ring_sup = np.max(ratios.reshape(len(radii), len(directions), D + 1), axis=1)
    outer = slice(len(radii) // 2, None)
    log_bracket = 0.5 * np.log1p(radii[outer] ** 2)
    exponents, bounded = [], []
    for k in range(D + 1):
        if k == 0:
            exponents.append(0.0)
            bounded.append(True)
            continue
        slope = float(np.polyfit(log_bracket, np.log(np.maximum(ring_sup[outer, k], 1e-300)), 1)[0])
        exponents.append(slope)
        bounded.append(slope <= GROWTH_TOLERANCE)
    geometric = max((constants[k] ** (1.0 / k) for k in range(1, D + 1)), default=0.0)

    report = HypoellipticityReport(
        B=float(B), R_out=float(R_out), D=int(D), rho=float(rho),
        per_order_constants=constants, growth_exponents=tuple(exponents),
        bounded=tuple(bounded), geometric_ratio=float(geometric), grid_points=points.shape[0])

    x_norm, xi_norm = _block_norms(points, sym.d)
    outer_ring = np.arange(points.shape[0]) // len(directions) == len(radii) - 1
    for m in LOWER_BOUND_M_GRID:
        lifted = log_a + associated_function_values(A, m * x_norm) \
            + associated_function_values(A, m * xi_norm)
        worst = int(np.argmin(lifted))
        if not outer_ring[worst]:
            report.lower_bound_m = m
            report.lower_bound_c = float(math.exp(lifted[worst]))
            break
    else:
        report.notes.append("下界条件在 m 网格上均未满足，最差点落在最外层")
        logging.warning("亚椭圆性扫描：未找到满足下界条件的 m")

    for k in range(1, D + 1):
        if not bounded[k]:
            report.notes.append(f"{k} 阶常数随 ⟨w⟩ 以指数 {exponents[k]:.3g} 增长")
    logging.info(f"亚椭圆性扫描完成，各阶常数 {[f'{c:.4g}' for c in constants]}")
    return report
