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

"""形式级数演算：sharp 乘积分层、参数矩阵递推、热核项、反 Wick 展开与切除求和。

所有导数都以 jet 形式前向传播，D_j = i^{-1}∂_j 的因子只在 sharp 分层中出现。
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from weyllab.errors import CapabilityError, InputError, PreconditionError, RangeError, SingularityError
from weyllab.spectral.jet_helper import Jet, _exponents_of_degree
from weyllab.spectral.symbols_helper import (JET_ORDER_CAP, Symbol, as_coordinates,
                                             smooth_step)
from weyllab.spectral.weights_helper import WeightSequence, weight_quotients

Number = Union[int, float, complex]
TPoly = List[Jet]

HEAT_TERM_CAP = 6
ANTI_WICK_CAP = 6
DEFAULT_SERIES_LENGTH = 64


# ---------------------------------------------------------------------------
# sharp 乘积
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _sharp_layer_plan(l: int, d: int) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...], complex], ...]:
    """第 l 层的 (f 的求导指标, g 的求导指标, 系数) 列表。"""

    plan = []
    for gamma in _exponents_of_degree(l, 2 * d):
        alpha, beta = gamma[:d], gamma[d:]
        coefficient = ((-1j) ** l * (-1) ** sum(beta)
                       / (math.prod(math.factorial(a) for a in alpha)
                          * math.prod(math.factorial(b) for b in beta) * 2 ** l))
        plan.append((tuple(beta) + tuple(alpha), tuple(alpha) + tuple(beta), coefficient))
    return tuple(plan)


def sharp_layer(f: Jet, g: Jet, l: int) -> Jet:
    """
    sharp 乘积的第 l 层 T_l(f, g) = Σ_{|α+β|=l} (−1)^{|β|}/(α!β!2^l) ∂^α_ξ D^β_x f · ∂^β_ξ D^α_x g。

    Args:
        f (Jet): 左因子的 jet。
        g (Jet): 右因子的 jet。
        l (int): 层数。

    Returns:
        Jet: 阶数为 min(f.order, g.order) − l 的 jet。

    Raises:
        CapabilityError: jet 阶数不足 l。
    """

    if f.n != g.n or f.n % 2:
        raise InputError(f"sharp 乘积要求两个 2d 元 jet，收到 {f.n} 与 {g.n} 元")
    order = min(f.order, g.order)
    if order < l:
        raise CapabilityError(f"sharp 乘积第 {l} 层需要至少 {l} 阶 jet，当前只有 {order} 阶")
    f, g = f.truncate(order), g.truncate(order)
    total = None
    for f_gamma, g_gamma, coefficient in _sharp_layer_plan(l, f.n // 2):
        term = f.derivative(f_gamma) * g.derivative(g_gamma) * coefficient
        total = term if total is None else total + term
    return total


def _as_terms(terms) -> List[Jet]:
    return [terms] if isinstance(terms, Jet) else list(terms)


def sharp_term(a_terms, b_terms, j: int, w=None) -> complex:
    """
    (Σ a_s) # (Σ b_k) 的第 j 项 c_j(w) = Σ_{s+k+l=j} T_l(a_s, b_k)(w)。

    a_terms 与 b_terms 可以是单个 jet、jet 列表，或与 w 一起给出的符号。
    """

    if isinstance(a_terms, Symbol) or isinstance(b_terms, Symbol):
        if w is None:
            raise InputError("以符号形式给出因子时必须提供相空间点 w")
        if isinstance(a_terms, Symbol):
            a_terms = a_terms.jet(w, j)
        if isinstance(b_terms, Symbol):
            b_terms = b_terms.jet(w, j)
    a_terms, b_terms = _as_terms(a_terms), _as_terms(b_terms)
    total = 0.0 + 0.0j
    for s, a in enumerate(a_terms[:j + 1]):
        for k, b in enumerate(b_terms[:j + 1 - s]):
            total += complex(sharp_layer(a, b, j - s - k).value)
    return total


def layered_sharp_values(f_terms, g_terms, L: int) -> List[complex]:
    """(Σ f_j) # (Σ g_k) 在基点处第 0..L 层的值。"""

    return [sharp_term(f_terms, g_terms, n) for n in range(L + 1)]


# ---------------------------------------------------------------------------
# 参数矩阵
# ---------------------------------------------------------------------------

def parametrix_jets(a: Symbol, J: int, w, z: Number = 0.0, extra_order: int = 0,
                    cap: int = JET_ORDER_CAP) -> List[Jet]:
    """
    q_0 = 1/(a+z)，q_j = −q_0 Σ_{s=1}^{j} T_s(q_{j−s}, a) 的 jet，q_j 的阶数为 J − 1 + extra_order − j。

    Raises:
        SingularityError: a(w) + z = 0。
    """

    if J < 1:
        raise InputError(f"参数矩阵项数 J 必须 ≥ 1，收到 {J}")
    point = as_coordinates(w, a.d)
    D = J - 1 + extra_order
    a_jet = a.jet(point, D, cap=cap)
    shifted = a_jet + z if z != 0 else a_jet
    if shifted.value == 0:
        raise SingularityError(f"a(w) + z 在点 {point.tolist()} 处为零（z={z}）")
    q0 = shifted.reciprocal()
    terms = [q0]
    for j in range(1, J):
        layer = sharp_layer(terms[j - 1], a_jet, 1)
        for s in range(2, j + 1):
            layer = layer + sharp_layer(terms[j - s], a_jet, s)
        terms.append(-(q0 * layer))
    return terms


def parametrix_terms(a: Symbol, J: int, w, z: Number = 0.0) -> List[complex]:
    """参数矩阵前 J 项 q_0..q_{J−1} 在 w 处的值。"""

    return [complex(q.value) for q in parametrix_jets(a, J, w, z)]


# ---------------------------------------------------------------------------
# 热核项
# ---------------------------------------------------------------------------

def _zero_like(jet: Jet) -> Jet:
    return Jet.constant(0.0, jet.n, jet.order)


def _tpoly_mul(p: TPoly, q: TPoly) -> TPoly:
    result: List[Optional[Jet]] = [None] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for k, b in enumerate(q):
            product = a * b
            result[i + k] = product if result[i + k] is None else result[i + k] + product
    return result


def _tpoly_add(p: TPoly, q: TPoly) -> TPoly:
    if len(p) < len(q):
        p, q = q, p
    return [a + q[n] if n < len(q) else a for n, a in enumerate(p)]


def _tpoly_layer(b: Jet, p: TPoly, l: int) -> TPoly:
    return [sharp_layer(b, c, l) for c in p]


def heat_polynomials(b_jet: Jet, J: int) -> List[TPoly]:
    """
    u_j = e^{−tb} P_j(t) 中 P_0..P_{J−1} 的 t 多项式，系数为 jet。

    由 ∂_t u_j + Σ_{l=0}^{j} T_l(b, u_{j−l}) = 0、u_j(0) = δ_{j0} 逐阶积分得到：
    P_j = −∫_0^t e^{tδ} Σ_{l≥1} T_l(b, e^{−tδ} P_{j−l})，δ = b − b(w)。
    """

    D = b_jet.order
    delta = b_jet - b_jet.value
    minus, plus = [Jet.constant(1.0, b_jet.n, D)], [Jet.constant(1.0, b_jet.n, D)]
    power = minus[0]
    for n in range(1, D + 1):
        power = power * delta
        minus.append(power * ((-1.0) ** n / math.factorial(n)))
        plus.append(power * (1.0 / math.factorial(n)))

    polys: List[TPoly] = [[Jet.constant(1.0, b_jet.n, D)]]
    for j in range(1, J):
        source: Optional[TPoly] = None
        for l in range(1, j + 1):
            layer = _tpoly_layer(b_jet, _tpoly_mul(minus, polys[j - l]), l)
            source = layer if source is None else _tpoly_add(source, layer)
        integrand = _tpoly_mul(plus, source)
        polys.append([_zero_like(integrand[0])] + [-(c / (n + 1)) for n, c in enumerate(integrand)])
    return polys


class HeatTermPolynomial:
    """
    热核参数矩阵第 j 项 u_j(t, w) = e^{−t b(w)} Σ_l t^l u_{l,j}(w)。

    Attributes:
        j (int): 项序号。
        symbol (Symbol): 生成元 b。
    """

    def __init__(self, j: int, symbol: Symbol, cap: int = JET_ORDER_CAP):
        self.j = j
        self.symbol = symbol
        self.cap = cap

    def coefficients(self, w) -> NDArray:
        """u_{l,j}(w)，l = 0, 1, ...（j=0 时为 [1]）。"""

        if self.j == 0:
            return np.ones(1)
        point = as_coordinates(w, self.symbol.d)
        b_jet = self.symbol.jet(point, self.j, cap=self.cap)
        poly = heat_polynomials(b_jet, self.j + 1)[self.j]
        values = np.array([np.real(c.value) for c in poly])
        nonzero = np.nonzero(values)[0]
        return values[:nonzero[-1] + 1] if nonzero.size else np.zeros(1)

    def evaluate(self, t: float, w) -> float:
        b_value = self.symbol.value(w)
        coefficients = self.coefficients(w)
        return float(math.exp(-t * b_value) * np.polynomial.polynomial.polyval(t, coefficients))


def heat_terms(b: Symbol, J: int, cap: int = JET_ORDER_CAP) -> List[HeatTermPolynomial]:
    """
    热核参数矩阵的前 J 项。

    Raises:
        InputError: b 非实或 J < 1。
        CapabilityError: J 超过 HEAT_TERM_CAP。
    """

    if J < 1:
        raise InputError(f"热核项数 J 必须 ≥ 1，收到 {J}")
    if J > HEAT_TERM_CAP:
        raise CapabilityError(f"热核项数最多 {HEAT_TERM_CAP}，请求 {J}")
    if not b.is_real:
        raise InputError("热核递推要求实值符号 b")
    return [HeatTermPolynomial(j, b, cap) for j in range(J)]


# ---------------------------------------------------------------------------
# 反 Wick 展开
# ---------------------------------------------------------------------------

def _gaussian_moment(k: int) -> float:
    if k % 2:
        return 0.0
    return math.exp(gammaln((k + 1) / 2.0) - gammaln(0.5))


def anti_wick_coeff(alpha: Sequence[int], beta: Sequence[int], d: int) -> float:
    """c_{α,β} = π^{−d}∫ η^α y^β e^{−|y|²−|η|²} dy dη，一维 Gauss 矩之积。"""

    if len(alpha) != d or len(beta) != d:
        raise InputError(f"多重指标长度必须为 d={d}")
    return math.prod(_gaussian_moment(int(k)) for k in tuple(alpha) + tuple(beta))


@lru_cache(maxsize=None)
def _anti_wick_level(l: int, d: int) -> Dict[Tuple[int, ...], float]:
    """|α+β| = 2l 的所有 (α, β) 按 (β, α) 归并后的 c_{α,β}/(α!β!) 之和。"""

    level: Dict[Tuple[int, ...], float] = {}
    for gamma in _exponents_of_degree(2 * l, 2 * d):
        alpha, beta = gamma[:d], gamma[d:]
        weight = anti_wick_coeff(alpha, beta, d)
        if weight == 0.0:
            continue
        weight /= math.prod(math.factorial(k) for k in gamma)
        key = tuple(beta) + tuple(alpha)
        level[key] = level.get(key, 0.0) + weight
    return level


def _compositions(k: int, j: int):
    if j == 1:
        yield (k,)
        return
    for first in range(1, k - j + 2):
        for rest in _compositions(k - first, j - 1):
            yield (first,) + rest


def _convolve_levels(left: Dict[Tuple[int, ...], float], right: Dict[Tuple[int, ...], float]):
    result: Dict[Tuple[int, ...], float] = {}
    for a, wa in left.items():
        for b, wb in right.items():
            key = tuple(x + y for x, y in zip(a, b))
            result[key] = result.get(key, 0.0) + wa * wb
    return result


def anti_wick_term(b: Symbol, k: int, j: int, w) -> float:
    """
    反 Wick 原像展开项 p'_{k,j}(w)：
    Σ_{l_1+…+l_j=k} Σ_{|α^{(i)}+β^{(i)}|=2l_i} Π c_{α^{(i)},β^{(i)}}/(α^{(i)}!β^{(i)}!) ∂_ξ^{Σα}∂_x^{Σβ} b。

    Raises:
        CapabilityError: k 超过 ANTI_WICK_CAP。
    """

    if k < 0 or j < 0:
        raise InputError(f"反 Wick 项要求 k, j ≥ 0，收到 k={k}, j={j}")
    if k > ANTI_WICK_CAP:
        raise CapabilityError(f"反 Wick 项最多支持 k={ANTI_WICK_CAP}，请求 k={k}")
    if k == 0 and j == 0:
        return float(np.real(b.value(w)))
    if j == 0 or k < j:
        return 0.0
    point = as_coordinates(w, b.d)
    b_jet = b.jet(point, 2 * k)
    total = 0.0
    for composition in _compositions(k, j):
        combined = _anti_wick_level(composition[0], b.d)
        for l in composition[1:]:
            combined = _convolve_levels(combined, _anti_wick_level(l, b.d))
        for exponent, weight in combined.items():
            total += weight * float(np.real(b_jet.partial(exponent)))
    return total


def anti_wick_preimage(b: Symbol, K: int, w) -> float:
    """截断的反 Wick 原像 Σ_{j≤K} (−1)^j Σ_{k=j}^{K} p'_{k,j}(w)。"""

    return sum((-1) ** j * sum(anti_wick_term(b, k, j, w) for k in range(j, K + 1))
               for j in range(K + 1))


# ---------------------------------------------------------------------------
# 形式级数与切除
# ---------------------------------------------------------------------------

TermProvider = Callable[[int, NDArray, int], Jet]


@dataclass
class FormalSeries:
    """
    形式级数 Σ_j a_j，a_j 只在 Q^c_{B m_j} 上有定义。

    Attributes:
        provider (Callable): (j, w, D) -> a_j 在 w 处的 D 阶 jet。
        d (int): 维数。
        B (float): 排除参数。
        weights (WeightSequence): 给出 m_j 的权重序列。
        J_max (int): 可用项数。
    """

    provider: TermProvider
    d: int
    B: float
    weights: WeightSequence
    J_max: int = DEFAULT_SERIES_LENGTH

    def __post_init__(self):
        if self.B < 0:
            raise InputError(f"排除参数 B 必须 ≥ 0，收到 {self.B}")
        self._quotients = weight_quotients(self.weights, self.J_max)

    def quotient(self, j: int) -> float:
        return float(self._quotients[j])

    def exclusion_radius(self, j: int) -> float:
        return self.B * self.quotient(j)

    def term(self, j: int, w, D: int = 0) -> Jet:
        if not 0 <= j < self.J_max:
            raise RangeError(f"形式级数只提供 {self.J_max} 项，请求第 {j} 项")
        point = as_coordinates(w, self.d)
        radius = self.exclusion_radius(j)
        if radius > 0:
            x_bracket = math.sqrt(1.0 + float(np.dot(point[:self.d], point[:self.d])))
            xi_bracket = math.sqrt(1.0 + float(np.dot(point[self.d:], point[self.d:])))
            if x_bracket < radius and xi_bracket < radius:
                raise PreconditionError(
                    f"第 {j} 项在点 {point.tolist()} 处无定义（位于排除区 Q_{radius:g} 内）")
        return self.provider(j, point, D)

    def term_value(self, j: int, w) -> complex:
        return complex(self.term(j, w).value)


def parametrix_series(a: Symbol, weights: WeightSequence, B: float = 0.0, z: Number = 0.0,
                      J_max: int = 8) -> FormalSeries:
    """以参数矩阵 Σ q_j 为项的形式级数。"""

    def provider(j, w, D):
        return parametrix_jets(a, j + 1, w, z, extra_order=D)[j]

    return FormalSeries(provider, a.d, B, weights, J_max)


def single_term_series(a: Symbol, weights: WeightSequence, B: float = 0.0,
                       J_max: int = DEFAULT_SERIES_LENGTH) -> FormalSeries:
    """典范嵌入：a_0 = a，其余项恒为零。"""

    def provider(j, w, D):
        if j == 0:
            return a.jet(w, D)
        return Jet.constant(0.0, 2 * a.d, D)

    return FormalSeries(provider, a.d, B, weights, J_max)


def _plateau(v: NDArray) -> float:
    bracket = math.sqrt(1.0 + float(np.dot(v, v)))
    return float(1.0 - smooth_step(bracket - 2.0))


def excision_cutoff(series: FormalSeries, j: int, R: float, w: NDArray) -> float:
    """χ_{j,R}(w) = ψ(x/(R m_j)) ψ(ξ/(R m_j))，χ_{0,R} = 0。"""

    if j == 0:
        return 0.0
    scale = R * series.quotient(j)
    return _plateau(w[:series.d] / scale) * _plateau(w[series.d:] / scale)


def excision(series: FormalSeries, R: float, w) -> complex:
    """
    局部有限和 R(Σ a_j)(w) = Σ_j (1 − χ_{j,R}(w)) a_j(w)，在第一个 χ_{j,R}(w) = 1 处截止。

    Raises:
        PreconditionError: R ≤ B。
        RangeError: 可用项耗尽前 χ 仍未达到 1。
    """

    if R <= series.B:
        raise PreconditionError(f"切除要求 R > B，收到 R={R}, B={series.B}")
    point = as_coordinates(w, series.d)
    total = 0.0 + 0.0j
    for j in range(series.J_max):
        chi = excision_cutoff(series, j, R, point)
        if chi == 1.0:
            logging.debug(f"切除求和在第 {j} 项截止")
            return total
        total += (1.0 - chi) * series.term_value(j, point)
    raise RangeError(f"点 {point.tolist()} 处切除求和需要超过 {series.J_max} 项")
