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

"""多元截断 Taylor 级数（jet）的前向算术。

Jet 存储 Taylor 系数 t_α = ∂^α f(w) / α!，总阶 |α| 不超过 order。
两个 jet 运算时结果的阶取两者中较小者，高阶系数视为未知而不是零。
"""

import itertools
import math
from functools import lru_cache
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

Number = Union[int, float, complex]


def _exponents_of_degree(degree: int, n: int):
    """按字典序生成总次数为 degree 的 n 元指数。"""

    if n == 1:
        yield (degree,)
        return
    for bars in itertools.combinations(range(degree + n - 1), n - 1):
        previous = -1
        exponent = []
        for bar in bars:
            exponent.append(bar - previous - 1)
            previous = bar
        exponent.append(degree + n - 1 - previous - 1)
        yield tuple(exponent)


class JetSpace:
    """n 元、总阶不超过 order 的单项式索引与乘法表。"""

    def __init__(self, n: int, order: int):
        self.n = n
        self.order = order
        exponents = [e for degree in range(order + 1)
                     for e in _exponents_of_degree(degree, n)]
        self.exponents = np.array(exponents, dtype=int).reshape(-1, n)
        self.size = len(exponents)
        self.index: Dict[Tuple[int, ...], int] = {
            e: i for i, e in enumerate(exponents)}
        self.degrees = self.exponents.sum(axis=1)
        self.factorials = np.array(
            [math.prod(math.factorial(k) for k in e) for e in exponents], dtype=float)
        self._radix = (order + 1) ** np.arange(n)
        lookup = np.full((order + 1) ** n, -1, dtype=int)
        lookup[self.exponents @ self._radix] = np.arange(self.size)

        left, right, target = [], [], []
        for i in range(self.size):
            partners = np.nonzero(self.degrees <= order - self.degrees[i])[0]
            codes = (self.exponents[i] + self.exponents[partners]) @ self._radix
            left.append(np.full(len(partners), i))
            right.append(partners)
            target.append(lookup[codes])
        self._left = np.concatenate(left)
        self._right = np.concatenate(right)
        self._target = np.concatenate(target)
        self._shifts: Dict[Tuple[int, ...], Tuple["JetSpace", NDArray, NDArray]] = {}

    def multiply(self, a: NDArray, b: NDArray) -> NDArray:
        """截断乘积的系数。"""

        weights = a[self._left] * b[self._right]
        if np.iscomplexobj(weights):
            real = np.bincount(self._target, weights=weights.real, minlength=self.size)
            imag = np.bincount(self._target, weights=weights.imag, minlength=self.size)
            return real + 1j * imag
        return np.bincount(self._target, weights=weights, minlength=self.size)

    def shift(self, gamma: Tuple[int, ...]) -> Tuple["JetSpace", NDArray, NDArray]:
        """求 ∂^γ 后的目标空间、源下标与阶乘因子。"""

        cached = self._shifts.get(gamma)
        if cached is not None:
            return cached
        target = jet_space(self.n, self.order - sum(gamma))
        shifted = target.exponents + np.asarray(gamma, dtype=int)
        source = np.array([self.index[tuple(e)] for e in shifted], dtype=int)
        factors = np.array([
            math.prod(math.factorial(int(m + g)) // math.factorial(int(m))
                      for m, g in zip(mu, gamma))
            for mu in target.exponents], dtype=float)
        self._shifts[gamma] = (target, source, factors)
        return target, source, factors


@lru_cache(maxsize=None)
def jet_space(n: int, order: int) -> JetSpace:
    return JetSpace(n, order)


class Jet:
    """多元截断 Taylor 级数。

    Attributes:
        space (JetSpace): 单项式空间。
        coeffs (numpy.ndarray): Taylor 系数，顺序与 ``space.exponents`` 一致。
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: NDArray):
        self.space = space
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value: Number, n: int, order: int) -> "Jet":
        space = jet_space(n, order)
        coeffs = np.zeros(space.size, dtype=np.result_type(value, float))
        coeffs[0] = value
        return cls(space, coeffs)

    @classmethod
    def variable(cls, i: int, value: Number, n: int, order: int) -> "Jet":
        """第 i 个坐标在基点 value 处的 jet。"""

        jet = cls.constant(value, n, order)
        if order >= 1:
            unit = [0] * n
            unit[i] = 1
            jet.coeffs[jet.space.index[tuple(unit)]] = 1.0
        return jet

    @classmethod
    def from_partials(cls, partials: Dict[Tuple[int, ...], Number], n: int, order: int) -> "Jet":
        """由偏导数表 {α: ∂^α f} 构造。"""

        space = jet_space(n, order)
        dtype = np.result_type(*partials.values(), float) if partials else float
        coeffs = np.zeros(space.size, dtype=dtype)
        for alpha, value in partials.items():
            i = space.index.get(tuple(alpha))
            if i is not None:
                coeffs[i] = value / space.factorials[i]
        return cls(space, coeffs)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> Number:
        return self.coeffs[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs) or bool(np.all(self.coeffs.imag == 0))

    def coefficient(self, alpha: Sequence[int]) -> Number:
        """Taylor 系数 t_α；超出阶数时返回 0。"""

        i = self.space.index.get(tuple(alpha))
        return 0.0 if i is None else self.coeffs[i]

    def partial(self, alpha: Sequence[int]) -> Number:
        """偏导数 ∂^α f(w) = α! t_α。"""

        i = self.space.index.get(tuple(alpha))
        if i is None:
            raise IndexError(f"多重指标 {tuple(alpha)} 超出 jet 阶数 {self.order}")
        return self.coeffs[i] * self.space.factorials[i]

    def partials(self) -> Dict[Tuple[int, ...], Number]:
        values = self.coeffs * self.space.factorials
        return {tuple(int(k) for k in e): values[i]
                for i, e in enumerate(self.space.exponents)}

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError(f"无法把 {self.order} 阶 jet 提升到 {order} 阶")
        space = jet_space(self.n, order)
        return Jet(space, self.coeffs[:space.size].copy())

    def derivative(self, gamma: Sequence[int]) -> "Jet":
        """∂^γ f 的 jet，阶数降低 |γ|。"""

        target, source, factors = self.space.shift(tuple(int(g) for g in gamma))
        return Jet(target, self.coeffs[source] * factors)

    def embed(self, n_total: int, var_map: Sequence[int]) -> "Jet":
        """把 jet 嵌入更多变量的空间，第 i 个变量映射为 var_map[i]。"""

        space = jet_space(n_total, self.order)
        coeffs = np.zeros(space.size, dtype=self.coeffs.dtype)
        for i, e in enumerate(self.space.exponents):
            full = [0] * n_total
            for k, power in zip(var_map, e):
                full[k] = int(power)
            coeffs[space.index[tuple(full)]] = self.coeffs[i]
        return Jet(space, coeffs)

    def real(self) -> "Jet":
        return Jet(self.space, np.real(self.coeffs).copy())

    def conjugate(self) -> "Jet":
        return Jet(self.space, np.conj(self.coeffs))

    def _align(self, other: "Jet") -> Tuple["Jet", "Jet"]:
        if self.n != other.n:
            raise ValueError(f"jet 变量数不一致: {self.n} 与 {other.n}")
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.space, a.coeffs + b.coeffs)
        coeffs = self.coeffs.astype(np.result_type(self.coeffs, other), copy=True)
        coeffs[0] += other
        return Jet(self.space, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.space, a.space.multiply(a.coeffs, b.coeffs))
        return Jet(self.space, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.space, self.coeffs / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)) and exponent >= 0:
            result = Jet.constant(1.0, self.n, self.order)
            base = self
            k = int(exponent)
            while k:
                if k & 1:
                    result = result * base
                base = base * base
                k >>= 1
            return result
        return self.power(exponent)

    def compose(self, taylor: Sequence[Number]) -> "Jet":
        """
        复合 g(f)，taylor 为 g 在 f(w) 处的一元 Taylor 系数 g^{(k)}(f(w))/k!。

        Args:
            taylor (Sequence): 至少 order+1 个系数。

        Returns:
            Jet: g∘f 的 jet。
        """

        delta = Jet(self.space, self.coeffs.copy())
        delta.coeffs[0] = 0.0
        taylor = list(taylor)[:self.order + 1]
        dtype = np.result_type(self.coeffs, *taylor)
        result = Jet(self.space, np.zeros(self.space.size, dtype=dtype))
        result.coeffs[0] = taylor[-1]
        for c in reversed(taylor[:-1]):
            result = result * delta
            result.coeffs = result.coeffs.astype(dtype, copy=False)
            result.coeffs[0] += c
        return result

    def exp(self) -> "Jet":
        a0 = np.exp(self.value)
        return self.compose([a0 / math.factorial(k) for k in range(self.order + 1)])

    def log(self) -> "Jet":
        a0 = self.value
        taylor = [np.log(a0)] + [(-1) ** (k + 1) / (k * a0 ** k)
                                 for k in range(1, self.order + 1)]
        return self.compose(taylor)

    def power(self, exponent: float) -> "Jet":
        """f^p，要求 f(w) ≠ 0（非整数 p 时要求 f(w) > 0 或为复数）。"""

        a0 = self.value
        taylor = []
        binom = 1.0
        for k in range(self.order + 1):
            taylor.append(binom * a0 ** (exponent - k))
            binom *= (exponent - k) / (k + 1)
        return self.compose(taylor)

    def reciprocal(self) -> "Jet":
        return self.power(-1)

    def sqrt(self) -> "Jet":
        return self.power(0.5)


def univariate_taylor(jet: Jet) -> NDArray:
    """一元 jet 的 Taylor 系数数组。"""

    if jet.n != 1:
        raise ValueError("只有一元 jet 才能导出一元 Taylor 系数")
    return jet.coeffs.copy()
