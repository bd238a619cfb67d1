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

"""Hermite 基上的 Weyl 与反 Wick 量子化（d=1），径向符号的 Laguerre 变换快速路径，
Hermite 特征值求解与可分离直和。

基的约定：r² = x² + ξ² 量子化为特征值 2n+1，符号 1 量子化为恒等。
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy.special import gammaln
from tqdm import tqdm

from weyllab.data_helper import read_rows_from_csv, save_rows_to_csv
from weyllab.errors import AccuracyError, InputError, RangeError
from weyllab.spectral.quadrature_helper import QuadratureSpec, integrate_panels, panel_nodes
from weyllab.spectral.symbols_helper import RadialProfile, RadialSymbol, Symbol

RESCALE_LIMIT = 1e150
HERMITIAN_TOLERANCE = 1e-10
GROWTH_SAMPLE_ANGLES = 32
MAX_TRUNCATION_STEPS = 200


@dataclass
class OperatorMatrix:
    """Weyl 量子化在 h_0..h_{N−1} 上的有限截断。"""

    entries: NDArray
    source: str = ""

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def save(self, csv_file_path: str) -> None:
        rows = ((m, n, self.entries[m, n].real, self.entries[m, n].imag)
                for m in range(self.N) for n in range(self.N))
        save_rows_to_csv(("m", "n", "re", "im"), rows, csv_file_path)


@dataclass
class SpectralData:
    """
    升序特征值序列。

    Attributes:
        eigenvalues (numpy.ndarray): 升序实特征值。
        trusted_count (int): 在基扩大下稳定的前缀长度。
        source (str): 数据来源描述。
        ceiling (float): 计数函数可信的最大 λ；显式完整序列为 inf。
    """

    eigenvalues: NDArray
    trusted_count: int
    source: str = ""
    ceiling: float = -math.inf

    def __post_init__(self):
        self.eigenvalues = np.sort(np.asarray(self.eigenvalues, dtype=float))
        if not 0 <= self.trusted_count <= self.eigenvalues.size:
            raise InputError(f"可信前缀 {self.trusted_count} 超出特征值个数 {self.eigenvalues.size}")

    @classmethod
    def from_values(cls, values: Sequence[float], source: str = "explicit",
                    ceiling: Optional[float] = None) -> "SpectralData":
        """完全可信的显式序列；未给出 ceiling 时取最大值。"""

        values = np.asarray(values, dtype=float)
        if ceiling is None:
            ceiling = float(np.max(values)) if values.size else -math.inf
        return cls(values, values.size, source, ceiling)

    @property
    def trusted(self) -> NDArray:
        return self.eigenvalues[:self.trusted_count]

    def with_trust(self, trusted_count: int) -> "SpectralData":
        ceiling = float(self.eigenvalues[trusted_count - 1]) if trusted_count else -math.inf
        return SpectralData(self.eigenvalues, trusted_count, self.source, ceiling)

    def counting(self, lam: float) -> int:
        """N(λ) = #{j : λ_j ≤ λ}。

        Raises:
            RangeError: λ 超过可信上界。
        """

        if lam > self.ceiling:
            raise RangeError(f"λ={lam:.6g} 超过可信谱上界 {self.ceiling:.6g}")
        return int(np.searchsorted(self.trusted, lam, side="right"))

    def save_csv(self, csv_file_path: str) -> None:
        rows = ((j, value, int(j < self.trusted_count)) for j, value in enumerate(self.eigenvalues))
        save_rows_to_csv(("j", "lambda", "trusted"), rows, csv_file_path)

    @classmethod
    def load_csv(cls, csv_file_path: str, source: str = "") -> "SpectralData":
        rows = read_rows_from_csv(csv_file_path)
        values = [float(row["lambda"]) for row in rows]
        trusted = sum(int(row["trusted"]) for row in rows)
        data = cls(values, trusted, source or csv_file_path)
        return data.with_trust(trusted)


# ---------------------------------------------------------------------------
# Hermite 函数
# ---------------------------------------------------------------------------

def hermite_functions(N: int, x) -> NDArray:
    """h_0..h_{N−1} 在 x 处的值，形状 (N, len(x))。"""

    x = np.atleast_1d(np.asarray(x, dtype=float))
    values = np.zeros((max(N, 1), x.size))
    values[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if N > 1:
        values[1] = math.sqrt(2.0) * x * values[0]
    for k in range(1, N - 1):
        values[k + 1] = (math.sqrt(2.0 / (k + 1)) * x * values[k]
                         - math.sqrt(k / (k + 1)) * values[k - 1])
    return values[:N]


def hermite_function(n: int, x):
    """归一化 Hermite 函数 h_n(x)。"""

    if n < 0:
        raise InputError(f"Hermite 函数序号必须 ≥ 0，收到 {n}")
    values = hermite_functions(n + 1, x)[n]
    return float(values[0]) if np.ndim(x) == 0 else values


# ---------------------------------------------------------------------------
# Laguerre 函数递推
# ---------------------------------------------------------------------------

def _profile_of(g: Union[RadialProfile, RadialSymbol]) -> RadialProfile:
    if isinstance(g, RadialSymbol):
        if g.d != 1:
            raise InputError(f"径向快速路径只支持 d=1，收到 d={g.d}")
        return g.profile
    if isinstance(g, RadialProfile):
        return g
    raise InputError(f"需要径向剖面或径向符号，收到 {type(g).__name__}")


def _truncation_point(log_growth: Callable[[NDArray], NDArray], n: int, threshold: float) -> float:
    """使 n ln v − v/2 − lnΓ(n+1) + log_growth(v/2) 在 v 之后低于阈值的截断点。"""

    baseline = max(0.0, float(np.max(log_growth(np.array([0.0, 1.0])))))
    v = max(20.0, 4.0 * n + 20.0)
    scales = np.array([1.0, 1.25, 1.5, 2.0])
    for _ in range(MAX_TRUNCATION_STEPS):
        points = v * scales
        envelope = n * np.log(points) - 0.5 * points - gammaln(n + 1) + log_growth(0.5 * points)
        if np.all(envelope < threshold + baseline):
            return float(v)
        v *= 1.25
    raise AccuracyError(f"符号增长过快，第 {n} 个 Laguerre 函数的尾项无法截断")


def _initial_panels(v_max: float, N: int) -> int:
    """s = √u 变量下每个面板约一个波长。"""

    return max(4, math.ceil(math.sqrt(0.5 * v_max) * math.sqrt(8.0 * N + 4.0) / (2.0 * math.pi)))


def _laguerre_band(k: int, v: NDArray, weights: NDArray, log_amp: NDArray, lower: NDArray,
                   upper: Optional[NDArray], count: int) -> Tuple[NDArray, Optional[NDArray]]:
    """
    第 k 条对角带 (−1)^n/(2π) ∫ φ_n^{(k)}(2u) â(√u) du，n = 0..count−1。

    φ_n^{(k)} 为归一化广义 Laguerre 函数，按自身三项递推生成，并在每个节点上单独保存对数尺度。
    """

    shift = float(np.max(log_amp))
    log_scale = 0.5 * k * np.log(v) - 0.5 * v - 0.5 * gammaln(k + 1) + log_amp
    factor = weights * np.exp(log_scale - shift)
    previous = np.zeros_like(v)
    current = np.ones_like(v)
    lower_band = np.empty(count, dtype=complex)
    upper_band = np.empty(count, dtype=complex) if upper is not None else None
    amplitude = math.exp(shift) / (2.0 * math.pi)
    for n in range(count):
        contribution = factor * current
        sign = -amplitude if n % 2 else amplitude
        lower_band[n] = sign * (contribution @ lower)
        if upper is not None:
            upper_band[n] = sign * (contribution @ upper)
        following = (((2 * n + k + 1) - v) * current - math.sqrt(n * (n + k)) * previous) \
            / math.sqrt((n + 1) * (n + k + 1))
        previous, current = current, following
        big = np.abs(current) > RESCALE_LIMIT
        if np.any(big):
            scale = np.abs(current[big])
            current[big] /= scale
            previous[big] /= scale
            log_scale[big] += np.log(scale)
            factor[big] = weights[big] * np.exp(log_scale[big] - shift)
    return lower_band, upper_band


def _converged(previous: NDArray, current: NDArray, rtol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(current), initial=0.0)))
    return float(np.max(np.abs(current - previous), initial=0.0)) <= rtol * scale


# ---------------------------------------------------------------------------
# 径向 Weyl 特征值
# ---------------------------------------------------------------------------

def _polynomial_weyl_diagonal(coefficients: Sequence[float], N: int) -> NDArray:
    """u^k 的 Laguerre 矩 λ_n = k! Σ_i C(k,i) C(n−i+k, k)，按系数线性组合。"""

    diagonal = np.zeros(N)
    for k, c in enumerate(coefficients):
        if c == 0.0:
            continue
        for n in range(N):
            moment = sum(math.comb(k, i) * math.comb(n - i + k, k) for i in range(min(k, n) + 1))
            diagonal[n] += c * float(math.factorial(k) * moment)
    return diagonal


def radial_weyl_diagonal(g: Union[RadialProfile, RadialSymbol], N: int,
                         quad: QuadratureSpec = QuadratureSpec()) -> NDArray:
    """
    径向 Weyl 符号 G(u) 在 Hermite 基上的对角元 λ_n = (−1)^n ∫_0^∞ G(u) ℓ_n(2u) du，按 n 排列。

    Args:
        g: 径向剖面或 d=1 的径向符号。
        N (int): 基的维数。
        quad (QuadratureSpec): 求积参数。

    Returns:
        numpy.ndarray: N 个对角元。

    Raises:
        AccuracyError: 面板加密后仍未收敛或尾项无法截断。
    """

    if N < 1:
        raise InputError(f"基的维数 N 必须 ≥ 1，收到 {N}")
    profile = _profile_of(g)
    if profile.polynomial_coefficients is not None:
        logging.debug(f"多项式剖面走 Laguerre 矩闭式路径，N={N}")
        return _polynomial_weyl_diagonal(profile.polynomial_coefficients, N)

    v_max = _truncation_point(lambda u: profile.log_values(u)[1], N - 1, quad.tail_log_threshold)
    s_max = math.sqrt(0.5 * v_max)
    panels = _initial_panels(v_max, N)
    logging.info(f"径向 Laguerre 变换：N={N}，截断 u ≤ {0.5 * v_max:.4g}，初始面板 {panels}")

    def diagonal_with(panel_count):
        s, ws = panel_nodes(0.0, s_max, panel_count, quad.nodes_per_panel)
        u = s * s
        sign, log_g = profile.log_values(u)
        finite = np.isfinite(log_g)
        log_amp = np.where(finite, log_g, np.min(log_g[finite], initial=0.0) - 800.0)
        band, _ = _laguerre_band(0, 2.0 * u, ws * 2.0 * s, log_amp,
                                 2.0 * math.pi * np.where(finite, np.real(sign), 0.0), None, N)
        return band.real

    previous = diagonal_with(panels)
    for _ in range(quad.max_refinements):
        panels *= 2
        current = diagonal_with(panels)
        if _converged(previous, current, quad.rtol):
            return current
        previous = current
    raise AccuracyError(
        f"径向 Laguerre 变换在 {panels} 个面板后仍未收敛，"
        f"相邻估计差 {float(np.max(np.abs(current - previous))):.3e}")


def _with_lookahead(diagonal: NDArray, N: int, source: str) -> SpectralData:
    """
    由 2N 个对角元构造前 N 个特征值的谱数据。

    ceiling 严格小于预读块 diagonal[N:2N] 的最小值，且不超过前 N 个对角元的最大值；
    可信前缀只含不超过 ceiling 的特征值。下标 ≥ 2N 的对角元假定不低于预读块。
    """

    head, lookahead = diagonal[:N], diagonal[N:2 * N]
    ceiling = min(float(np.max(head)), float(np.nextafter(np.min(lookahead), -math.inf)))
    trusted_count = int(np.count_nonzero(head <= ceiling))
    if trusted_count < N:
        logging.warning(f"{source} 的对角元在下标 N 之后回落，仅 {trusted_count} 个特征值不超过可信上界 {ceiling:.6g}")
    return SpectralData(head, trusted_count, source, ceiling)


def radial_weyl_eigs(g: Union[RadialProfile, RadialSymbol], N: int,
                     quad: QuadratureSpec = QuadratureSpec()) -> SpectralData:
    """径向 Weyl 符号的前 N 个特征值；ceiling 由下标 N..2N−1 的预读对角元确定。"""

    if N < 1:
        raise InputError(f"基的维数 N 必须 ≥ 1，收到 {N}")
    diagonal = radial_weyl_diagonal(g, 2 * N, quad)
    return _with_lookahead(diagonal, N, f"radial_weyl(N={N})")


# ---------------------------------------------------------------------------
# 径向反 Wick 对角元
# ---------------------------------------------------------------------------

def _polynomial_antiwick_diagonal(coefficients: Sequence[float], N: int) -> NDArray:
    """u^k 的对角元 2^k (n+k)!/n!。"""

    n = np.arange(N, dtype=float)
    diagonal = np.zeros(N)
    for k, c in enumerate(coefficients):
        if c == 0.0:
            continue
        rising = np.ones(N)
        for i in range(1, k + 1):
            rising *= n + i
        diagonal += c * 2.0 ** k * rising
    return diagonal


def _antiwick_entry(profile: RadialProfile, n: int, quad: QuadratureSpec) -> float:
    def log_integrand(v):
        sign, log_g = profile.log_values(2.0 * v)
        return sign, n * np.log(v) - v - gammaln(n + 1) + log_g

    half = 12.0 * math.sqrt(n + 1.0) + 10.0
    lo, hi = max(0.0, n - half), n + half
    grid = np.linspace(max(lo, 1e-12), hi, 257)
    _, logs = log_integrand(grid)
    peak = float(np.max(logs))
    for _ in range(MAX_TRUNCATION_STEPS):
        _, tail = log_integrand(np.array([hi]))
        if tail[0] < peak - quad.radial_log_window:
            break
        hi *= 1.5
        grid = np.linspace(max(lo, 1e-12), hi, 257)
        peak = max(peak, float(np.max(log_integrand(grid)[1])))
    else:
        raise AccuracyError(f"反 Wick 对角元 n={n} 的被积函数无法截断")
    if lo > 0:
        while lo > 0 and log_integrand(np.array([lo]))[1][0] > peak - quad.radial_log_window:
            lo = max(0.0, lo - half)

    def integrand(v):
        sign, logs = log_integrand(v)
        return np.real(sign) * np.exp(logs - peak)

    value = integrate_panels(integrand, lo, hi, 8, quad, label=f"反 Wick 对角元 n={n}")
    return float(value) * math.exp(peak)


def radial_antiwick_eigs(g: Union[RadialProfile, RadialSymbol], N: int,
                         quad: QuadratureSpec = QuadratureSpec(),
                         disable_tqdm: bool = True) -> SpectralData:
    """
    径向符号反 Wick 量子化的对角元 ∫_0^∞ G(2v) v^n e^{−v}/n! dv，n < N，升序返回。

    多项式剖面使用闭式 2^k (n+k)!/n!，其余剖面在对数域的 Gauss–Legendre 窗口上积分。
    另算下标 N..2N−1 的预读对角元以确定 ceiling。
    """

    if N < 1:
        raise InputError(f"基的维数 N 必须 ≥ 1，收到 {N}")
    profile = _profile_of(g)
    if profile.polynomial_coefficients is not None:
        diagonal = _polynomial_antiwick_diagonal(profile.polynomial_coefficients, 2 * N)
    else:
        indices = range(2 * N)
        indices = tqdm(indices, desc="反 Wick 对角元", unit="项") if not disable_tqdm else indices
        diagonal = np.array([_antiwick_entry(profile, n, quad) for n in indices])
    return _with_lookahead(diagonal, N, f"radial_antiwick(N={N})")


# ---------------------------------------------------------------------------
# 一般符号的矩阵
# ---------------------------------------------------------------------------

def _angular_log_growth(sym: Symbol) -> Callable[[NDArray], NDArray]:
    angles = 2.0 * math.pi * np.arange(GROWTH_SAMPLE_ANGLES) / GROWTH_SAMPLE_ANGLES
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def log_growth(u):
        r = np.sqrt(np.asarray(u, dtype=float))
        points = (r[:, None, None] * directions[None, :, :]).reshape(-1, 2)
        _, logs = sym.log_values(points)
        return np.max(logs.reshape(r.size, -1), axis=1)

    return log_growth


def _assemble(sym: Symbol, N: int, s_max: float, panels: int, quad: QuadratureSpec,
              n_theta: int, disable_tqdm: bool, workers: Optional[int]) -> NDArray:
    s, ws = panel_nodes(0.0, s_max, panels, quad.nodes_per_panel)
    u = s * s
    angles = 2.0 * math.pi * np.arange(n_theta) / n_theta
    points = (s[:, None, None] * np.stack([np.cos(angles), np.sin(angles)], axis=1)[None]).reshape(-1, 2)
    sign, logs = sym.log_values(points)
    sign, logs = sign.reshape(s.size, n_theta), logs.reshape(s.size, n_theta)
    log_amp = np.max(logs, axis=1)
    log_amp = np.where(np.isfinite(log_amp), log_amp, 0.0)
    with np.errstate(invalid="ignore"):
        normalized = np.where(np.isfinite(logs), sign * np.exp(logs - log_amp[:, None]), 0.0)
    harmonics = 2.0 * math.pi * np.fft.ifft(normalized, axis=1)
    v = 2.0 * u
    weights = ws * 2.0 * s

    matrix = np.zeros((N, N), dtype=complex)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(
                _laguerre_band, k, v, weights, log_amp,
                np.ascontiguousarray(harmonics[:, k]),
                np.ascontiguousarray(harmonics[:, (-k) % n_theta]) if k else None,
                N - k
            ): k
            for k in range(N)
        }

        progress_iter = (
            tqdm(total=len(futures), desc="装配 Weyl 矩阵", unit="带") if not disable_tqdm else None
        )

        for future in as_completed(futures):
            k = futures[future]
            lower, upper = future.result()
            rows = np.arange(N - k)
            matrix[rows + k, rows] = lower
            if k:
                matrix[rows, rows + k] = upper
            if not disable_tqdm:
                progress_iter.update(1)

        if not disable_tqdm:
            progress_iter.close()
    return matrix


def build_matrix(sym: Symbol, N: int, quad: QuadratureSpec = QuadratureSpec(),
                 disable_tqdm: bool = True, workers: Optional[int] = None) -> OperatorMatrix:
    """
    d=1 符号的 Weyl 量子化矩阵 A_{mn} = ⟨a^w h_n, h_m⟩。

    对角带 A_{n+k,n} = ((−1)^n/2π) ∫ φ_n^{(k)}(2u) â_k(√u) du，其中 â_k(r) = ∫ a(r,θ) e^{ikθ} dθ
    由角向 FFT 给出；上三角使用 â_{−k}。

    Args:
        sym (Symbol): d=1 符号。
        N (int): 基的维数。
        quad (QuadratureSpec): 求积参数。
        disable_tqdm (bool): 是否关闭进度条。
        workers (int, optional): 线程数。

    Returns:
        OperatorMatrix: N×N 矩阵。

    Raises:
        InputError: d ≠ 1 或 N < 1。
        AccuracyError: 面板加密后仍未收敛。
    """

    if sym.d != 1:
        raise InputError(f"矩阵量子化只支持 d=1，收到 d={sym.d}")
    if N < 1:
        raise InputError(f"基的维数 N 必须 ≥ 1，收到 {N}")
    if workers is None:
        logging.info("使用默认的线程数装配矩阵")
    else:
        logging.info(f"使用 {workers} 个线程装配矩阵")

    n_theta = max(16, quad.angular_oversampling * 2 * N)
    v_max = _truncation_point(_angular_log_growth(sym), N - 1, quad.tail_log_threshold)
    s_max = math.sqrt(0.5 * v_max)
    panels = _initial_panels(v_max, N)
    logging.info(f"装配 {N}×{N} Weyl 矩阵：角向采样 {n_theta}，截断 u ≤ {0.5 * v_max:.4g}")

    previous = _assemble(sym, N, s_max, panels, quad, n_theta, disable_tqdm, workers)
    for _ in range(quad.max_refinements):
        panels *= 2
        current = _assemble(sym, N, s_max, panels, quad, n_theta, disable_tqdm, workers)
        if _converged(previous, current, quad.rtol):
            if sym.is_real:
                imaginary = float(np.max(np.abs(np.diag(current).imag), initial=0.0))
                logging.debug(f"实符号矩阵对角虚部残差 {imaginary:.3e}")
            return OperatorMatrix(current, f"{sym.family}(N={N})")
        previous = current
    raise AccuracyError(
        f"Weyl 矩阵在 {panels} 个面板后仍未收敛，"
        f"相邻估计差 {float(np.max(np.abs(current - previous))):.3e}")


# ---------------------------------------------------------------------------
# 特征值
# ---------------------------------------------------------------------------

def eigensolve(mat: Union[OperatorMatrix, NDArray]) -> SpectralData:
    """
    Hermite 矩阵的升序特征值（三对角化 + 隐式 QL/QR）。可信前缀由 truncation_trust 设置。

    Raises:
        InputError: 矩阵不是 Hermite 矩阵。
    """

    entries = mat.entries if isinstance(mat, OperatorMatrix) else np.asarray(mat)
    source = mat.source if isinstance(mat, OperatorMatrix) else "matrix"
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise InputError(f"特征值求解需要方阵，收到形状 {entries.shape}")
    norm = max(1.0, float(np.max(np.abs(entries), initial=0.0)))
    defect = float(np.max(np.abs(entries - entries.conj().T), initial=0.0))
    if defect > HERMITIAN_TOLERANCE * norm:
        raise InputError(f"矩阵不是 Hermite 矩阵，偏差 {defect:.3e}")
    hermitian = 0.5 * (entries + entries.conj().T)
    if np.iscomplexobj(hermitian) and not np.any(hermitian.imag):
        hermitian = hermitian.real
    eigenvalues = scipy.linalg.eigh(hermitian, eigvals_only=True, driver="ev")
    return SpectralData(eigenvalues, 0, f"eigensolve({source})")


def truncation_trust(eigs_n: SpectralData, eigs_2n: SpectralData, tol: float) -> int:
    """|λ_j^{(N)} − λ_j^{(2N)}| ≤ tol·(1+|λ_j|) 对所有 j < k 成立的最大 k。"""

    a, b = eigs_n.eigenvalues, eigs_2n.eigenvalues
    count = min(a.size, b.size)
    bad = np.nonzero(np.abs(a[:count] - b[:count]) > tol * (1.0 + np.abs(a[:count])))[0]
    return int(bad[0]) if bad.size else count


def combine_separable(a: SpectralData, b: SpectralData, cutoff: float) -> SpectralData:
    """
    可分离直和的谱：所有 λ + μ ≤ cutoff 的两两和，升序。

    Raises:
        RangeError: 输入的可信范围不足以覆盖 cutoff。
    """

    left, right = a.trusted, b.trusted
    if not left.size or not right.size:
        raise RangeError("可分离直和需要两个非空的可信谱")
    if a.ceiling < cutoff - right[0] or b.ceiling < cutoff - left[0]:
        raise RangeError(
            f"可信谱上界 ({a.ceiling:.6g}, {b.ceiling:.6g}) 不足以覆盖 cutoff={cutoff:.6g}")
    sums: List[NDArray] = []
    for value in left:
        if value + right[0] > cutoff:
            break
        sums.append(value + right[:np.searchsorted(right, cutoff - value, side="right")])
    combined = np.sort(np.concatenate(sums)) if sums else np.zeros(0)
    return SpectralData(combined, combined.size, f"separable({a.source}, {b.source})", float(cutoff))
