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

"""分段 Gauss–Legendre 求积与球面乘积求积。"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_jacobi, roots_legendre

from weyllab.errors import AccuracyError


@dataclass(frozen=True)
class QuadratureSpec:
    """求积参数。

    Attributes:
        nodes_per_panel (int): 每个面板的 Gauss–Legendre 节点数。
        rtol (float): 交错加密估计之间允许的相对差。
        max_refinements (int): 面板数翻倍的最大次数。
        tail_log_threshold (float): 截断尾项的对数阈值。
        radial_log_window (float): 径向积分在峰值以下保留的对数窗口。
        sphere_order (int): 球面求积每个角向的节点数。
        angular_oversampling (int): 角向 FFT 采样相对矩阵维数的倍数。
    """

    nodes_per_panel: int = 20
    rtol: float = 1e-10
    max_refinements: int = 6
    tail_log_threshold: float = -37.0
    radial_log_window: float = 40.0
    sphere_order: int = 24
    angular_oversampling: int = 2


@lru_cache(maxsize=32)
def _legendre_rule(nodes: int) -> Tuple[NDArray, NDArray]:
    x, w = roots_legendre(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(a: float, b: float, panels: int, nodes: int) -> Tuple[NDArray, NDArray]:
    """
    生成区间 [a, b] 上等分面板的 Gauss–Legendre 节点与权重。

    Args:
        a (float): 左端点。
        b (float): 右端点。
        panels (int): 面板数。
        nodes (int): 每个面板的节点数。

    Returns:
        tuple: (节点, 权重)，均为一维数组。
    """

    x, w = _legendre_rule(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return points, weights


def integrate_panels(
    integrand: Callable[[NDArray], NDArray],
    a: float,
    b: float,
    panels: int,
    spec: QuadratureSpec,
    label: str = "积分",
) -> NDArray:
    """
    分段求积并按面板数翻倍加密，直到相邻两次估计在相对容差内一致。

    被积函数可以返回形如 (节点数,) 或 (m, 节点数) 的数组，后者同时积分 m 个函数。

    Args:
        integrand (Callable): 向量化被积函数。
        a (float): 左端点。
        b (float): 右端点。
        panels (int): 初始面板数。
        spec (QuadratureSpec): 求积参数。
        label (str): 日志与异常信息中的名称。

    Returns:
        numpy.ndarray: 积分值（标量积分时为 0 维数组）。

    Raises:
        AccuracyError: 达到最大加密次数仍未收敛。
    """

    panels = max(1, int(panels))
    points, weights = panel_nodes(a, b, panels, spec.nodes_per_panel)
    previous = np.asarray(integrand(points)) @ weights
    for _ in range(spec.max_refinements):
        panels *= 2
        points, weights = panel_nodes(a, b, panels, spec.nodes_per_panel)
        current = np.asarray(integrand(points)) @ weights
        scale = np.maximum(np.abs(current), np.max(np.abs(current), initial=0.0) * 1e-16)
        if np.all(np.abs(current - previous) <= spec.rtol * (scale + 1e-300)):
            return current
        previous = current
    error = float(np.max(np.abs(current - previous)))
    raise AccuracyError(
        f"{label}在 {panels} 个面板后仍未收敛，相邻估计差 {error:.3e}")


@lru_cache(maxsize=16)
def sphere_rule(d: int, order: int) -> Tuple[NDArray, NDArray]:
    """
    单位球面 S^{2d-1} 上的乘积求积规则。

    d=1 时为 θ 方向的梯形规则；更高维时极角方向使用 Gauss–Jacobi 节点，
    最后一个方位角使用梯形规则。

    Args:
        d (int): 空间维数，相空间维数为 2d。
        order (int): 每个极角方向的节点数。

    Returns:
        tuple: (单位向量数组 (Q, 2d), 权重数组 (Q,))，权重之和为球面面积。
    """

    n = 2 * d
    azimuth_count = 2 * order
    theta = 2.0 * math.pi * np.arange(azimuth_count) / azimuth_count
    theta_weight = np.full(azimuth_count, 2.0 * math.pi / azimuth_count)
    # 从最内层的二维圆开始，逐层加入极角
    vectors = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    weights = theta_weight
    for m in range(1, n - 1):
        t, w = roots_jacobi(order, 0.5 * (m - 1), 0.5 * (m - 1))
        sin_phi = np.sqrt(1.0 - t * t)
        outer = np.concatenate([
            np.repeat(t[:, None], len(vectors), axis=0),
            (sin_phi[:, None, None] * vectors[None, :, :]).reshape(-1, vectors.shape[1]),
        ], axis=1)
        vectors = outer
        weights = (w[:, None] * weights[None, :]).ravel()
    vectors.setflags(write=False)
    weights.setflags(write=False)
    logging.debug(f"球面 S^{n - 1} 求积节点数 {len(weights)}")
    return vectors, weights
