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

"""命名实验的执行：计算、写出 CSV 与 summary.json，并给出通过/失败判定。"""

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from weyllab.data_helper import save_data_to_json, save_rows_to_csv
from weyllab.errors import CapabilityError, InputError, ResolutionError
from weyllab.schema_helper import ExperimentConfig
from weyllab.spectral.asymptotics_helper import (
    ComparisonFunction,
    counting_ratio_trend,
    counting_upper_bound,
    eigenvalue_lower_bound_check,
    empirical_lower_bound_scale,
    gamma_const,
    karamata_estimate,
    log_slope_fit,
    sigma,
    weyl_constant,
)
from weyllab.spectral.calculus_helper import (
    excision,
    heat_terms,
    layered_sharp_values,
    parametrix_jets,
    parametrix_series,
    sharp_term,
)
from weyllab.spectral.heat_helper import (
    default_lower_bound_scale,
    heat_trace,
    mehler_symbol,
    mehler_trace,
    trace_shape_checks,
    verify_heat_formula,
)
from weyllab.spectral.quadrature_helper import QuadratureSpec
from weyllab.spectral.quantize_helper import (
    SpectralData,
    build_matrix,
    combine_separable,
    eigensolve,
    radial_antiwick_eigs,
    radial_weyl_eigs,
    truncation_trust,
)
from weyllab.spectral.symbols_helper import RadialSymbol, SeparableSum, Symbol


@dataclass
class Check:
    name: str
    value: float
    tolerance: Any
    passed: bool

    def to_dict(self) -> Dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "pass": bool(self.passed)}


@dataclass
class ExperimentResult:
    """
    一次实验的结果。

    Attributes:
        experiment (str): 实验名称。
        constants (dict): 主常数 {computed, predicted, ratio}。
        checks (list): 各项检查。
        artifacts (list): 写出的文件名。
        details (dict): 附加诊断信息。
    """

    experiment: str
    constants: Dict[str, Optional[float]] = field(
        default_factory=lambda: {"computed": None, "predicted": None, "ratio": None})
    checks: List[Check] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def set_constants(self, computed: float, predicted: Optional[float]) -> None:
        ratio = computed / predicted if predicted else None
        self.constants = {"computed": computed, "predicted": predicted, "ratio": ratio}

    def check_at_most(self, name: str, value: float, tolerance: float) -> None:
        self.checks.append(Check(name, float(value), tolerance, bool(value <= tolerance)))

    def check_between(self, name: str, value: float, low: float, high: float) -> None:
        self.checks.append(Check(name, float(value), [low, high], bool(low <= value <= high)))


@dataclass
class ExperimentContext:
    config: ExperimentConfig
    quad: QuadratureSpec
    tolerances: Dict[str, float]
    out_dir: str
    disable_tqdm: bool = True
    max_workers: Optional[int] = None
    jet_order_cap: int = 12

    def path(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)


def _relative_deviation(computed: float, predicted: float) -> float:
    return abs(computed / predicted - 1.0)


# ---------------------------------------------------------------------------
# 谱与下界尺度
# ---------------------------------------------------------------------------

def compute_spectrum(sym: Symbol, N: int, quantization: str, ctx: ExperimentContext) -> SpectralData:
    """
    按符号类型选择谱的计算路径。

    d=1 径向符号走 Laguerre 对角路径；可分离直和合并各部分的谱；其余 d=1 符号装配 N 与 2N 维矩阵，
    以两者一致的前缀作为可信谱。

    Raises:
        CapabilityError: 符号类型与量子化方式不受支持。
    """

    if isinstance(sym, SeparableSum):
        parts = [compute_spectrum(part, N, quantization, ctx) for part in sym.parts]
        if any(part.trusted_count == 0 for part in parts):
            raise ResolutionError("可分离直和的某一部分没有可信特征值，请增大基的维数")
        combined = parts[0]
        for other in parts[1:]:
            cutoff = min(combined.ceiling + other.trusted[0], other.ceiling + combined.trusted[0])
            combined = combine_separable(combined, other, cutoff)
        logging.info(f"可分离直和的谱：{combined.trusted_count} 个特征值 ≤ {combined.ceiling:.6g}")
        return combined
    if isinstance(sym, RadialSymbol) and sym.d == 1:
        if quantization == "antiwick":
            return radial_antiwick_eigs(sym, N, ctx.quad, ctx.disable_tqdm)
        return radial_weyl_eigs(sym, N, ctx.quad)
    if quantization == "antiwick":
        raise CapabilityError("反 Wick 量子化只支持 d=1 径向符号及其可分离直和")
    if sym.d != 1:
        raise CapabilityError(f"d={sym.d} 的非可分离符号没有谱计算路径")

    eigs = eigensolve(build_matrix(sym, N, ctx.quad, ctx.disable_tqdm, ctx.max_workers))
    reference = eigensolve(build_matrix(sym, 2 * N, ctx.quad, ctx.disable_tqdm, ctx.max_workers))
    trusted = truncation_trust(eigs, reference, ctx.tolerances["trust"])
    logging.info(f"N={N} 与 2N 的特征值在前 {trusted} 个上一致")
    return eigs.with_trust(trusted)


def resolve_lower_bound_scale(ctx: ExperimentContext, eigs: SpectralData, f: ComparisonFunction) -> float:
    """lower_bound_scale 为数值时直接使用；theoretical 取阈值的安全倍数；empirical 由可信谱估计。"""

    choice = ctx.config["lower_bound_scale"]
    safety = ctx.tolerances["lower_bound_safety"]
    if choice == "theoretical":
        h = default_lower_bound_scale(f, ctx.config["C_lower"], safety)
    elif choice == "empirical":
        h = empirical_lower_bound_scale(eigs, f, safety=safety)
    else:
        h = float(choice)
    logging.info(f"特征值下界尺度 h = {h:.6g}（{choice}）")
    return h


# ---------------------------------------------------------------------------
# 实验
# ---------------------------------------------------------------------------

def _counting_checks(result: ExperimentResult, eigs: SpectralData, f: ComparisonFunction,
                     lambdas: List[float], constant: float, ctx: ExperimentContext) -> None:
    trend = counting_ratio_trend(eigs, f, lambdas, constant)
    save_rows_to_csv(("lambda", "N", "sigma", "ratio", "predicted"), trend.rows, ctx.path("counting.csv"))
    result.artifacts.append("counting.csv")
    result.details["counting_trend"] = trend.trend
    tolerance = ctx.tolerances["counting_ratio"]
    for lam, _, _, ratio, _ in trend.rows:
        result.check_at_most(f"counting_ratio@{lam:g}", _relative_deviation(ratio, constant), tolerance)
    result.set_constants(trend.rows[-1][3], constant)


def run_spectrum(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    sym = config["symbol"]
    result = ExperimentResult("spectrum")
    eigs = compute_spectrum(sym, config["N"], config["quantization"], ctx)
    eigs.save_csv(ctx.path("eigenvalues.csv"))
    result.artifacts.append("eigenvalues.csv")
    result.details["trusted_count"] = eigs.trusted_count
    result.details["ceiling"] = eigs.ceiling

    if config["expect_positive"]:
        smallest = float(eigs.trusted[0])
        tolerance = ctx.tolerances["antiwick"]
        result.checks.append(Check("smallest_eigenvalue", smallest, -tolerance, smallest >= -tolerance))

    f = config["comparison"]
    if f is not None and config["lambdas"]:
        constant = weyl_constant(sym.d, f.index, config["phi"])
        _counting_checks(result, eigs, f, config["lambdas"], constant, ctx)
    return result


def _predicted_log_slope(f: ComparisonFunction, d: int, phi) -> float:
    """ln λ_j ≈ c (h γ j^{1/(2d)})^{1/s} 的斜率 c (hγ)^{1/s}。"""

    scale = f.c if f.family == "exp_root_scaled" else 1.0
    return scale * (f.h * gamma_const(d, phi)) ** (1.0 / f.s)


def run_weyl_check(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    sym, f, phi = config["symbol"], config["comparison"], config["phi"]
    result = ExperimentResult("weyl_check")
    eigs = compute_spectrum(sym, config["N"], config["quantization"], ctx)
    eigs.save_csv(ctx.path("eigenvalues.csv"))
    result.artifacts.append("eigenvalues.csv")

    lambdas = config["lambdas"] or [float(eigs.ceiling)]
    if f.family in ("exp_gevrey", "exp_root_scaled"):
        j_range = config["j_range"] or (max(1, eigs.trusted_count // 6), eigs.trusted_count - 1)
        fit = log_slope_fit(eigs, j_range, sym.d, f.s)
        predicted = _predicted_log_slope(f, sym.d, phi)
        save_rows_to_csv(
            ("j", "j_power", "log_lambda"),
            ((j, j ** (1.0 / (2.0 * sym.d * f.s)), math.log(eigs.eigenvalues[j]))
             for j in range(j_range[0], j_range[1] + 1)),
            ctx.path("log_slope.csv"))
        result.artifacts.append("log_slope.csv")
        result.details["log_slope_fit"] = fit.to_dict()
        result.set_constants(fit.slope, predicted)
        result.check_at_most("log_slope", _relative_deviation(fit.slope, predicted), ctx.tolerances["log_slope"])
        trend = counting_ratio_trend(eigs, f, lambdas, weyl_constant(sym.d, f.index, phi))
        save_rows_to_csv(("lambda", "N", "sigma", "ratio", "predicted"), trend.rows, ctx.path("counting.csv"))
        result.artifacts.append("counting.csv")
        result.details["counting_trend"] = trend.trend
    else:
        _counting_checks(result, eigs, f, lambdas, weyl_constant(sym.d, f.index, phi), ctx)

    h = resolve_lower_bound_scale(ctx, eigs, f)
    report = eigenvalue_lower_bound_check(eigs, f, h)
    result.details["lower_bound"] = report.to_dict()
    result.checks.append(Check("eigenvalue_lower_bound_onset",
                               report.onset if report.onset is not None else -1,
                               eigs.trusted_count, report.onset is not None))

    bound_rows = []
    for lam in sorted(lambdas):
        bound = counting_upper_bound(f, lam, config["C_lower"])
        count = eigs.counting(lam)
        bound_rows.append((lam, count, bound, count / bound))
        result.check_at_most(f"counting_upper_bound@{lam:g}", count / bound, 1.0)
    save_rows_to_csv(("lambda", "N", "bound", "ratio"), bound_rows, ctx.path("upper_bound.csv"))
    result.artifacts.append("upper_bound.csv")
    return result


def run_heat_check(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    sym, f = config["symbol"], config["comparison"]
    result = ExperimentResult("heat_check")
    eigs = compute_spectrum(sym, config["N"], config["quantization"], ctx)
    h = resolve_lower_bound_scale(ctx, eigs, f)
    report = verify_heat_formula(eigs, sym, config["ts"], config["rho"], f, config["C_lower"],
                                 ctx.quad, h, ctx.tolerances["heat_spread"])
    save_rows_to_csv(("t", "trace", "phase", "remainder", "residual", "ratio"),
                     (sample.to_row() for sample in report.samples), ctx.path("heat.csv"))
    result.artifacts.append("heat.csv")
    result.details["heat_formula"] = report.to_dict()
    result.details["tail_bounds"] = {sample.t: sample.tail_bound for sample in report.samples}
    result.checks.append(Check("heat_ratio_spread", report.spread, report.spread_limit, report.passed))
    result.set_constants(max(report.ratios), None)

    shape = trace_shape_checks([s.t for s in report.samples], [s.spectral_trace for s in report.samples])
    for name, passed in shape.items():
        result.checks.append(Check(f"trace_{name}", float(passed), 1.0, passed))

    if config["closed_form"] == "harmonic":
        d = sym.d
        for sample in report.samples:
            expected_trace = mehler_trace(sample.t) ** d
            expected_phase = (0.5 / sample.t) ** d
            result.check_at_most(f"trace_closed_form@{sample.t:g}",
                                 _relative_deviation(sample.spectral_trace, expected_trace),
                                 ctx.tolerances["heat_trace"])
            result.check_at_most(f"phase_closed_form@{sample.t:g}",
                                 _relative_deviation(sample.phase_integral, expected_phase),
                                 ctx.tolerances["heat_phase"])
    return result


def run_tauberian(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    sym, f, phi = config["symbol"], config["comparison"], config["phi"]
    result = ExperimentResult("tauberian")
    eigs = compute_spectrum(sym, config["N"], config["quantization"], ctx)
    h = resolve_lower_bound_scale(ctx, eigs, f)

    ts = sorted(config["ts"], reverse=True)
    ts_iter = tqdm(ts, desc="热迹样本", unit="t") if not ctx.disable_tqdm else ts
    samples = [(t, heat_trace(eigs, t, f, config["C_lower"], h).value) for t in ts_iter]
    estimate = karamata_estimate(samples, f)
    save_rows_to_csv(("t", "trace", "ratio"),
                     ((t, trace, ratio) for (t, trace), ratio in zip(samples, estimate.ratios)),
                     ctx.path("heat_samples.csv"))
    result.artifacts.append("heat_samples.csv")
    result.details["karamata"] = estimate.to_dict()

    constant = weyl_constant(sym.d, f.index, phi)
    rows = []
    for lam in sorted(config["lambdas"]):
        estimated = estimate.counting_estimate(lam)
        predicted = constant * sigma(f, lam)
        observed = eigs.counting(lam) if lam <= eigs.ceiling else None
        rows.append((lam, estimated, predicted, observed if observed is not None else "", estimated / predicted))
        result.check_at_most(f"karamata@{lam:g}", _relative_deviation(estimated, predicted),
                             ctx.tolerances["karamata"])
    save_rows_to_csv(("lambda", "estimate", "predicted", "observed", "ratio"), rows, ctx.path("karamata.csv"))
    result.artifacts.append("karamata.csv")
    result.set_constants(estimate.limit / estimate.gamma_factor, constant)
    return result


def _sample_points(d: int, count: int, seed: int, radius: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, size=(count, 2 * d))


def run_star_check(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    a, b, product = config["symbol"], config["symbol_b"], config["product"]
    layers = config["layers"]
    result = ExperimentResult("star_check")
    expected_layers = config["expected_layers"]
    if expected_layers is not None and len(expected_layers) != layers + 1:
        raise InputError(f"expected_layers 需要 {layers + 1} 项，收到 {len(expected_layers)} 项")

    rows, sum_error = [], 0.0
    layer_errors = [0.0] * (layers + 1)
    for w in _sample_points(a.d, config["points"], config["seed"], config["radius"]):
        values = [sharp_term(a, b, l, w) for l in range(layers + 1)]
        target = complex(product.value(w))
        sum_error = max(sum_error, abs(sum(values) - target))
        if expected_layers is not None:
            for l, layer in enumerate(expected_layers):
                layer_errors[l] = max(layer_errors[l], abs(values[l] - complex(layer.value(w))))
        rows.append(tuple(w) + tuple(v.real for v in values) + (target.real,))
    header = tuple(f"w{i}" for i in range(2 * a.d)) + tuple(f"c{l}" for l in range(layers + 1)) + ("product",)
    save_rows_to_csv(header, rows, ctx.path("sharp_layers.csv"))
    result.artifacts.append("sharp_layers.csv")
    tolerance = ctx.tolerances["sharp_layer"]
    result.check_at_most("sharp_sum", sum_error, tolerance)
    if expected_layers is not None:
        for l, error in enumerate(layer_errors):
            result.check_at_most(f"sharp_layer_{l}", error, tolerance)

    if a.d == 1:
        N, block = config["N"], min(config["block"], config["N"])
        ma = build_matrix(a, N, ctx.quad, ctx.disable_tqdm, ctx.max_workers).entries
        mb = build_matrix(b, N, ctx.quad, ctx.disable_tqdm, ctx.max_workers).entries
        mp = build_matrix(product, N, ctx.quad, ctx.disable_tqdm, ctx.max_workers).entries
        defect = float(np.max(np.abs((ma @ mb)[:block, :block] - mp[:block, :block])))
        result.details["composition_block"] = block
        result.check_at_most("matrix_composition", defect, ctx.tolerances["composition"])
        result.set_constants(defect, None)
    else:
        logging.warning(f"d={a.d} 不支持矩阵量子化，跳过矩阵乘积检查")
    return result


def run_parametrix_check(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    a, J, z = config["symbol"], config["J"], config["z"]
    result = ExperimentResult("parametrix_check")
    q1_error, identity_error = 0.0, 0.0
    rows = []
    points = _sample_points(a.d, config["points"], config["seed"], config["radius"])
    for w in points:
        q = parametrix_jets(a, J, w, z, cap=ctx.jet_order_cap)
        a_jet = a.jet(w, J - 1, cap=ctx.jet_order_cap)
        if z:
            a_jet = a_jet + z
        layers = layered_sharp_values(q, a_jet, J - 1)
        identity_error = max(identity_error, abs(layers[0] - 1.0), *(abs(c) for c in layers[1:]))
        if J > 1:
            q1_error = max(q1_error, abs(complex(q[1].value)))
        rows.append(tuple(w) + tuple(complex(term.value).real for term in q))
    header = tuple(f"w{i}" for i in range(2 * a.d)) + tuple(f"q{j}" for j in range(J))
    save_rows_to_csv(header, rows, ctx.path("parametrix.csv"))
    result.artifacts.append("parametrix.csv")
    result.check_at_most("layered_identity", identity_error, ctx.tolerances["parametrix_identity"])
    if isinstance(a, RadialSymbol) and J > 1:
        result.check_at_most("q1_vanishes", q1_error, ctx.tolerances["parametrix_q1"])
    result.set_constants(identity_error, None)

    weights = config["weights"]
    if weights is not None:
        series = parametrix_series(a, weights, config["B"], z, J_max=max(J, 8))
        excised = [(tuple(w), excision(series, config["R"], w)) for w in points]
        save_rows_to_csv(header[:2 * a.d] + ("re", "im"),
                         (w + (value.real, value.imag) for w, value in excised), ctx.path("excision.csv"))
        result.artifacts.append("excision.csv")
    return result


def run_mehler_check(ctx: ExperimentContext) -> ExperimentResult:
    config = ctx.config
    b, J, w = config["symbol"], config["J"], config["w"]
    if b.d != 1:
        raise InputError("Mehler 比较只支持 d=1")
    result = ExperimentResult("mehler_check")
    terms = heat_terms(b, J, cap=ctx.jet_order_cap)

    def error(t):
        return abs(sum(term.evaluate(t, w) for term in terms) - mehler_symbol(t, w))

    rows = []
    low, high = ctx.tolerances["mehler_ratio_low"], ctx.tolerances["mehler_ratio_high"]
    for t in sorted(config["ts"], reverse=True):
        coarse, fine = error(t), error(0.5 * t)
        ratio = coarse / fine if fine > 0 else math.inf
        rows.append((t, coarse, fine, ratio))
        result.check_between(f"error_ratio@{t:g}", ratio, low, high)
    save_rows_to_csv(("t", "error_t", "error_half_t", "ratio"), rows, ctx.path("mehler.csv"))
    result.artifacts.append("mehler.csv")
    result.set_constants(rows[-1][3], 2.0 ** (J + 1))
    return result


EXPERIMENT_RUNNERS: Dict[str, Callable[[ExperimentContext], ExperimentResult]] = {
    "spectrum": run_spectrum,
    "weyl_check": run_weyl_check,
    "heat_check": run_heat_check,
    "tauberian": run_tauberian,
    "star_check": run_star_check,
    "parametrix_check": run_parametrix_check,
    "mehler_check": run_mehler_check,
}


def write_summary(ctx: ExperimentContext, result: ExperimentResult) -> str:
    """写出 summary.json，无论检查是否通过。"""

    summary = {
        "experiment": result.experiment,
        "inputs": ctx.config.raw,
        "tolerances": ctx.tolerances,
        "constants": result.constants,
        "checks": [check.to_dict() for check in result.checks],
        "passed": result.passed,
        "artifacts": result.artifacts,
        "details": result.details,
    }
    summary_path = ctx.path("summary.json")
    save_data_to_json(summary, summary_path)
    return summary_path


def run_experiment(ctx: ExperimentContext) -> ExperimentResult:
    """
    执行实验并写出全部产物。

    Args:
        ctx (ExperimentContext): 实验上下文。

    Returns:
        ExperimentResult: 实验结果。
    """

    os.makedirs(ctx.out_dir, exist_ok=True)
    name = ctx.config.experiment
    logging.info(f"开始实验 {name}，输出目录 {ctx.out_dir}")
    result = EXPERIMENT_RUNNERS[name](ctx)
    write_summary(ctx, result)
    failed = [check.name for check in result.checks if not check.passed]
    if failed:
        logging.warning(f"实验 {name} 有 {len(failed)} 项检查未通过: {failed}")
    else:
        logging.info(f"实验 {name} 全部 {len(result.checks)} 项检查通过")
    return result
