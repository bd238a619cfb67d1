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

"""实验配置与符号、权重、比较函数、球面剖面描述的解析和校验。

所有解析函数在描述无效时抛出 ``ConfigError``，异常信息给出配置路径。
"""

import copy
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

from weyllab import EXPERIMENTS_FILE
from weyllab.data_helper import read_data_from_json
from weyllab.errors import ConfigError, LabError
from weyllab.spectral.asymptotics_helper import COMPARISON_FAMILIES, ComparisonFunction, SphereProfile
from weyllab.spectral.symbols_helper import (
    EntireSeriesSymbol,
    ExpGevreySymbol,
    PolynomialProfile,
    PolynomialSymbol,
    RadialSymbol,
    SeparableSum,
    ShiftedSymbol,
    Symbol,
    positivize,
)
from weyllab.spectral.weights_helper import WEIGHT_KINDS, WeightSequence

SYMBOL_KEYS = {
    "radial": ("d", "coefficients", "exp"),
    "polynomial": ("d", "terms"),
    "exp_gevrey": ("d", "h", "s"),
    "entire_series": ("d", "h", "s"),
    "separable_sum": ("parts",),
    "shifted": ("base", "z"),
    "positivized": ("base", "r_in", "r_out"),
}
COMMON_FIELDS = ("experiment", "tolerances", "output", "threads")
QUANTIZATIONS = ("weyl", "antiwick")
CLOSED_FORMS = ("harmonic",)
LOWER_BOUND_SCALES = ("theoretical", "empirical")


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _require_object(spec, path):
    if not isinstance(spec, dict):
        raise ConfigError(f"配置项 '{path}' 必须是 JSON 对象")


def _check_keys(spec, allowed, path):
    for key in spec:
        if key not in allowed:
            raise ConfigError(f"配置项 '{path}' 包含未知字段 '{key}'")


def _number(spec, key, path, default=None, positive=False):
    value = spec.get(key, default)
    if not _is_number(value):
        raise ConfigError(f"配置项 '{path}.{key}' 必须是有限数值")
    if positive and not value > 0:
        raise ConfigError(f"配置项 '{path}.{key}' 必须为正，收到 {value}")
    return float(value)


def _dimension(spec, path, default=1):
    d = spec.get("d", default)
    if not _is_int(d) or d < 1:
        raise ConfigError(f"配置项 '{path}.d' 必须是正整数")
    return d


def _complex(value, path):
    if _is_number(value):
        return float(value)
    if (isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value)):
        return complex(value[0], value[1]) if value[1] else float(value[0])
    raise ConfigError(f"配置项 '{path}' 必须是数值或 [实部, 虚部]")


def _build(factory: Callable[[], Any], path: str):
    """调用计算模块的构造函数，把参数错误转换为 ConfigError。"""

    try:
        return factory()
    except LabError as e:
        raise ConfigError(f"配置项 '{path}' 无效: {e}") from e


def parse_symbol(spec, path="symbol") -> Symbol:
    """
    解析符号描述。

    支持的 family: radial、polynomial、exp_gevrey、entire_series、separable_sum、
    shifted、positivized，后三者递归包含其他符号。

    Args:
        spec (dict): 符号描述，例如 ``{"family": "radial", "coefficients": [0, 1]}``。
        path (str): 配置路径。

    Returns:
        Symbol: 符号对象。

    Raises:
        ConfigError: 描述无效。
    """

    _require_object(spec, path)
    family = spec.get("family")
    if family not in SYMBOL_KEYS:
        raise ConfigError(f"配置项 '{path}.family' 未知: {family!r}，可选 {list(SYMBOL_KEYS)}")
    _check_keys(spec, ("family",) + SYMBOL_KEYS[family], path)

    if family == "radial":
        coefficients = spec.get("coefficients")
        if (not isinstance(coefficients, list) or not coefficients
                or not all(_is_number(c) for c in coefficients)):
            raise ConfigError(f"配置项 '{path}.coefficients' 必须是非空数值列表")
        wrap = spec.get("exp", False)
        if not isinstance(wrap, bool):
            raise ConfigError(f"配置项 '{path}.exp' 必须是布尔值")
        d = _dimension(spec, path)
        return _build(lambda: RadialSymbol(PolynomialProfile(coefficients, wrap), d), path)

    if family == "polynomial":
        d = _dimension(spec, path)
        terms = spec.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ConfigError(f"配置项 '{path}.terms' 必须是非空列表")
        parsed = {}
        for i, term in enumerate(terms):
            term_path = f"{path}.terms[{i}]"
            _require_object(term, term_path)
            _check_keys(term, ("powers", "coefficient"), term_path)
            powers = term.get("powers")
            if (not isinstance(powers, list) or len(powers) != 2 * d
                    or not all(_is_int(p) and p >= 0 for p in powers)):
                raise ConfigError(f"配置项 '{term_path}.powers' 必须是 {2 * d} 个非负整数")
            coefficient = _complex(term.get("coefficient"), f"{term_path}.coefficient")
            key = tuple(powers)
            parsed[key] = parsed.get(key, 0.0) + coefficient
        return _build(lambda: PolynomialSymbol(parsed, d), path)

    if family in ("exp_gevrey", "entire_series"):
        d = _dimension(spec, path)
        h = _number(spec, "h", path, 1.0, positive=True)
        s = _number(spec, "s", path, positive=True)
        cls = ExpGevreySymbol if family == "exp_gevrey" else EntireSeriesSymbol
        return _build(lambda: cls(h, s, d), path)

    if family == "separable_sum":
        parts = spec.get("parts")
        if not isinstance(parts, list) or not parts:
            raise ConfigError(f"配置项 '{path}.parts' 必须是非空列表")
        parsed_parts = [parse_symbol(part, f"{path}.parts[{i}]") for i, part in enumerate(parts)]
        return _build(lambda: SeparableSum(parsed_parts), path)

    base = parse_symbol(spec.get("base"), f"{path}.base")
    if family == "shifted":
        z = _complex(spec.get("z"), f"{path}.z")
        return _build(lambda: ShiftedSymbol(base, z), path)

    r_in = _number(spec, "r_in", path, positive=True)
    r_out = _number(spec, "r_out", path, positive=True)
    return _build(lambda: positivize(base, r_in, r_out), path)


def parse_weights(spec, path="weights") -> WeightSequence:
    """解析权重序列描述 ``{"kind": "gevrey", "s": 2}`` 或 ``{"kind": "custom", "values": [...]}``。"""

    _require_object(spec, path)
    kind = spec.get("kind")
    if kind not in WEIGHT_KINDS:
        raise ConfigError(f"配置项 '{path}.kind' 未知: {kind!r}，可选 {list(WEIGHT_KINDS)}")
    if kind == "custom":
        _check_keys(spec, ("kind", "values"), path)
        values = spec.get("values")
        if not isinstance(values, list) or not all(_is_number(v) for v in values):
            raise ConfigError(f"配置项 '{path}.values' 必须是数值列表")
        return _build(lambda: WeightSequence.custom(values), path)
    _check_keys(spec, ("kind", "s"), path)
    s = _number(spec, "s", path, positive=True)
    return _build(lambda: WeightSequence(kind, s=s), path)


def parse_comparison(spec, path="comparison", d=1) -> ComparisonFunction:
    """
    解析比较函数描述。未给出 d 时使用符号的维数，给出时必须一致。

    Raises:
        ConfigError: 描述无效或维数不一致。
    """

    _require_object(spec, path)
    family = spec.get("family")
    if family not in COMPARISON_FAMILIES:
        raise ConfigError(f"配置项 '{path}.family' 未知: {family!r}，可选 {list(COMPARISON_FAMILIES)}")
    allowed = {
        "power_log": ("beta", "alpha"),
        "exp_gevrey": ("h", "s"),
        "exp_root_scaled": ("h", "s", "c"),
        "assoc": ("h", "weights"),
    }[family]
    _check_keys(spec, ("family", "d", "Y") + allowed, path)
    dimension = _dimension(spec, path, d)
    if dimension != d:
        raise ConfigError(f"配置项 '{path}.d'={dimension} 与符号维数 {d} 不一致")
    Y = _number(spec, "Y", path) if "Y" in spec else None

    if family == "power_log":
        beta = _number(spec, "beta", path, positive=True)
        alpha = _number(spec, "alpha", path, 0.0)
        return _build(lambda: ComparisonFunction.power_log(beta, alpha, d, Y), path)
    if family == "assoc":
        weights = parse_weights(spec.get("weights"), f"{path}.weights")
        h = _number(spec, "h", path, 1.0, positive=True)
        return _build(lambda: ComparisonFunction.assoc(weights, h, d, Y), path)
    h = _number(spec, "h", path, 1.0, positive=True)
    s = _number(spec, "s", path, positive=True)
    if family == "exp_gevrey":
        return _build(lambda: ComparisonFunction.exp_gevrey(h, s, d, Y), path)
    c = _number(spec, "c", path, positive=True)
    return _build(lambda: ComparisonFunction.exp_root_scaled(h, s, c, d, Y), path)


def parse_phi(spec, path="phi", d=1, order=24) -> SphereProfile:
    """解析球面剖面；缺省（None）为 Φ ≡ 1。"""

    if spec is None:
        return SphereProfile.constant(1.0, d, order)
    _require_object(spec, path)
    kind = spec.get("kind")
    if kind == "constant":
        _check_keys(spec, ("kind", "value"), path)
        value = _number(spec, "value", path, 1.0, positive=True)
        return _build(lambda: SphereProfile.constant(value, d, order), path)
    if kind == "fourier":
        if d != 1:
            raise ConfigError(f"配置项 '{path}': fourier 剖面只支持 d=1")
        _check_keys(spec, ("kind", "constant", "cos", "sin"), path)
        constant = _number(spec, "constant", path, positive=True)
        series = {}
        for key in ("cos", "sin"):
            values = spec.get(key, [])
            if not isinstance(values, list) or not all(_is_number(v) for v in values):
                raise ConfigError(f"配置项 '{path}.{key}' 必须是数值列表")
            series[key] = values
        return _build(lambda: SphereProfile.fourier(constant, series["cos"], series["sin"], order), path)
    raise ConfigError(f"配置项 '{path}.kind' 未知: {kind!r}，可选 ['constant', 'fourier']")


# ---------------------------------------------------------------------------
# 字段解析
# ---------------------------------------------------------------------------

def _positive_int(value, path, context):
    if not _is_int(value) or value < 1:
        raise ConfigError(f"配置项 '{path}' 必须是正整数")
    return value


def _non_negative_int(value, path, context):
    if not _is_int(value) or value < 0:
        raise ConfigError(f"配置项 '{path}' 必须是非负整数")
    return value


def _positive_number(value, path, context):
    if not _is_number(value) or not value > 0:
        raise ConfigError(f"配置项 '{path}' 必须是正数")
    return float(value)


def _non_negative_number(value, path, context):
    if not _is_number(value) or value < 0:
        raise ConfigError(f"配置项 '{path}' 必须是非负数")
    return float(value)


def _positive_list(value, path, context):
    if not isinstance(value, list) or not all(_is_number(v) and v > 0 for v in value):
        raise ConfigError(f"配置项 '{path}' 必须是正数列表")
    return [float(v) for v in value]


def _choice(options):
    def parser(value, path, context):
        if value not in options:
            raise ConfigError(f"配置项 '{path}' 必须是 {list(options)} 之一，收到 {value!r}")
        return value
    return parser


def _optional(parser):
    def wrapped(value, path, context):
        return None if value is None else parser(value, path, context)
    return wrapped


def _bool(value, path, context):
    if not isinstance(value, bool):
        raise ConfigError(f"配置项 '{path}' 必须是布尔值")
    return value


def _rho(value, path, context):
    if not _is_number(value) or not 0 < value <= 1:
        raise ConfigError(f"配置项 '{path}' 必须在 (0, 1] 内")
    return float(value)


def _j_range(value, path, context):
    if (not isinstance(value, list) or len(value) != 2 or not all(_is_int(v) for v in value)
            or not 1 <= value[0] < value[1]):
        raise ConfigError(f"配置项 '{path}' 必须是 [lo, hi]，1 ≤ lo < hi")
    return (value[0], value[1])


def _lower_bound_scale(value, path, context):
    if value in LOWER_BOUND_SCALES:
        return value
    return _positive_number(value, path, context)


def _point(value, path, context):
    d = context["d"]
    if not isinstance(value, list) or len(value) != 2 * d or not all(_is_number(v) for v in value):
        raise ConfigError(f"配置项 '{path}' 必须是 {2 * d} 个有限数值")
    return [float(v) for v in value]


def _symbol_list(value, path, context):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"配置项 '{path}' 必须是非空的符号列表")
    return [parse_symbol(item, f"{path}[{i}]") for i, item in enumerate(value)]


def _threads(value, path, context):
    return _optional(_positive_int)(value, path, context)


def _output(value, path, context):
    if not isinstance(value, str) or not value:
        raise ConfigError(f"配置项 '{path}' 必须是非空字符串")
    return value


def _tolerances(value, path, context):
    _require_object(value, path)
    known = context["tolerance_keys"]
    parsed = {}
    for key, tolerance in value.items():
        if key not in known:
            raise ConfigError(f"配置项 '{path}' 包含未知容差 '{key}'")
        parsed[key] = _positive_number(tolerance, f"{path}.{key}", context)
    return parsed


FIELD_PARSERS: Dict[str, Callable[[Any, str, Dict], Any]] = {
    "symbol": lambda value, path, context: parse_symbol(value, path),
    "symbol_b": lambda value, path, context: parse_symbol(value, path),
    "product": lambda value, path, context: parse_symbol(value, path),
    "expected_layers": _optional(_symbol_list),
    "comparison": _optional(lambda value, path, context: parse_comparison(value, path, context["d"])),
    "phi": lambda value, path, context: parse_phi(value, path, context["d"], context["sphere_order"]),
    "weights": _optional(lambda value, path, context: parse_weights(value, path)),
    "N": _positive_int,
    "J": _positive_int,
    "block": _positive_int,
    "points": _positive_int,
    "layers": _non_negative_int,
    "seed": _non_negative_int,
    "quantization": _choice(QUANTIZATIONS),
    "closed_form": _optional(_choice(CLOSED_FORMS)),
    "lambdas": _positive_list,
    "ts": _positive_list,
    "rho": _rho,
    "C_lower": _positive_number,
    "radius": _positive_number,
    "R": _positive_number,
    "B": _non_negative_number,
    "z": lambda value, path, context: _complex(value, path),
    "j_range": _optional(_j_range),
    "lower_bound_scale": _lower_bound_scale,
    "expect_positive": _bool,
    "w": _point,
    "tolerances": _tolerances,
    "output": _optional(_output),
    "threads": _threads,
}
# 依赖符号维数的字段在 symbol 之后解析
FIELD_ORDER = ("symbol", "symbol_b", "product")


@dataclass
class ExperimentConfig:
    """
    通过校验的实验配置。

    Attributes:
        experiment (str): 实验名称。
        fields (dict): 已解析的字段（含默认值）。
        raw (dict): 原始 JSON 内容，写入 summary.json。
    """

    experiment: str
    fields: Dict[str, Any]
    raw: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.fields[key]

    def get(self, key, default=None):
        return self.fields.get(key, default)

    @property
    def tolerances(self) -> Dict[str, float]:
        return self.fields.get("tolerances") or {}


def load_experiment_catalogue(catalogue_path=EXPERIMENTS_FILE):
    """
    加载实验目录。

    Returns:
        dict: 实验名到 {description, required, optional} 的映射。

    Raises:
        RuntimeError: 目录文件缺失或结构错误。
    """

    try:
        catalogue = read_data_from_json(catalogue_path)
    except Exception as e:
        raise RuntimeError(f"实验目录加载失败: {e}") from e
    if not isinstance(catalogue, dict):
        raise RuntimeError("实验目录内容必须是 JSON 对象")
    for name, entry in catalogue.items():
        if (not isinstance(entry, dict) or not isinstance(entry.get("required"), list)
                or not isinstance(entry.get("optional"), dict)):
            raise RuntimeError(f"实验目录项 '{name}' 结构错误")
        unknown = [key for key in entry["required"] + list(entry["optional"]) if key not in FIELD_PARSERS]
        if unknown:
            raise RuntimeError(f"实验目录项 '{name}' 引用了未知字段 {unknown}")
    return catalogue


def load_experiment_config(config_path):
    """读取实验配置 JSON 文件。

    Raises:
        ConfigError: 文件不存在、不是合法 JSON 或不是 JSON 对象。
    """

    if not os.path.isfile(config_path):
        raise ConfigError(f"实验配置文件不存在: {config_path}")
    try:
        raw = read_data_from_json(config_path)
    except ValueError as e:
        raise ConfigError(f"实验配置文件不是合法 JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("实验配置文件内容必须是 JSON 对象")
    return raw


def validate_experiment_config(raw, catalogue, tolerance_keys, sphere_order=24) -> ExperimentConfig:
    """
    按实验目录严格校验实验配置：未知字段、缺失字段、类型错误均抛出 ConfigError。

    Args:
        raw (dict): 原始配置。
        catalogue (dict): 实验目录。
        tolerance_keys (Iterable[str]): 允许覆盖的容差名。
        sphere_order (int): 解析球面剖面使用的求积阶数。

    Returns:
        ExperimentConfig: 解析后的配置。
    """

    _require_object(raw, "<root>")
    name = raw.get("experiment")
    if name not in catalogue:
        raise ConfigError(f"未知实验 {name!r}，可选 {sorted(catalogue)}")
    entry = catalogue[name]
    allowed = set(COMMON_FIELDS) | set(entry["required"]) | set(entry["optional"])
    _check_keys(raw, allowed, "<root>")
    missing = [key for key in entry["required"] if key not in raw]
    if missing:
        raise ConfigError(f"实验 '{name}' 缺少字段 {missing}")

    values = copy.deepcopy(entry["optional"])
    values.update({key: value for key, value in raw.items() if key != "experiment"})
    context = {"d": 1, "sphere_order": sphere_order, "tolerance_keys": set(tolerance_keys)}
    fields: Dict[str, Any] = {}
    ordered: List[str] = [key for key in FIELD_ORDER if key in values]
    ordered += [key for key in values if key not in FIELD_ORDER]
    for key in ordered:
        fields[key] = FIELD_PARSERS[key](values[key], key, context)
        if key == "symbol":
            context["d"] = fields[key].d
    for key in ("symbol_b", "product"):
        if key in fields and fields[key].d != context["d"]:
            raise ConfigError(f"配置项 '{key}' 的维数 {fields[key].d} 与 symbol 的维数 {context['d']} 不一致")
    logging.info(f"实验配置校验通过: {name}")
    return ExperimentConfig(name, fields, copy.deepcopy(raw))
