import json
import tempfile
import unittest
from pathlib import Path

from weyllab.config_helper import resolve_quadrature_spec, resolve_tolerances
from weyllab.data_helper import read_data_from_json, read_rows_from_csv
from weyllab.errors import CapabilityError, ConfigError
from weyllab.experiment_helper import ExperimentContext, compute_spectrum, run_experiment
from weyllab.schema_helper import (
    load_experiment_catalogue,
    parse_comparison,
    parse_symbol,
    parse_weights,
    validate_experiment_config,
)
from weyllab.spectral.symbols_helper import ExpGevreySymbol, PolynomialSymbol, RadialSymbol, SeparableSum


ROOT_DIR = Path(__file__).resolve().parents[1]
HARMONIC = {"family": "radial", "coefficients": [0, 1]}


def default_lab_config():
    return json.loads((ROOT_DIR / "assist" / "config.json").read_text(encoding="utf-8"))


class SchemaTests(unittest.TestCase):
    def setUp(self):
        self.catalogue = load_experiment_catalogue()
        self.tolerance_keys = default_lab_config()["tolerances"].keys()

    def validate(self, raw):
        return validate_experiment_config(raw, self.catalogue, self.tolerance_keys, sphere_order=6)

    def test_catalogue_lists_every_experiment(self):
        self.assertEqual(
            sorted(self.catalogue),
            ["heat_check", "mehler_check", "parametrix_check", "spectrum",
             "star_check", "tauberian", "weyl_check"])

    def test_optional_fields_get_defaults(self):
        config = self.validate({"experiment": "spectrum", "symbol": HARMONIC, "N": 20})
        self.assertIsInstance(config["symbol"], RadialSymbol)
        self.assertEqual(config["quantization"], "weyl")
        self.assertIsNone(config["comparison"])
        self.assertEqual(config["lambdas"], [])
        self.assertEqual(config.tolerances, {})

    def test_unknown_and_missing_fields(self):
        with self.assertRaises(ConfigError):
            self.validate({"experiment": "spectrum", "symbol": HARMONIC, "N": 20, "colour": "red"})
        with self.assertRaises(ConfigError):
            self.validate({"experiment": "spectrum", "symbol": HARMONIC})
        with self.assertRaises(ConfigError):
            self.validate({"experiment": "unknown", "N": 20})

    def test_field_types(self):
        invalid = (
            {"N": 0},
            {"N": 2.5},
            {"N": True},
            {"quantization": "wick"},
            {"lambdas": [10, -1]},
            {"tolerances": {"counting_ratio": -0.1}},
            {"tolerances": {"unknown_tolerance": 0.1}},
            {"threads": 0},
        )
        for override in invalid:
            raw = {"experiment": "spectrum", "symbol": HARMONIC, "N": 20}
            raw.update(override)
            with self.assertRaises(ConfigError, msg=str(override)):
                self.validate(raw)

    def test_dimension_consistency(self):
        raw = {
            "experiment": "star_check",
            "symbol": HARMONIC,
            "symbol_b": {"family": "radial", "d": 2, "coefficients": [0, 1]},
            "product": HARMONIC,
        }
        with self.assertRaises(ConfigError):
            self.validate(raw)
        with self.assertRaises(ConfigError):
            self.validate({"experiment": "mehler_check", "w": [1.0, 0.0, 0.0]})

    def test_nested_symbols(self):
        sym = parse_symbol({
            "family": "separable_sum",
            "parts": [
                HARMONIC,
                {"family": "shifted", "z": [0.5, 0.0], "base": {"family": "exp_gevrey", "s": 2}},
            ],
        })
        self.assertIsInstance(sym, SeparableSum)
        self.assertEqual(sym.d, 2)
        self.assertIsInstance(sym.parts[1].base, ExpGevreySymbol)

    def test_polynomial_terms_merge(self):
        sym = parse_symbol({"family": "polynomial", "terms": [
            {"powers": [2, 0], "coefficient": 1},
            {"powers": [2, 0], "coefficient": 0.5},
            {"powers": [0, 2], "coefficient": 1},
        ]})
        self.assertIsInstance(sym, PolynomialSymbol)
        self.assertAlmostEqual(sym.value([2.0, 1.0]), 7.0)

    def test_invalid_descriptions(self):
        with self.assertRaises(ConfigError):
            parse_symbol({"family": "radial", "coefficients": []})
        with self.assertRaises(ConfigError):
            parse_symbol({"family": "exp_gevrey", "s": 0.5})
        with self.assertRaises(ConfigError):
            parse_symbol({"family": "polynomial", "terms": [{"powers": [1], "coefficient": 1}]})
        with self.assertRaises(ConfigError):
            parse_weights({"kind": "factorial", "s": 2})
        with self.assertRaises(ConfigError):
            parse_comparison({"family": "power_log", "beta": 2, "d": 2}, d=1)

    def test_comparison_defaults_to_symbol_dimension(self):
        config = self.validate({
            "experiment": "weyl_check",
            "symbol": {"family": "radial", "d": 2, "coefficients": [0, 1]},
            "N": 10,
            "comparison": {"family": "power_log", "beta": 2},
        })
        self.assertEqual(config["comparison"].d, 2)
        self.assertEqual(config["lower_bound_scale"], "theoretical")


class ExperimentRunTests(unittest.TestCase):
    def setUp(self):
        self.lab_config = default_lab_config()
        self.catalogue = load_experiment_catalogue()
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

    def context(self, raw):
        config = validate_experiment_config(raw, self.catalogue, self.lab_config["tolerances"].keys(), 6)
        return ExperimentContext(
            config=config,
            quad=resolve_quadrature_spec(self.lab_config),
            tolerances=resolve_tolerances(self.lab_config, config.tolerances),
            out_dir=str(Path(self.tmpdir.name) / config.experiment),
        )

    def test_spectrum_of_harmonic_oscillator(self):
        ctx = self.context({
            "experiment": "spectrum",
            "symbol": HARMONIC,
            "N": 50,
            "comparison": {"family": "power_log", "beta": 2},
            "lambdas": [20, 40, 80],
            "expect_positive": True,
        })
        result = run_experiment(ctx)
        self.assertTrue(result.passed, [check.to_dict() for check in result.checks])

        rows = read_rows_from_csv(ctx.path("eigenvalues.csv"))
        self.assertEqual(len(rows), 50)
        self.assertEqual(list(rows[0]), ["j", "lambda", "trusted"])
        self.assertAlmostEqual(float(rows[3]["lambda"]), 7.0, places=10)

        summary = read_data_from_json(ctx.path("summary.json"))
        self.assertEqual(summary["experiment"], "spectrum")
        self.assertTrue(summary["passed"])
        self.assertAlmostEqual(summary["constants"]["predicted"], 0.5)
        self.assertAlmostEqual(summary["constants"]["ratio"], 1.0, places=10)
        self.assertEqual(summary["inputs"]["N"], 50)
        self.assertIn("counting.csv", summary["artifacts"])
        self.assertEqual(summary["tolerances"]["counting_ratio"], 0.005)

    def test_failed_check_still_writes_summary(self):
        ctx = self.context({
            "experiment": "spectrum",
            "symbol": HARMONIC,
            "N": 50,
            "comparison": {"family": "power_log", "beta": 2},
            "lambdas": [21],
            "tolerances": {"counting_ratio": 1e-6},
        })
        result = run_experiment(ctx)
        self.assertFalse(result.passed)
        summary = read_data_from_json(ctx.path("summary.json"))
        self.assertFalse(summary["passed"])
        self.assertEqual(summary["tolerances"]["counting_ratio"], 1e-6)

    def test_heat_check_harmonic_closed_form(self):
        ctx = self.context({
            "experiment": "heat_check",
            "symbol": HARMONIC,
            "N": 200,
            "ts": [0.4, 0.2, 0.1],
            "comparison": {"family": "power_log", "beta": 2},
            "lower_bound_scale": 1.0,
            "closed_form": "harmonic",
        })
        result = run_experiment(ctx)
        self.assertTrue(result.passed, [check.to_dict() for check in result.checks])
        rows = read_rows_from_csv(ctx.path("heat.csv"))
        self.assertEqual([float(row["t"]) for row in rows], [0.4, 0.2, 0.1])

    def test_mehler_check_defaults(self):
        ctx = self.context({"experiment": "mehler_check"})
        result = run_experiment(ctx)
        self.assertTrue(result.passed, [check.to_dict() for check in result.checks])
        self.assertEqual(result.constants["predicted"], 16.0)
        self.assertEqual(len(read_rows_from_csv(ctx.path("mehler.csv"))), 3)

    def test_star_check_of_squared_radius(self):
        ctx = self.context({
            "experiment": "star_check",
            "symbol": HARMONIC,
            "symbol_b": HARMONIC,
            "product": {"family": "radial", "coefficients": [-1, 0, 1]},
            "points": 10,
            "N": 40,
            "block": 10,
        })
        result = run_experiment(ctx)
        self.assertTrue(result.passed, [check.to_dict() for check in result.checks])

    def test_parametrix_check(self):
        ctx = self.context({
            "experiment": "parametrix_check",
            "symbol": {"family": "radial", "coefficients": [1, 1]},
            "points": 5,
            "weights": {"kind": "gevrey", "s": 1},
            "B": 0.0,
            "R": 2.0,
        })
        result = run_experiment(ctx)
        self.assertTrue(result.passed, [check.to_dict() for check in result.checks])
        self.assertIn("excision.csv", result.artifacts)

    def test_antiwick_needs_radial_symbol(self):
        ctx = self.context({
            "experiment": "spectrum",
            "symbol": {"family": "polynomial", "terms": [
                {"powers": [2, 0], "coefficient": 1}, {"powers": [0, 2], "coefficient": 1}]},
            "N": 10,
            "quantization": "antiwick",
        })
        with self.assertRaises(CapabilityError):
            compute_spectrum(ctx.config["symbol"], 10, "antiwick", ctx)


if __name__ == "__main__":
    unittest.main()
