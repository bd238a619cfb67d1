import importlib.util
import json
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from weyllab import config_helper
from weyllab.errors import ConfigError, SingularityError
from weyllab.experiment_helper import ExperimentResult


ROOT_DIR = Path(__file__).resolve().parents[1]


def load_cli_module():
    spec = importlib.util.spec_from_file_location(
        "weyl_lab_cli", ROOT_DIR / "weyl-lab.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def default_lab_config():
    return json.loads((ROOT_DIR / "assist" / "config.json").read_text(encoding="utf-8"))


class ArgumentTests(unittest.TestCase):
    def setUp(self):
        self.cli = load_cli_module()

    def test_run_requires_config(self):
        with self.assertRaises(SystemExit):
            self.cli.parse_arguments(["run"])

    def test_run_options(self):
        args = self.cli.parse_arguments(["run", "-c", "exp.json", "--out", "out", "--threads", "4"])
        self.assertEqual(args.command, "run")
        self.assertEqual(args.config, "exp.json")
        self.assertEqual(args.out, "out")
        self.assertEqual(args.threads, 4)

    def test_threads_must_be_positive(self):
        with self.assertRaises(SystemExit):
            self.cli.parse_arguments(["run", "-c", "exp.json", "--threads", "0"])

    def test_subcommand_is_required(self):
        with self.assertRaises(SystemExit):
            self.cli.parse_arguments([])

    def test_output_dir_precedence(self):
        experiment_config = mock.Mock(experiment="spectrum")
        experiment_config.get.return_value = "from-config"
        args = self.cli.parse_arguments(["run", "-c", "exp.json", "-o", "from-cli"])
        self.assertEqual(self.cli.resolve_output_dir(args, experiment_config), "from-cli")
        args = self.cli.parse_arguments(["run", "-c", "exp.json"])
        self.assertEqual(self.cli.resolve_output_dir(args, experiment_config), "from-config")
        experiment_config.get.return_value = None
        self.assertTrue(self.cli.resolve_output_dir(args, experiment_config).endswith(
            str(Path("output") / "spectrum")))


class LabConfigTests(unittest.TestCase):
    def test_default_config_values(self):
        config = config_helper.load_lab_config(config_path=None)
        options = config_helper.resolve_runtime_options(config)

        self.assertFalse(options["disable_tqdm"])
        self.assertIsNone(options["max_workers"])
        self.assertEqual(options["jet_order_cap"], 12)
        quad = config_helper.resolve_quadrature_spec(config)
        self.assertEqual(quad.nodes_per_panel, 20)
        self.assertEqual(quad.sphere_order, 24)
        self.assertEqual(config["tolerances"]["counting_ratio"], 0.005)
        self.assertEqual(config["tolerances"]["mehler_ratio_high"], 24.0)

    def test_default_config_load_failure_raises_error(self):
        with mock.patch.object(
                config_helper, "read_data_from_json", side_effect=OSError("missing")):
            with self.assertRaisesRegex(RuntimeError, "默认配置文件加载失败"):
                config_helper.load_lab_config(config_path=None)

    def test_invalid_default_config_raises_error(self):
        invalid_default_config = default_lab_config()
        invalid_default_config["quadrature"]["sphere_order"] = 0
        with mock.patch.object(
                config_helper, "read_data_from_json",
                return_value=invalid_default_config):
            with self.assertRaisesRegex(RuntimeError, "quadrature.sphere_order"):
                config_helper.load_lab_config(config_path=None)

    def test_default_config_rejects_unknown_keys(self):
        invalid_default_config = default_lab_config()
        invalid_default_config["tolerances"]["unknown"] = 1.0
        with self.assertRaisesRegex(ValueError, "tolerances.unknown"):
            config_helper.validate_default_config(invalid_default_config)

    def test_missing_external_config_uses_default_config(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            missing_config = str(Path(tmpdir) / "missing.json")
            config = config_helper.load_lab_config(config_path=missing_config)

        self.assertEqual(config, default_lab_config())

    def test_external_config_overrides_default_fields(self):
        external_config = {
            "runtime": {"disable_tqdm": True, "max_workers": 2},
            "quadrature": {"sphere_order": 12, "rtol": 1e-8},
            "tolerances": {"counting_ratio": 0.05},
        }
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "config.json"
            config_path.write_text(json.dumps(external_config), encoding="utf-8")
            config = config_helper.load_lab_config(config_path=str(config_path))

        options = config_helper.resolve_runtime_options(config)
        self.assertTrue(options["disable_tqdm"])
        self.assertEqual(options["max_workers"], 2)
        self.assertEqual(config_helper.resolve_runtime_options(config, threads=5)["max_workers"], 5)
        quad = config_helper.resolve_quadrature_spec(config)
        self.assertEqual(quad.sphere_order, 12)
        self.assertEqual(quad.rtol, 1e-8)
        self.assertEqual(config["tolerances"]["counting_ratio"], 0.05)
        self.assertEqual(config["tolerances"]["log_slope"], 0.1)

    def test_invalid_external_config_fields_fallback_individually(self):
        external_config = {
            "runtime": {"disable_tqdm": "true", "max_workers": 0, "unknown": "ignored"},
            "quadrature": {"tail_log_threshold": 5.0, "nodes_per_panel": 2.5},
            "tolerances": "strict",
            "unknown_root": {},
        }
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "config.json"
            config_path.write_text(json.dumps(external_config), encoding="utf-8")
            config = config_helper.load_lab_config(config_path=str(config_path))

        defaults = default_lab_config()
        self.assertFalse(config["runtime"]["disable_tqdm"])
        self.assertIsNone(config["runtime"]["max_workers"])
        self.assertEqual(config["quadrature"]["tail_log_threshold"], -37.0)
        self.assertEqual(config["quadrature"]["nodes_per_panel"], 20)
        self.assertEqual(config["tolerances"], defaults["tolerances"])
        self.assertNotIn("unknown", config["runtime"])
        self.assertNotIn("unknown_root", config)

    def test_unreadable_external_config_uses_default_config(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            config_path = Path(tmpdir) / "config.json"
            config_path.write_text("{not json", encoding="utf-8")
            config = config_helper.load_lab_config(config_path=str(config_path))
        self.assertEqual(config, default_lab_config())

    def test_experiment_tolerances_override_lab_tolerances(self):
        tolerances = config_helper.resolve_tolerances(default_lab_config(), {"karamata": 0.2})
        self.assertEqual(tolerances["karamata"], 0.2)
        self.assertEqual(tolerances["trust"], 1e-6)


class MainTests(unittest.TestCase):
    def setUp(self):
        self.cli = load_cli_module()
        patcher = mock.patch.object(self.cli, "setup_logging")
        patcher.start()
        self.addCleanup(patcher.stop)
        self.tmpdir = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmpdir.cleanup)

    def write_config(self, raw):
        path = Path(self.tmpdir.name) / "experiment.json"
        path.write_text(json.dumps(raw), encoding="utf-8")
        return str(path)

    def run_with_result(self, passed):
        result = ExperimentResult("mehler_check")
        result.check_at_most("demo", 0.0 if passed else 2.0, 1.0)
        config_path = self.write_config({"experiment": "mehler_check"})
        with mock.patch.object(self.cli, "run_experiment", return_value=result) as run:
            code = self.cli.main(["run", "-c", config_path, "-o", self.tmpdir.name, "-t", "3"])
        return code, run.call_args.args[0]

    def test_exit_code_for_passed_and_failed_checks(self):
        code, context = self.run_with_result(True)
        self.assertEqual(code, 0)
        self.assertEqual(context.max_workers, 3)
        self.assertEqual(context.out_dir, self.tmpdir.name)
        self.assertEqual(context.config.experiment, "mehler_check")
        code, _ = self.run_with_result(False)
        self.assertEqual(code, 1)

    def test_config_errors_exit_with_two(self):
        missing = str(Path(self.tmpdir.name) / "missing.json")
        self.assertEqual(self.cli.main(["run", "-c", missing]), 2)
        bad = self.write_config({"experiment": "spectrum", "N": 10})
        self.assertEqual(self.cli.main(["validate", "-c", bad]), 2)
        with mock.patch.object(self.cli, "load_lab_config", side_effect=RuntimeError("broken")):
            self.assertEqual(self.cli.main(["list-experiments"]), 2)

    def test_numerical_errors_exit_with_three(self):
        config_path = self.write_config({"experiment": "mehler_check"})
        with mock.patch.object(self.cli, "run_experiment", side_effect=SingularityError("a(w) + z = 0")):
            self.assertEqual(self.cli.main(["run", "-c", config_path]), 3)

    def test_library_value_errors_exit_with_three(self):
        config_path = self.write_config({"experiment": "mehler_check"})
        for error in (ValueError("f(a) and f(b) must have different signs"), ZeroDivisionError("float division")):
            with mock.patch.object(self.cli, "run_experiment", side_effect=error):
                with self.assertLogs(level="ERROR") as logs:
                    self.assertEqual(self.cli.main(["run", "-c", config_path]), 3)
            self.assertIn(type(error).__name__, logs.output[0])

    def test_validate_only(self):
        config_path = self.write_config({"experiment": "mehler_check", "J": 2})
        with mock.patch.object(self.cli, "run_experiment") as run:
            self.assertEqual(self.cli.main(["validate", "-c", config_path]), 0)
        run.assert_not_called()

    def test_list_experiments(self):
        with mock.patch("builtins.print") as printed:
            self.assertEqual(self.cli.main(["list-experiments"]), 0)
        names = [call.args[0].split("\t")[0] for call in printed.call_args_list]
        self.assertEqual(names, sorted(names))
        self.assertIn("heat_check", names)

    def test_validate_config_raises_config_error(self):
        config_path = self.write_config({"experiment": "spectrum", "symbol": {"family": "cubic"}, "N": 5})
        catalogue = self.cli.load_experiment_catalogue()
        with self.assertRaises(ConfigError):
            self.cli.validate_config(config_path, default_lab_config(), catalogue)


if __name__ == "__main__":
    unittest.main()
