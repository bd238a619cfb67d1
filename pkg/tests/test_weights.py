import math
import unittest

import numpy as np

from weyllab.errors import InputError, RangeError
from weyllab.spectral.weights_helper import (
    WeightSequence,
    associated_function,
    associated_function_log,
    associated_function_values,
    condition_report,
    log_weight_values,
    weight_quotients,
    weight_values,
)


class WeightValueTests(unittest.TestCase):
    def test_gevrey_one_gives_factorials(self):
        np.testing.assert_allclose(
            weight_values(WeightSequence.gevrey(1), 4), [1, 1, 2, 6, 24])

    def test_gevrey_two_gives_squared_factorials(self):
        np.testing.assert_allclose(
            weight_values(WeightSequence.gevrey(2), 3), [1, 1, 4, 36])

    def test_power_sequence_uses_zero_to_zero_as_one(self):
        np.testing.assert_allclose(
            weight_values(WeightSequence.power_sequence(2), 3), [1, 1, 16, 729])

    def test_quotients_start_at_zero(self):
        quotients = weight_quotients(WeightSequence.gevrey(1), 5)
        np.testing.assert_allclose(quotients, [0, 1, 2, 3, 4, 5])

    def test_linear_overflow_points_to_log_accessor(self):
        seq = WeightSequence.gevrey(2)
        with self.assertRaises(RangeError):
            weight_values(seq, 200)
        logs = log_weight_values(seq, 200)
        self.assertAlmostEqual(logs[200], 2 * math.lgamma(201), places=6)

    def test_custom_sequence_validation(self):
        with self.assertRaises(InputError):
            WeightSequence.custom([2.0, 1.0, 1.0])
        with self.assertRaises(InputError):
            WeightSequence.custom([1.0, -1.0])
        with self.assertRaises(InputError):
            log_weight_values(WeightSequence.custom([1.0, 1.0]), 3)
        with self.assertRaises(InputError):
            WeightSequence.gevrey(0)

    def test_builtin_exponent_must_be_finite_and_positive(self):
        for s in (0.0, -1.5, math.inf, math.nan):
            with self.assertRaises(InputError):
                WeightSequence.power_sequence(s)
            with self.assertRaises(InputError):
                WeightSequence.gevrey(s)
        with self.assertRaises(InputError):
            WeightSequence.from_config({"kind": "power_sequence", "s": -2})

    def test_config_round_trip(self):
        seq = WeightSequence.from_config({"kind": "gevrey", "s": 2.0})
        self.assertEqual(seq.to_config(), {"kind": "gevrey", "s": 2.0})
        with self.assertRaises(InputError):
            WeightSequence.from_config({"kind": "unknown"})


class AssociatedFunctionTests(unittest.TestCase):
    def test_gevrey_two_at_one_is_zero(self):
        self.assertEqual(associated_function(WeightSequence.gevrey(2), 1.0), 0.0)

    def test_gevrey_two_at_ten_attains_supremum_at_three(self):
        expected = 3 * math.log(10) - 2 * math.log(6)
        self.assertAlmostEqual(
            associated_function(WeightSequence.gevrey(2), 10.0), expected, places=10)
        self.assertAlmostEqual(expected, 3.3243, places=4)

    def test_non_positive_rho_is_rejected(self):
        with self.assertRaises(InputError):
            associated_function(WeightSequence.gevrey(2), 0.0)
        with self.assertRaises(InputError):
            associated_function(WeightSequence.gevrey(2), -1.0)

    def test_scan_extends_beyond_initial_limit(self):
        seq = WeightSequence.gevrey(1)
        value = associated_function(seq, 500.0, P_max=10)
        p = np.arange(2000)
        brute = np.max(p * math.log(500.0) - log_weight_values(seq, 1999))
        self.assertAlmostEqual(value, brute, places=8)

    def test_non_decreasing_and_zero_near_origin(self):
        seq = WeightSequence.gevrey(2)
        rhos = np.geomspace(0.1, 1e6, 80)
        values = [associated_function(seq, rho) for rho in rhos]
        self.assertTrue(np.all(np.diff(values) >= -1e-12))
        self.assertEqual(values[0], 0.0)

    def test_gevrey_growth_is_root_of_order_s(self):
        seq = WeightSequence.gevrey(2)
        rhos = np.geomspace(10, 1e6, 40)
        scaled = np.array([associated_function(seq, rho) for rho in rhos]) / np.sqrt(rhos)
        self.assertGreater(np.min(scaled), 0.5)
        self.assertLess(np.max(scaled), 2.5)

    def test_power_sequence_two_sided_bound(self):
        for s in (1.5, 2.0, 3.0):
            seq = WeightSequence.power_sequence(s)
            ys = np.geomspace(math.exp(s), 1e6, 50)
            center = s * ys ** (1.0 / s) / math.e
            values = np.array([associated_function(seq, y) for y in ys])
            self.assertTrue(np.all(values >= center - s - 1e-9), s)
            self.assertTrue(np.all(values <= center + s + 1e-9), s)

    def test_log_and_vector_forms_agree(self):
        seq = WeightSequence.gevrey(1.5)
        rhos = np.array([-1.0, 0.5, 3.0, 40.0, 2500.0])
        vector = associated_function_values(seq, rhos)
        self.assertEqual(vector[0], 0.0)
        for rho, value in zip(rhos[1:], vector[1:]):
            self.assertAlmostEqual(value, associated_function(seq, rho), places=9)
            self.assertAlmostEqual(
                value, associated_function_log(seq, math.log(rho)), places=9)

    def test_short_custom_sequence_cannot_confirm_supremum(self):
        seq = WeightSequence.custom([1.0] * 12)
        with self.assertRaises(RangeError):
            associated_function(seq, 2.0)


class ConditionReportTests(unittest.TestCase):
    def test_gevrey_two_satisfies_everything(self):
        report = condition_report(WeightSequence.gevrey(2), 50)
        self.assertTrue(report.m1)
        self.assertTrue(report.m2[0])
        self.assertGreaterEqual(report.m2[1], 1.0)
        self.assertGreaterEqual(report.m2[2], 1.0)
        self.assertTrue(report.m3prime[0])
        self.assertTrue(report.m4)
        self.assertEqual(report.checked_up_to, 50)

    def test_half_gevrey_series_diverges(self):
        report = condition_report(WeightSequence.gevrey(0.5), 50)
        self.assertFalse(report.m3prime[0])

    def test_constant_custom_sequence_fails_m4_at_one(self):
        report = condition_report(WeightSequence.custom([1.0] * 11), 10)
        self.assertTrue(report.m1)
        self.assertFalse(report.m4)
        self.assertEqual(report.m4_first_failure, 1)
        self.assertEqual(report.to_dict()["m4_first_failure"], 1)

    def test_small_scan_is_rejected(self):
        with self.assertRaises(InputError):
            condition_report(WeightSequence.gevrey(2), 2)


if __name__ == "__main__":
    unittest.main()
