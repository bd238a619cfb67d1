import math
import unittest

import numpy as np
from scipy.special import exp1

from weyllab.errors import InputError, ResolutionError
from weyllab.spectral.asymptotics_helper import ComparisonFunction, upper_bound_const
from weyllab.spectral.heat_helper import (
    LOWER_BOUND_SAFETY,
    default_lower_bound_scale,
    heat_trace,
    heat_trace_curve,
    mehler_symbol,
    mehler_trace,
    phase_integral,
    remainder_integral,
    trace_shape_checks,
    verify_heat_formula,
)
from weyllab.spectral.quadrature_helper import QuadratureSpec
from weyllab.spectral.quantize_helper import SpectralData
from weyllab.spectral.symbols_helper import ExpGevreySymbol, PolynomialProfile, RadialSymbol, SeparableSum


def radial(coefficients, d=1):
    return RadialSymbol(PolynomialProfile(coefficients), d)


def harmonic_spectrum(count=4000):
    return SpectralData.from_values(2.0 * np.arange(count) + 1.0, ceiling=math.inf)


class HeatTraceTests(unittest.TestCase):
    def setUp(self):
        self.f_lower = ComparisonFunction.power_log(2)

    def test_single_eigenvalue(self):
        spec = SpectralData.from_values([5.0], ceiling=math.inf)
        trace = heat_trace(spec, 1.0, self.f_lower)
        self.assertAlmostEqual(trace.value, math.exp(-5.0), places=15)
        self.assertEqual(trace.tail_bound, 0.0)

    def test_harmonic_closed_form(self):
        trace = heat_trace(harmonic_spectrum(), 0.5, self.f_lower)
        self.assertAlmostEqual(trace.value, mehler_trace(0.5), places=12)
        self.assertAlmostEqual(trace.value, 0.95923, places=5)
        self.assertLess(trace.tail_bound, 1e-12)

    def test_truncated_spectrum_has_small_tail(self):
        values = 2.0 * np.arange(4000) + 1.0
        spec = SpectralData.from_values(values)
        trace = heat_trace(spec, 0.5, self.f_lower, h=1.0)
        self.assertLess(trace.tail_bound, 1e-12)
        self.assertAlmostEqual(trace.value, mehler_trace(0.5), places=12)

    def test_separable_harmonic(self):
        n = 2.0 * np.arange(200) + 1.0
        spec = SpectralData.from_values(np.add.outer(n, n).ravel(), ceiling=math.inf)
        trace = heat_trace(spec, 0.5, ComparisonFunction.power_log(2, d=2))
        self.assertAlmostEqual(trace.value, mehler_trace(0.5) ** 2, places=9)
        self.assertAlmostEqual(trace.value, 0.92012, places=5)

    def test_large_tail_is_reported(self):
        spec = SpectralData.from_values([1.0, 3.0, 5.0])
        with self.assertRaises(ResolutionError):
            heat_trace(spec, 0.01, self.f_lower, h=1.0)

    def test_time_must_be_positive(self):
        spec = SpectralData.from_values([1.0], ceiling=math.inf)
        for t in (0.0, -1.0):
            with self.assertRaises(InputError):
                heat_trace(spec, t, self.f_lower)

    def test_default_scale(self):
        _, threshold = upper_bound_const(1, 2.0, 1.0, limit_case=True)
        scale = default_lower_bound_scale(self.f_lower, 1.0)
        self.assertGreater(scale, 0.0)
        self.assertAlmostEqual(scale, LOWER_BOUND_SAFETY * threshold)


class TraceShapeTests(unittest.TestCase):
    def test_harmonic_curve(self):
        ts = [0.1, 0.2, 0.4, 0.8, 1.6]
        values = [item.value for item in heat_trace_curve(harmonic_spectrum(), ts, ComparisonFunction.power_log(2))]
        self.assertEqual(len(values), len(ts))
        self.assertEqual(trace_shape_checks(ts, values), {"decreasing": True, "log_convex": True})

    def test_violations(self):
        self.assertFalse(trace_shape_checks([1, 2, 3], [1.0, 1.2, 0.5])["decreasing"])
        self.assertFalse(trace_shape_checks([1, 2, 3], [1.0, 0.9, 0.1])["log_convex"])
        self.assertTrue(trace_shape_checks([3, 1, 2], [0.09, 1.0, 0.1])["log_convex"])


class PhaseIntegralTests(unittest.TestCase):
    def test_gaussian(self):
        self.assertAlmostEqual(phase_integral(radial([0, 1]), 0.1), 5.0, places=8)

    def test_constant_shift(self):
        t = 0.3
        self.assertAlmostEqual(phase_integral(radial([3, 1]), t), math.exp(-3 * t) / (2 * t), places=8)

    def test_separable_product(self):
        sym = SeparableSum([radial([0, 1]), radial([0, 1])])
        self.assertAlmostEqual(phase_integral(sym, 0.5), 1.0, places=8)

    def test_four_dimensional_radial(self):
        # (2π)^{-2} ∫_{R^4} e^{-t r²} = 1/(4t²)
        self.assertAlmostEqual(phase_integral(radial([0, 1], d=2), 0.25), 4.0, places=7)

    def test_exponential_symbol_matches_counting_scale(self):
        sym = ExpGevreySymbol(1, 2)
        for t in (0.05, 0.01):
            value = phase_integral(sym, t)
            self.assertTrue(math.isfinite(value))
            self.assertAlmostEqual(value / (math.log(1 / t) ** 4 / 2), 1.0, delta=0.35)

    def test_time_must_be_positive(self):
        with self.assertRaises(InputError):
            phase_integral(radial([0, 1]), 0.0)


class RemainderIntegralTests(unittest.TestCase):
    def test_closed_form(self):
        expected = math.pi * math.e * float(exp1(1.0))
        self.assertAlmostEqual(remainder_integral(radial([0, 1]), 4.0, 1.0), expected, places=8)
        self.assertAlmostEqual(expected, 1.87349, places=5)

    def test_decreasing_in_time(self):
        values = [remainder_integral(radial([0, 1]), t, 1.0) for t in (1.0, 2.0, 4.0, 8.0)]
        self.assertTrue(all(b < a for a, b in zip(values, values[1:])))

    def test_grows_as_time_vanishes(self):
        sym = radial([0, 1])
        values = [remainder_integral(sym, 2.0 ** -k, 1.0) for k in (2, 4, 8, 12)]
        self.assertTrue(all(b > a for a, b in zip(values, values[1:])))
        self.assertGreater(values[-1], 3.0 * remainder_integral(sym, 0.2, 1.0))

    def test_rho_range(self):
        for rho in (0.0, 1.5):
            with self.assertRaises(InputError):
                remainder_integral(radial([0, 1]), 1.0, rho)


class HeatFormulaTests(unittest.TestCase):
    def test_harmonic(self):
        report = verify_heat_formula(harmonic_spectrum(), radial([0, 1]), [0.2, 0.1, 0.05], 1.0,
                                     ComparisonFunction.power_log(2))
        self.assertTrue(report.passed)
        self.assertEqual([sample.t for sample in report.samples], [0.2, 0.1, 0.05])
        for sample in report.samples:
            self.assertAlmostEqual(sample.residual, sample.t / 12, delta=sample.t ** 3)
        ratios = report.ratios
        self.assertTrue(all(b < a for a, b in zip(ratios, ratios[1:])))
        summary = report.to_dict()
        self.assertTrue(summary["passed"])
        self.assertEqual(len(summary["ratios"]), 3)

    def test_separable_relative_residual_vanishes(self):
        n = 2.0 * np.arange(300) + 1.0
        spec = SpectralData.from_values(np.add.outer(n, n).ravel(), ceiling=math.inf)
        sym = SeparableSum([radial([0, 1]), radial([0, 1])])
        report = verify_heat_formula(spec, sym, [0.4, 0.2, 0.1], 1.0, ComparisonFunction.power_log(2, d=2),
                                     quad=QuadratureSpec(sphere_order=6))
        relative = [sample.residual / sample.phase_integral for sample in report.samples]
        self.assertTrue(all(b < a for a, b in zip(relative, relative[1:])))


class MehlerTests(unittest.TestCase):
    def test_value(self):
        expected = math.exp(-math.tanh(0.1)) / math.cosh(0.1)
        self.assertAlmostEqual(mehler_symbol(0.1, [1.0, 0.0]), expected, places=14)
        self.assertAlmostEqual(mehler_symbol(0.3, [0.0, 0.0]), 1.0 / math.cosh(0.3), places=14)

    def test_small_time_limit(self):
        w = [0.6, -0.8]
        t = 1e-3
        self.assertAlmostEqual(mehler_symbol(t, w), math.exp(-t), delta=t * t)

    def test_domain(self):
        for t in (0.0, math.pi / 2, 2.0):
            with self.assertRaises(InputError):
                mehler_symbol(t, [0.0, 0.0])
        with self.assertRaises(InputError):
            mehler_trace(0.0)


if __name__ == "__main__":
    unittest.main()
