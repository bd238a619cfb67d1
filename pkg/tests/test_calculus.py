import cmath
import itertools
import math
import unittest

import numpy as np
from scipy.special import roots_hermite

from weyllab.errors import CapabilityError, InputError, PreconditionError, SingularityError
from weyllab.spectral.calculus_helper import (
    anti_wick_coeff,
    anti_wick_preimage,
    anti_wick_term,
    excision,
    excision_cutoff,
    heat_terms,
    layered_sharp_values,
    parametrix_jets,
    parametrix_series,
    parametrix_terms,
    sharp_layer,
    sharp_term,
    single_term_series,
)
from weyllab.spectral.symbols_helper import (
    ExpGevreySymbol,
    PolynomialProfile,
    PolynomialSymbol,
    RadialSymbol,
    SeparableSum,
    ShiftedSymbol,
)
from weyllab.spectral.weights_helper import WeightSequence


def radial(coefficients, d=1):
    return RadialSymbol(PolynomialProfile(coefficients), d)


class SharpProductTests(unittest.TestCase):
    def test_squared_radius_with_itself(self):
        sym = radial([0, 1])
        w = [0.7, -1.3]
        r2 = 0.7 ** 2 + 1.3 ** 2
        self.assertAlmostEqual(sharp_term(sym, sym, 0, w), r2 * r2, places=12)
        self.assertAlmostEqual(sharp_term(sym, sym, 1, w), 0.0, places=12)
        self.assertAlmostEqual(sharp_term(sym, sym, 2, w), -1.0, places=12)

    def test_position_and_momentum_do_not_commute(self):
        x = PolynomialSymbol.coordinate(0)
        xi = PolynomialSymbol.coordinate(1)
        w = [0.4, 2.0]
        self.assertAlmostEqual(sharp_term(x, xi, 1, w), 0.5j, places=14)
        self.assertAlmostEqual(sharp_term(xi, x, 1, w), -0.5j, places=14)
        self.assertAlmostEqual(sharp_term(x, xi, 0, w), 0.8, places=14)

    def test_layered_values_of_term_lists(self):
        sym = radial([0, 1])
        jets = [sym.jet([1.0, 0.5], 3)]
        values = layered_sharp_values(jets, jets, 2)
        self.assertEqual(len(values), 3)
        self.assertAlmostEqual(values[2], -1.0, places=12)

    def test_insufficient_order(self):
        sym = radial([0, 1])
        jet = sym.jet([1.0, 0.0], 1)
        with self.assertRaises(CapabilityError):
            sharp_layer(jet, jet, 2)

    def test_odd_layers_of_a_real_symbol_with_itself_vanish(self):
        rng = np.random.default_rng(11)
        symbols = (PolynomialSymbol({(3, 1): 1.0, (1, 2): 0.5, (0, 4): 1.0}), ExpGevreySymbol(1, 2))
        for sym in symbols:
            for point in rng.uniform(-2, 2, size=(5, 2)):
                values = [sharp_term(sym, sym, j, point) for j in range(5)]
                scale = max(1.0, abs(values[0]))
                for j in (1, 3):
                    self.assertLessEqual(abs(values[j]), 1e-10 * scale)
                for j in (0, 2, 4):
                    self.assertLessEqual(abs(complex(values[j]).imag), 1e-10 * scale)

    def test_symbols_need_a_point(self):
        with self.assertRaises(InputError):
            sharp_term(radial([0, 1]), radial([0, 1]), 1)

    def test_separable_blocks_compose_independently(self):
        sym = SeparableSum([radial([0, 1]), radial([0, 1])])
        # (r1² + r2²)#(r1² + r2²) 的第二层为 −1 −1
        self.assertAlmostEqual(sharp_term(sym, sym, 2, [0.3, 1.1, -0.2, 0.9]), -2.0, places=12)


class ParametrixTests(unittest.TestCase):
    def test_leading_term_is_reciprocal(self):
        self.assertAlmostEqual(parametrix_terms(radial([2, 1]), 1, [0, 0])[0], 0.5)

    def test_first_correction_vanishes_for_scalar_symbols(self):
        rng = np.random.default_rng(3)
        for sym in (radial([2, 1]), ExpGevreySymbol(1, 2), radial([1, 0, 1])):
            for point in rng.uniform(-3, 3, size=(10, 2)):
                q = parametrix_terms(sym, 2, point)
                self.assertLessEqual(abs(q[1]), 1e-12 * max(1.0, abs(q[0])))

    def test_layered_identity_for_truncated_parametrix(self):
        sym = radial([1, 1])
        w = [0.8, -0.6]
        J = 3
        jets = parametrix_jets(sym, J, w, extra_order=J)
        a_jet = sym.jet(w, 2 * J)
        values = layered_sharp_values(jets, [a_jet], J - 1)
        self.assertAlmostEqual(values[0], 1.0, places=12)
        for value in values[1:]:
            self.assertLessEqual(abs(value), 1e-10)

    def test_complex_shift(self):
        sym = radial([0, 1])
        q0 = parametrix_terms(sym, 1, [1.0, 0.0], z=1j)[0]
        self.assertAlmostEqual(q0, 1 / (1 + 1j), places=14)

    def test_leading_term_is_damped_on_the_sector_boundary(self):
        sym = radial([2, 1])
        # a = r² + 2 扫过 a ≈ |z|/√2 的最危险位置
        radii = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, math.sqrt(1000 / math.sqrt(2) - 2), 40.0]
        worst = 0.0
        for modulus in (0.0, 0.5, 1.0, 3.0, 10.0, 100.0, 1000.0):
            for angle in (0.75 * math.pi, -0.75 * math.pi):
                z = cmath.rect(modulus, angle)
                for r in radii:
                    q0 = parametrix_terms(sym, 1, [r, 0.0], z=z)[0]
                    worst = max(worst, abs(q0) * (1 + modulus))
        self.assertLess(worst, 2.0)
        self.assertGreater(worst, 1.0)

    def test_vanishing_denominator(self):
        with self.assertRaises(SingularityError):
            parametrix_terms(radial([0, 1]), 2, [0, 0])
        with self.assertRaises(SingularityError):
            parametrix_terms(radial([0, 1]), 1, [1, 0], z=-1.0)
        with self.assertRaises(InputError):
            parametrix_terms(radial([0, 1]), 0, [1, 0])


class HeatTermTests(unittest.TestCase):
    def setUp(self):
        self.harmonic = radial([0, 1])

    def test_leading_term(self):
        terms = heat_terms(ExpGevreySymbol(1, 2), 1)
        w = [0.5, 1.5]
        expected = math.exp(-0.3 * ExpGevreySymbol(1, 2).value(w))
        self.assertAlmostEqual(terms[0].evaluate(0.3, w), expected, places=14)

    def test_harmonic_first_term_is_zero(self):
        coefficients = heat_terms(self.harmonic, 2)[1].coefficients([1.2, -0.4])
        np.testing.assert_allclose(coefficients, 0.0, atol=1e-12)

    def test_harmonic_second_term(self):
        w = [1.5, 0.5]
        r2 = 2.5
        term = heat_terms(self.harmonic, 3)[2]
        coefficients = term.coefficients(w)
        padded = np.zeros(max(coefficients.size, 4))
        padded[:coefficients.size] = coefficients
        np.testing.assert_allclose(padded[:4], [0.0, 0.0, -0.5, r2 / 3.0], atol=1e-12)
        np.testing.assert_allclose(padded[4:], 0.0, atol=1e-12)
        t = 0.2
        expected = math.exp(-t * r2) * (-t * t / 2 + t ** 3 * r2 / 3)
        self.assertAlmostEqual(term.evaluate(t, w), expected, places=12)

    def test_truncation_matches_mehler_to_fourth_order(self):
        terms = heat_terms(self.harmonic, 3)
        w = [1.0, 0.0]

        def error(t):
            mehler = math.exp(-math.tanh(t)) / math.cosh(t)
            return abs(sum(term.evaluate(t, w) for term in terms) - mehler)

        for t in (0.2, 0.1):
            self.assertTrue(8.0 <= error(t) / error(t / 2) <= 24.0, t)

    def test_limits(self):
        with self.assertRaises(CapabilityError):
            heat_terms(self.harmonic, 7)
        with self.assertRaises(InputError):
            heat_terms(self.harmonic, 0)
        with self.assertRaises(InputError):
            heat_terms(ShiftedSymbol(self.harmonic, 1j), 2)


class AntiWickTests(unittest.TestCase):
    def test_gaussian_moments(self):
        self.assertEqual(anti_wick_coeff((0,), (0,), 1), 1.0)
        self.assertEqual(anti_wick_coeff((1,), (2,), 1), 0.0)
        self.assertAlmostEqual(anti_wick_coeff((2,), (0,), 1), 0.5)
        self.assertAlmostEqual(anti_wick_coeff((2, 2), (0, 0), 2), 0.25)
        with self.assertRaises(InputError):
            anti_wick_coeff((2,), (0,), 2)

    def test_coefficients_match_gauss_hermite_quadrature(self):
        nodes, weights = roots_hermite(20)
        for d in (1, 2):
            grids = np.meshgrid(*([nodes] * (2 * d)), indexing="ij")
            mass = np.ones_like(grids[0])
            for axis_weights in np.meshgrid(*([weights] * (2 * d)), indexing="ij"):
                mass = mass * axis_weights
            for total in range(7):
                for powers in itertools.product(range(total + 1), repeat=2 * d):
                    if sum(powers) != total:
                        continue
                    alpha, beta = powers[:d], powers[d:]
                    # 前 d 个坐标为 η，后 d 个为 y
                    integrand = mass.copy()
                    for grid, k in zip(grids, powers):
                        integrand = integrand * grid ** k
                    expected = float(np.sum(integrand)) / math.pi ** d
                    self.assertLessEqual(abs(anti_wick_coeff(alpha, beta, d) - expected), 1e-10)

    def test_terms_of_squared_radius(self):
        sym = radial([0, 1])
        w = [1.1, -0.3]
        self.assertAlmostEqual(anti_wick_term(sym, 0, 0, w), 1.21 + 0.09)
        self.assertEqual(anti_wick_term(sym, 2, 0, w), 0.0)
        self.assertEqual(anti_wick_term(sym, 1, 2, w), 0.0)
        self.assertAlmostEqual(anti_wick_term(sym, 1, 1, w), 1.0, places=12)

    def test_preimage_of_squared_radius(self):
        sym = radial([0, 1])
        w = [0.5, 2.0]
        self.assertAlmostEqual(anti_wick_preimage(sym, 1, w), 4.25 - 1.0, places=12)
        self.assertAlmostEqual(anti_wick_preimage(sym, 3, w), 4.25 - 1.0, places=12)

    def test_cap(self):
        with self.assertRaises(CapabilityError):
            anti_wick_term(radial([0, 1]), 7, 1, [0, 0])


class ExcisionTests(unittest.TestCase):
    def setUp(self):
        self.sym = radial([2, 1])
        self.weights = WeightSequence.gevrey(1)

    def test_origin_keeps_only_leading_term(self):
        series = parametrix_series(self.sym, self.weights)
        self.assertAlmostEqual(excision(series, 10.0, [0, 0]), 0.5, places=14)

    def test_canonical_inclusion_is_identity(self):
        series = single_term_series(self.sym, self.weights)
        for w in ([0, 0], [5, -3], [30, 0], [-200, 150]):
            self.assertAlmostEqual(excision(series, 10.0, w), self.sym.value(w), places=9)

    def test_locality_far_from_origin(self):
        series = parametrix_series(self.sym, self.weights)
        w = np.array([30.0, 0.0])
        direct = 0.0
        for j in range(series.J_max):
            chi = excision_cutoff(series, j, 10.0, w)
            if chi == 1.0:
                break
            direct += (1.0 - chi) * series.term_value(j, w)
        self.assertAlmostEqual(excision(series, 10.0, w), direct, places=12)
        self.assertAlmostEqual(excision(series, 10.0, w), 1.0 / 902.0, places=12)

    def test_cutoff_plateau_is_scaled_by_radius_and_quotient(self):
        series = parametrix_series(self.sym, self.weights)
        # m_2 = 2：χ_{2,1}(w) = ψ(x/2)ψ(ξ/2)，⟨x/2⟩ ≤ 2 时为 1，⟨x/2⟩ ≥ 3 时为 0
        inner, outer = 2 * math.sqrt(3) - 1e-9, 2 * math.sqrt(8) + 1e-9
        self.assertEqual(excision_cutoff(series, 2, 1.0, np.array([inner, 0.0])), 1.0)
        self.assertEqual(excision_cutoff(series, 2, 1.0, np.array([0.0, outer])), 0.0)
        middle = excision_cutoff(series, 2, 1.0, np.array([4.5, 0.0]))
        self.assertTrue(0.0 < middle < 1.0)
        self.assertEqual(excision_cutoff(series, 0, 1.0, np.array([0.0, 0.0])), 0.0)

    def test_radius_must_exceed_exclusion_parameter(self):
        series = parametrix_series(self.sym, self.weights, B=1.0)
        with self.assertRaises(PreconditionError):
            excision(series, 1.0, [0, 0])
        with self.assertRaises(PreconditionError):
            series.term(3, [0, 0])
        self.assertTrue(cmath.isfinite(series.term_value(3, [10, 0])))


if __name__ == "__main__":
    unittest.main()
