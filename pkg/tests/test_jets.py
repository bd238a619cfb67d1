import math
import unittest

import numpy as np

from weyllab.errors import AccuracyError
from weyllab.spectral.jet_helper import Jet, univariate_taylor
from weyllab.spectral.quadrature_helper import QuadratureSpec, integrate_panels, panel_nodes, sphere_rule


class JetArithmeticTests(unittest.TestCase):
    def test_product_partials(self):
        x = Jet.variable(0, 2.0, 2, 2)
        y = Jet.variable(1, 3.0, 2, 2)
        f = x * y + 1
        self.assertEqual(f.value, 7.0)
        self.assertEqual(f.partial((1, 0)), 3.0)
        self.assertEqual(f.partial((0, 1)), 2.0)
        self.assertEqual(f.partial((1, 1)), 1.0)
        self.assertEqual(f.partial((2, 0)), 0.0)

    def test_elementary_functions(self):
        x = Jet.variable(0, 0.5, 1, 4)
        np.testing.assert_allclose((x.exp()).partials()[(3,)], math.exp(0.5))
        log = Jet.variable(0, 2.0, 1, 3).log()
        self.assertAlmostEqual(log.partial((2,)), -0.25)
        self.assertAlmostEqual(log.partial((3,)), 0.25)
        root = Jet.variable(0, 4.0, 1, 2).sqrt()
        self.assertAlmostEqual(root.partial((1,)), 0.25)
        self.assertAlmostEqual(root.partial((2,)), -1.0 / 32.0)

    def test_division_and_powers(self):
        x = Jet.variable(0, 1.0, 1, 3)
        ratio = x / (x + 1)
        # x/(1+x) = 1 − 1/(1+x)
        np.testing.assert_allclose(univariate_taylor(ratio), [0.5, 0.25, -0.125, 0.0625])
        cube = x ** 3
        np.testing.assert_allclose(cube.coeffs, (x * x * x).coeffs)
        np.testing.assert_allclose((2.0 / x).coeffs, [2.0, -2.0, 2.0, -2.0])

    def test_derivative_and_embedding(self):
        x = Jet.variable(0, 1.5, 2, 3)
        y = Jet.variable(1, -2.0, 2, 3)
        f = x * x * y
        df = f.derivative((1, 0))
        self.assertEqual(df.order, 2)
        self.assertAlmostEqual(df.value, 2 * 1.5 * -2.0)
        self.assertAlmostEqual(df.partial((0, 1)), 3.0)
        g = f.embed(4, [0, 2])
        self.assertEqual(g.n, 4)
        self.assertAlmostEqual(g.partial((2, 0, 1, 0)), 2.0)
        self.assertEqual(g.coefficient((0, 1, 0, 0)), 0.0)

    def test_from_partials_round_trip(self):
        partials = {(0, 0): 1.0, (1, 0): 2.0, (0, 2): 6.0}
        jet = Jet.from_partials(partials, 2, 2)
        self.assertAlmostEqual(jet.coefficient((0, 2)), 3.0)
        for alpha, value in partials.items():
            self.assertAlmostEqual(jet.partial(alpha), value)

    def test_complex_values(self):
        x = Jet.variable(0, 1.0 + 1.0j, 1, 2)
        self.assertFalse(x.is_real)
        self.assertAlmostEqual(x.reciprocal().value, 0.5 - 0.5j)
        self.assertTrue(Jet.variable(0, 1.0, 1, 2).is_real)

    def test_order_limits(self):
        x = Jet.variable(0, 1.0, 1, 2)
        with self.assertRaises(IndexError):
            x.partial((3,))
        with self.assertRaises(ValueError):
            x.truncate(3)
        with self.assertRaises(ValueError):
            univariate_taylor(Jet.variable(0, 1.0, 2, 2))
        self.assertEqual((x + Jet.variable(0, 1.0, 1, 4)).order, 2)


class QuadratureTests(unittest.TestCase):
    def test_panel_nodes_integrate_polynomials(self):
        points, weights = panel_nodes(0.0, 2.0, 3, 5)
        self.assertEqual(points.size, 15)
        self.assertAlmostEqual(float(weights.sum()), 2.0, places=14)
        self.assertAlmostEqual(float(points ** 9 @ weights), 2.0 ** 10 / 10, places=10)

    def test_integrate_panels(self):
        value = integrate_panels(np.exp, 0.0, 1.0, 1, QuadratureSpec())
        self.assertAlmostEqual(float(value), math.e - 1.0, places=13)
        both = integrate_panels(lambda x: np.stack([np.sin(x), np.cos(x)]), 0.0, math.pi, 2, QuadratureSpec())
        np.testing.assert_allclose(both, [2.0, 0.0], atol=1e-13)

    def test_non_convergence(self):
        spec = QuadratureSpec(rtol=1e-14, max_refinements=1)
        with self.assertRaises(AccuracyError):
            integrate_panels(lambda x: np.sign(x - 1.0 / 3.0), 0.0, 1.0, 1, spec)

    def test_sphere_rule(self):
        vectors, weights = sphere_rule(1, 24)
        self.assertAlmostEqual(float(weights.sum()), 2 * math.pi, places=12)
        vectors, weights = sphere_rule(2, 8)
        self.assertEqual(vectors.shape[1], 4)
        np.testing.assert_allclose(np.linalg.norm(vectors, axis=1), 1.0, atol=1e-14)
        area = 2 * math.pi ** 2
        self.assertAlmostEqual(float(weights.sum()), area, places=12)
        for k in range(4):
            self.assertAlmostEqual(float(vectors[:, k] ** 2 @ weights), area / 4, places=12)


if __name__ == "__main__":
    unittest.main()
