import os
import unittest

import numpy as np
from nose.tools import raises
from nose.plugins.attrib import attr

from ua_matrix_solvents import polynomial
from ua_matrix_solvents import report_tools


POLYS = dict()


def setUpModule():
    fixtures = os.path.join(os.path.split(__file__)[0], "fixtures")
    for name in ("example3", "example4", "example6", "singular"):
        POLYS[name] = report_tools.parse_input(
            os.path.join(fixtures, f"{name}.json"))

    assert len(POLYS) == 4


def _random_polynomial(rng, n, k):
    return polynomial.make_polynomial([
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        for _ in range(k + 1)])


class TestMatrixPolynomial(unittest.TestCase):
    def test_dimensions(self):
        poly = POLYS["example6"]
        assert (poly.n, poly.m, poly.k) == (3, 3, 2)

    def test_make_polynomial_trims_zero_leading_coefficients(self):
        poly = polynomial.make_polynomial(
            [np.eye(2), 2 * np.eye(2), np.zeros((2, 2))])
        assert poly.k == 1

    def test_coefficients_are_read_only(self):
        poly = polynomial.make_polynomial([np.eye(2), np.eye(2)])
        assert not poly.coeffs[0].flags.writeable

    @raises(polynomial.ZeroPolynomialInput)
    def test_zero_polynomial(self):
        polynomial.make_polynomial([np.zeros((2, 2)), np.zeros((2, 2))])

    @raises(polynomial.DimensionMismatch)
    def test_mismatched_coefficients(self):
        polynomial.make_polynomial([np.eye(2), np.eye(3)])

    def test_evaluation_vanishes_on_eigenvector(self):
        value = POLYS["example4"](2.0) @ np.array([1, 1])
        assert np.allclose(value, 0)

    def test_reverse(self):
        poly = POLYS["example4"]
        reversed_poly = polynomial.reverse(poly)
        assert np.allclose(reversed_poly.coeffs[0], poly.coeffs[2])
        assert np.allclose(reversed_poly.coeffs[2], poly.coeffs[0])

    def test_reverse_drops_degree_when_constant_term_is_zero(self):
        poly = polynomial.make_polynomial(
            [np.zeros((2, 2)), np.eye(2), np.eye(2)])
        assert polynomial.reverse(poly).k == 1

    def test_reverse_evaluates_as_scaled_inverse_point(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            poly = _random_polynomial(rng, 2, 3)
            reversed_poly = polynomial.reverse(poly)
            for point in (0.4 - 0.3j, 2.0, -1.5j):
                assert np.allclose(
                    reversed_poly(point),
                    point ** poly.k * poly(1 / point))

    def test_taylor_expansion_reproduces_polynomial(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            poly = _random_polynomial(rng, 3, 3)
            center = complex(*rng.standard_normal(2))
            point = complex(*rng.standard_normal(2))
            expansion = sum(
                polynomial.taylor_coeff(poly, center, order)
                * (point - center) ** order
                for order in range(poly.k + 1))
            assert np.allclose(expansion, poly(point))

    def test_taylor_coefficients(self):
        poly = POLYS["example4"]
        A0, A1, A2 = poly.coeffs
        assert np.allclose(polynomial.taylor_coeff(poly, 2, 0), poly(2))
        assert np.allclose(
            polynomial.taylor_coeff(poly, 2, 1), A1 + 4 * A2)
        assert np.allclose(polynomial.taylor_coeff(poly, 2, 2), A2)
        assert not np.any(polynomial.taylor_coeff(poly, 2, 3))


class TestDeterminant(unittest.TestCase):
    @attr("determinant")
    def test_determinant_polynomial(self):
        # det P = (8 - 2 lambda^2) / 7
        det_poly = polynomial.determinant_polynomial(POLYS["example4"])
        assert det_poly.degree == 2
        assert np.allclose(
            det_poly.coefficients, [8 / 7, 0, -2 / 7], atol=1e-10)

    @attr("determinant")
    def test_determinant_matches_pointwise_det(self):
        poly = POLYS["example6"]
        det_poly = polynomial.determinant_polynomial(poly)
        for point in (0.3, -1.2 + 0.5j, 2.5j):
            assert np.isclose(det_poly(point), np.linalg.det(poly(point)))

    @attr("determinant")
    def test_singular_determinant_is_zero(self):
        assert polynomial.determinant_polynomial(POLYS["singular"]).is_zero

    @attr("determinant")
    @raises(polynomial.NotSquare)
    def test_determinant_needs_square(self):
        polynomial.determinant_polynomial(
            polynomial.make_polynomial([np.ones((2, 3))]))


class TestRegularity(unittest.TestCase):
    @attr("regularity")
    def test_regularity_with_infinite_eigenvalues(self):
        report = polynomial.regularity(POLYS["example4"])
        assert report.regular
        assert report.M == 2
        assert report.infinite_mult_total == 2
        assert not report.essentially_monic
        assert report.essentially_comonic

    @attr("regularity")
    def test_regularity_of_pencil(self):
        report = polynomial.regularity(POLYS["example3"])
        assert report.M == 1
        assert report.infinite_mult_total == 1

    @attr("regularity")
    def test_regularity_counts(self):
        report = polynomial.regularity(POLYS["example6"])
        assert report.M == 3
        assert report.infinite_mult_total == 3
        assert not report.essentially_comonic

    @attr("regularity")
    def test_singular_polynomial(self):
        report = polynomial.regularity(POLYS["singular"])
        assert not report.regular
        assert report.M == 0

    @attr("regularity")
    @raises(polynomial.NotRegular)
    def test_require_regular(self):
        polynomial.require_regular(POLYS["singular"])
