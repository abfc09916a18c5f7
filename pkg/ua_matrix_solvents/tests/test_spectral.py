import os
import unittest
from unittest import mock

import numpy as np
from nose.tools import raises
from nose.plugins.attrib import attr

from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import linearize
from ua_matrix_solvents import spectral
from ua_matrix_solvents import report_tools
from ua_matrix_solvents.spectral import StandardPair


POLYS = dict()
PAIRS = dict()


def setUpModule():
    fixtures = os.path.join(os.path.split(__file__)[0], "fixtures")
    for name in ("example4", "example5", "example6"):
        POLYS[name] = report_tools.parse_input(
            os.path.join(fixtures, f"{name}.json"))
    for name in ("example4_pair", "example5_pair", "example5_pair_inverted",
                 "example6_pair"):
        document = report_tools.load_document(
            os.path.join(fixtures, f"{name}.json"))
        PAIRS[name], _ = report_tools.pair_from_document(
            document, where=name)

    assert len(POLYS) == 3
    assert len(PAIRS) == 4


def _diagonal_polynomial(*diagonals):
    """Diagonal P from the lowest-first scalar coefficients of each entry."""
    degree = max(len(entries) for entries in diagonals)
    return polynomial.make_polynomial([
        np.diag([entries[i] if i < len(entries) else 0.0
                 for entries in diagonals])
        for i in range(degree)])


class TestJordanChains(unittest.TestCase):
    @attr("chains")
    def test_simple_eigenvalue(self):
        chains = spectral.jordan_chains_at(POLYS["example4"], 2)
        assert len(chains) == 1
        assert chains[0].length == 1
        assert np.allclose(chains[0].vectors[:, 0], [2 ** -0.5, 2 ** -0.5])

    @attr("chains")
    def test_chain_at_infinity(self):
        poly = POLYS["example6"]
        chains = spectral.jordan_chains_at(poly, spectral.INF)
        assert [chain.length for chain in chains] == [3]
        A0, A1, A2 = poly.coeffs
        v1, v2, v3 = chains[0].vectors.T
        assert np.allclose(A2 @ v1, 0)
        assert np.allclose(A1 @ v1 + A2 @ v2, 0)
        assert np.allclose(A0 @ v1 + A1 @ v2 + A2 @ v3, 0)
        assert np.isclose(np.linalg.norm(v1), 1)

    @attr("chains")
    def test_semisimple_double_eigenvalue(self):
        # lambda (lambda - 1) I has two chains at 0 and two at 1.
        poly = polynomial.make_polynomial(
            [np.zeros((2, 2)), -np.eye(2), np.eye(2)])
        for point in (0, 1):
            chains = spectral.jordan_chains_at(poly, point)
            assert [chain.length for chain in chains] == [1, 1]

    @attr("chains")
    def test_first_component_is_real_positive(self):
        chains = spectral.jordan_chains_at(POLYS["example6"], 3)
        head = chains[0].vectors[:, 0]
        first = head[np.argmax(np.abs(head) > 1e-8)]
        assert abs(first.imag) < 1e-12
        assert first.real > 0

    def test_evaluation_scale(self):
        poly = polynomial.make_polynomial(
            [np.eye(2), np.zeros((2, 2)), 2 * np.eye(2)])
        norm = np.sqrt(2)
        assert np.isclose(spectral.evaluation_scale(poly, 0.5), 3 * norm)
        assert np.isclose(spectral.evaluation_scale(poly, 3j), 19 * norm)

    @attr("chains")
    def test_repeated_semisimple_eigenvalue(self):
        poly = polynomial.make_polynomial([-3 * np.eye(3), np.eye(3)])
        chains = spectral.jordan_chains_at(poly, 3)
        assert [chain.length for chain in chains] == [1, 1, 1]
        heads = np.hstack([chain.vectors for chain in chains])
        assert linalg_tools.numerical_rank(heads) == 3

    @attr("chains")
    def test_chains_at_derogatory_eigenvalue(self):
        # diag((lambda - 2)^2, lambda - 2)
        poly = _diagonal_polynomial([4.0, -4.0, 1.0], [-2.0, 1.0])
        chains = spectral.jordan_chains_at(poly, 2)
        assert [chain.length for chain in chains] == [2, 1]
        head, tail = chains[0].vectors.T
        assert np.allclose(poly(2) @ head, 0)
        derivative = polynomial.taylor_coeff(poly, 2, 1)
        assert np.allclose(derivative @ head + poly(2) @ tail, 0)

    @attr("chains")
    def test_chains_stay_bounded_at_computed_root(self):
        # diag(lambda^2 - lambda + 1/4, lambda - 1/2)
        poly = _diagonal_polynomial([0.25, -1.0, 1.0], [-0.5, 1.0])
        (root,) = linalg_tools.poly_roots(
            polynomial.regularity(poly).det_poly)
        assert root.multiplicity == 3
        chains = spectral.jordan_chains_at(
            poly, root.value, multiplicity=root.multiplicity)
        assert [chain.length for chain in chains] == [2, 1]
        for chain in chains:
            assert np.max(np.abs(chain.vectors)) < 10

    @attr("chains")
    def test_double_eigenvalue_with_two_long_chains(self):
        poly = polynomial.make_polynomial(
            [np.eye(2), -2 * np.eye(2), np.eye(2)])
        chains = spectral.jordan_chains_at(poly, 1)
        assert [chain.length for chain in chains] == [2, 2]

    @attr("chains")
    @raises(spectral.NotAnEigenvalue)
    def test_not_an_eigenvalue(self):
        spectral.jordan_chains_at(POLYS["example4"], 5)


class TestStandardPair(unittest.TestCase):
    @attr("pair")
    def test_maximal_standard_pair(self):
        poly = POLYS["example4"]
        pair = spectral.maximal_standard_pair(poly)
        assert (pair.p, pair.q) == (2, 2)
        assert np.allclose(np.diag(pair.T), [2, -2])
        assert np.allclose(pair.Z, [[0, 1], [0, 0]])
        assert len(pair.blocks) == 3
        assert spectral.verify_standard_pair(poly, pair).passed()

    @attr("pair")
    def test_maximal_standard_pair_with_long_infinite_chain(self):
        poly = POLYS["example6"]
        pair = spectral.maximal_standard_pair(poly)
        assert (pair.p, pair.q) == (3, 3)
        assert [block.size for block in pair.side_blocks("Z")] == [3]
        assert spectral.verify_standard_pair(poly, pair).passed()

    @attr("pair")
    def test_maximal_pairs_at_repeated_eigenvalues(self):
        cases = (
            (polynomial.make_polynomial([-2 * np.eye(3), np.eye(3)]), 3, 0),
            (polynomial.make_polynomial(
                [np.eye(2), -2 * np.eye(2), np.eye(2)]), 4, 0),
            (_diagonal_polynomial([4.0, -4.0, 1.0], [-2.0, 1.0]), 3, 1),
            (_diagonal_polynomial([0.25, -1.0, 1.0], [-0.5, 1.0]), 3, 1))
        for poly, p, q in cases:
            pair = spectral.maximal_standard_pair(poly)
            assert (pair.p, pair.q) == (p, q)
            check = spectral.verify_standard_pair(poly, pair)
            assert check.passed()
            assert check.rank == poly.n * poly.k

    @attr("pair")
    @raises(linalg_tools.NoConvergence)
    def test_failed_pair_check_raises(self):
        failed = spectral.PairReport(
            residual_finite=1.0, residual_infinite=0.0, rank=3,
            rank_ok=False)
        with mock.patch.object(
                spectral, "verify_standard_pair", return_value=failed):
            spectral.maximal_standard_pair(POLYS["example4"])

    @attr("pair")
    def test_printed_pairs_are_standard(self):
        for poly_name, pair_name in (
                ("example4", "example4_pair"),
                ("example5", "example5_pair"),
                ("example5", "example5_pair_inverted"),
                ("example6", "example6_pair")):
            check = spectral.verify_standard_pair(
                POLYS[poly_name], PAIRS[pair_name])
            assert check.passed(), pair_name
            assert check.rank == POLYS[poly_name].n * POLYS[poly_name].k

    @attr("pair")
    def test_wrong_eigenvalue_fails_the_check(self):
        pair = PAIRS["example4_pair"]
        wrong = StandardPair.from_matrices(
            pair.X, pair.Y, np.diag([3.0, -2.0]), pair.Z)
        check = spectral.verify_standard_pair(POLYS["example4"], wrong)
        assert not check.passed()
        assert check.residual_infinite < 1e-12

    @attr("pair")
    def test_from_matrices_detects_blocks(self):
        pair = PAIRS["example6_pair"]
        assert [(block.side, block.size) for block in pair.blocks] == [
            ("T", 1), ("T", 1), ("T", 1), ("Z", 3)]
        assert [block.label for block in pair.blocks] == [0, 1, 2, 3]

    @attr("pair")
    @raises(polynomial.DimensionMismatch)
    def test_from_matrices_checks_dimensions(self):
        StandardPair.from_matrices(
            np.eye(2), np.zeros((3, 0)), np.eye(2), np.zeros((0, 0)))

    @attr("pair")
    def test_controllability_shape(self):
        matrix = spectral.controllability(PAIRS["example6_pair"], 2)
        assert matrix.Q.shape == (6, 6)
        assert matrix.depth == 2


class TestSpectralInversion(unittest.TestCase):
    @attr("inversion")
    def test_inversion_of_pencil_pair(self):
        inverted = spectral.spectral_inversion(PAIRS["example5_pair"], [1])
        expected = PAIRS["example5_pair_inverted"]
        for name in ("X", "T", "Y", "Z"):
            assert np.allclose(
                getattr(inverted, name), getattr(expected, name)), name

    @attr("inversion")
    def test_inversion_back_to_finite_side(self):
        restored = spectral.spectral_inversion(
            PAIRS["example5_pair_inverted"], [1], to_side="T")
        expected = PAIRS["example5_pair"]
        for name in ("X", "T", "Y", "Z"):
            assert np.allclose(
                getattr(restored, name), getattr(expected, name)), name

    @attr("inversion")
    def test_inversion_of_every_finite_eigenvalue(self):
        poly = POLYS["example4"]
        inverted = spectral.spectral_inversion(
            PAIRS["example4_pair"], [2, -2])
        assert inverted.X.shape == (2, 0)
        assert np.allclose(inverted.Y, [[1, 1, 1, 1], [1, 8, 1, 2]])
        expected_Z = linalg_tools.direct_sum(
            [np.diag([0.5, -0.5]), [[0, 1], [0, 0]]])
        assert np.allclose(inverted.Z, expected_Z)
        assert spectral.verify_standard_pair(poly, inverted).passed()

    @attr("inversion")
    def test_inversion_keeps_labels(self):
        pair = PAIRS["example4_pair"]
        inverted = spectral.spectral_inversion(pair, [-2])
        assert sorted(block.label for block in inverted.blocks) == [0, 1, 2]
        moved = inverted.block(1)
        assert moved.side == "Z"
        assert np.isclose(moved.eigenvalue, -0.5)
        assert inverted.block(0).side == "T"

    @attr("inversion")
    @raises(spectral.ZeroEigenvalueInversion)
    def test_zero_cannot_be_inverted(self):
        spectral.spectral_inversion(PAIRS["example5_pair"], [0])

    @attr("inversion")
    @raises(spectral.EigenvalueNotPresent)
    def test_missing_eigenvalue(self):
        spectral.spectral_inversion(PAIRS["example5_pair"], [5])


class TestPairOperations(unittest.TestCase):
    @attr("merge")
    def test_merge_finite_and_infinite_parts(self):
        pair = PAIRS["example4_pair"]
        finite = StandardPair.from_matrices(
            pair.X, np.zeros((2, 0)), pair.T, np.zeros((0, 0)))
        infinite = StandardPair.from_matrices(
            np.zeros((2, 0)), pair.Y, np.zeros((0, 0)), pair.Z)
        merged, rank_ok = spectral.merge_pairs([finite, infinite], 2)
        assert rank_ok
        assert np.allclose(merged.X, pair.X)
        assert np.allclose(merged.Z, pair.Z)
        assert spectral.verify_standard_pair(
            POLYS["example4"], merged).passed()

    @attr("merge")
    def test_merge_detects_dependent_chains(self):
        pair = PAIRS["example4_pair"]
        _, rank_ok = spectral.merge_pairs([pair, pair], 2)
        assert not rank_ok

    @attr("reconstruct")
    def test_reconstruct_comonic(self):
        poly = POLYS["example4"]
        rebuilt = spectral.reconstruct_from_pair(PAIRS["example4_pair"], 2, 2)
        scale = np.linalg.inv(poly.coeffs[0])
        for rebuilt_coeff, coeff in zip(rebuilt.coeffs, poly.coeffs):
            assert np.allclose(rebuilt_coeff, scale @ coeff)

    @attr("reconstruct")
    def test_reconstruct_keeps_spectral_data(self):
        rebuilt = spectral.reconstruct_from_pair(PAIRS["example6_pair"], 3, 2)
        assert linearize.polynomial_spectral_data(rebuilt).matches(
            linearize.polynomial_spectral_data(POLYS["example6"]))

    @attr("reconstruct")
    def test_reconstruct_normalization(self):
        # A_0 of Example 4 is invertible: the anchor becomes the identity.
        comonic = spectral.reconstruct_from_pair(PAIRS["example4_pair"], 2, 2)
        assert np.allclose(comonic.coeffs[0], np.eye(2))
        assert np.isclose(np.linalg.norm(comonic.coeffs[0], 2), 1)
        # Neither end of Example 6 is invertible: orthonormal rows remain.
        rebuilt = spectral.reconstruct_from_pair(PAIRS["example6_pair"], 3, 2)
        rows = np.hstack(rebuilt.coeffs)
        assert np.allclose(rows @ rows.conj().T, np.eye(3))
        assert np.isclose(np.linalg.norm(rows, 2), 1)

    @attr("reconstruct")
    @raises(spectral.RankDeficientPair)
    def test_reconstruct_wrong_degree(self):
        spectral.reconstruct_from_pair(PAIRS["example4_pair"], 2, 3)

    @attr("reconstruct")
    @raises(spectral.RankDeficientPair)
    def test_reconstruct_dependent_chains(self):
        pair = PAIRS["example4_pair"]
        dependent = StandardPair.from_matrices(
            np.ones((2, 2)), pair.Y, np.diag([2.0, 2.0]), pair.Z)
        spectral.reconstruct_from_pair(dependent, 2, 2)

    @attr("gauge")
    def test_random_gauges_keep_pairs_standard(self):
        rng = np.random.default_rng(13)
        for poly_name, pair_name in (
                ("example4", "example4_pair"),
                ("example6", "example6_pair")):
            pair = PAIRS[pair_name]
            for _ in range(10):
                G, H = (
                    rng.standard_normal((size, size))
                    + 1j * rng.standard_normal((size, size))
                    + size * np.eye(size)
                    for size in (pair.p, pair.q))
                gauged = spectral.gauge_transform(pair, G, H)
                check = spectral.verify_standard_pair(
                    POLYS[poly_name], gauged)
                assert check.passed(), pair_name

    @attr("gauge")
    def test_gauge_transform_keeps_the_pair_standard(self):
        poly = POLYS["example4"]
        gauged = spectral.gauge_transform(
            PAIRS["example4_pair"],
            np.array([[1.0, 1.0], [0.0, 1.0]]),
            np.array([[2.0, 0.0], [1.0, 1.0]]))
        assert gauged.blocks is None
        assert spectral.verify_standard_pair(poly, gauged).passed()
        recovered = spectral.jordan_normal_pair(gauged)
        assert linearize.pair_spectral_data(recovered).matches(
            linearize.polynomial_spectral_data(poly))
