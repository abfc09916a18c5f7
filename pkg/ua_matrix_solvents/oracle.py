"""Independent checks used to validate the solvers.

Nothing here relies on standard pairs: polynomials are planted from known
Jordan data, solvents are checked by substitution and divisibility by a
least squares fit.
"""
import logging
import itertools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev

from ua_matrix_solvents import solver_settings
from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import spectral
from ua_matrix_solvents.factor import SpectrumAvoidanceFailed
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)

# Planted pairs with a worse conditioned Q_k are redrawn.
PLANT_CONDITION = 1e8
PLANT_ATTEMPTS = 50


class PlanInfeasible(Exception):
    """No regular polynomial realizes the planted spectral data."""


class NotSemisimple(Exception):
    """An eigenvalue has a nontrivial Jordan chain."""


@dataclass(frozen=True)
class SpectralPlan():
    """Planted spectral data of an n x n polynomial of degree k.

    finite holds (eigenvalue, chain lengths) pairs and infinite the chain
    lengths at infinity; all lengths together must sum to n k.
    """
    n: int
    k: int
    finite: tuple
    infinite: tuple = ()
    seed: int = solver_settings.DEFAULT_SEED


def _check_plan(plan):
    total = sum(sum(sizes) for _, sizes in plan.finite) + sum(plan.infinite)
    if total != plan.n * plan.k:
        raise PlanInfeasible(
            f"Chain lengths sum to {total}, not n k = {plan.n * plan.k}.")
    for value, sizes in plan.finite:
        if len(sizes) > plan.n:
            raise PlanInfeasible(
                f"Eigenvalue {value} has {len(sizes)} chains but n ="
                f" {plan.n}.")
    if len(plan.infinite) > plan.n:
        raise PlanInfeasible(
            f"Infinity has {len(plan.infinite)} chains but n = {plan.n}.")
    if plan.n < 1 or plan.k < 1:
        raise PlanInfeasible("n and k must be positive.")


def _random_columns(rng, rows, cols):
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols)))


def _plant_side(entries):
    """Jordan blocks for (eigenvalue, size) entries with their offsets."""
    found, blocks = list(), list()
    start = 0
    for value, size in entries:
        found.append((value, start, size))
        blocks.append(spectral.jordan_block(value, size))
        start += size
    return found, blocks


def random_regular(plan, tol=DEFAULT_TOLERANCE):
    """Draw a regular polynomial with the planted spectral data.

    Returns:
        (MatrixPolynomial, StandardPair): P and the planted pair, whose
            blocks follow the order of the plan.

    Raises:
        PlanInfeasible
    """
    _check_plan(plan)
    rng = np.random.default_rng(plan.seed)
    t_found, t_blocks = _plant_side(
        [(complex(value), size) for value, sizes in plan.finite
         for size in sizes])
    z_found, z_blocks = _plant_side([(0j, size) for size in plan.infinite])
    T = linalg_tools.direct_sum(t_blocks)
    Z = linalg_tools.direct_sum(z_blocks)

    for attempt in range(PLANT_ATTEMPTS):
        X = _random_columns(rng, plan.n, T.shape[0])
        Y = _random_columns(rng, plan.n, Z.shape[0])
        pair = spectral.pair_with_blocks(X, Y, T, Z, t_found, z_found)
        Q = spectral.controllability(pair, plan.k).Q
        if np.linalg.cond(Q) >= PLANT_CONDITION:
            continue
        try:
            poly = spectral.reconstruct_from_pair(pair, plan.n, plan.k, tol)
        except spectral.RankDeficientPair:
            continue
        if poly.k != plan.k:
            continue
        report = polynomial.regularity(poly, tol)
        if report.regular and report.M == T.shape[0]:
            LOGGER.info(f"Planted polynomial drawn on attempt {attempt + 1}.")
            return poly, pair
    raise PlanInfeasible(
        f"No regular polynomial found in {PLANT_ATTEMPTS} draws.")


def brute_solvent_check(poly, S):
    """Relative residual of sum A_i S^i by right-multiplying Horner."""
    residual = np.array(poly.coeffs[-1], dtype=complex)
    for coeff in reversed(poly.coeffs[:-1]):
        residual = residual @ S + coeff
    scale = sum(np.linalg.norm(coeff) for coeff in poly.coeffs) * max(
        1.0, np.linalg.norm(S)) ** poly.k
    return linalg_tools.scaled_norm(residual, scale)


def exhaustive_semisimple_solvents(poly, tol=DEFAULT_TOLERANCE):
    """All solvents of a semisimple P from eigenvector combinations.

    Raises:
        NotRegular
        NotSemisimple
    """
    report = polynomial.require_regular(poly, tol)
    eigenpairs = list()
    for root in linalg_tools.poly_roots(report.det_poly, tol):
        vectors = linalg_tools.nullspace(
            poly(root.value), tol,
            spectral.evaluation_scale(poly, root.value))
        if vectors.shape[1] != root.multiplicity:
            raise NotSemisimple(
                f"Eigenvalue {root.value} has multiplicity"
                f" {root.multiplicity} but {vectors.shape[1]} eigenvectors.")
        eigenpairs.extend((root.value, vector) for vector in vectors.T)

    found = list()
    for combination in itertools.combinations(eigenpairs, poly.n):
        V = np.column_stack([vector for _, vector in combination])
        if linalg_tools.numerical_rank(V, tol) < poly.n:
            continue
        values = np.diag([value for value, _ in combination])
        S = V @ values @ linalg_tools.invert(V, tol)
        if brute_solvent_check(poly, S) <= tol.residual_tol:
            found.append(S)
    return found


def divisibility_probe(poly, factor, points=None, tol=DEFAULT_TOLERANCE,
                       seed=solver_settings.DEFAULT_SEED):
    """Decide whether P F^-1 is a polynomial of degree at most k - 1.

    P(z) F(z)^-1 is fitted in a Chebyshev basis by least squares at more
    points than unknowns.

    Raises:
        SpectrumAvoidanceFailed
    """
    if points is None:
        rng = np.random.default_rng(seed)
        count = 3 * max(poly.k, 1)
        points = rng.uniform(0.5, 2.0, count) * np.exp(
            1j * rng.uniform(0, 2 * np.pi, count))
    points = np.asarray(points, dtype=complex)
    ratios = list()
    for point in points:
        value = factor(point)
        magnitude = np.linalg.norm(value, 2)
        if abs(np.linalg.det(value)) <= 1e-8 * magnitude ** value.shape[0]:
            raise SpectrumAvoidanceFailed(
                f"The factor is nearly singular at {point}.")
        ratios.append((poly(point) @ np.linalg.inv(value)).ravel())
    ratios = np.array(ratios)
    scaled = points / np.max(np.abs(points))
    basis = chebyshev.chebvander(scaled, max(poly.k - 1, 0))
    weights = np.linalg.lstsq(basis, ratios, rcond=None)[0]
    misfit = np.linalg.norm(basis @ weights - ratios)
    return misfit <= tol.residual_tol * max(1.0, np.linalg.norm(ratios))
