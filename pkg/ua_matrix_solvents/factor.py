"""Right pencil factors P = Q F built from separable bisolvents."""
import logging
from dataclasses import dataclass

import numpy as np

from ua_matrix_solvents import solver_settings
from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import spectral
from ua_matrix_solvents import solvents
from ua_matrix_solvents.linearize import Pencil
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)

# |det F(z)| must exceed this fraction of norm(F(z))^m at a sample point.
SAMPLE_CONDITION = 1e-8


class DegenerateFactor(Exception):
    """The pencil lambda S2 - S1 is singular."""


class SpectrumAvoidanceFailed(Exception):
    """No sample circle away from the spectrum of the factor was found."""


class NotADivisor(Exception):
    """The pencil does not divide the polynomial on the right."""


class NotRegularFactor(Exception):
    """A candidate right factor is a singular pencil."""


@dataclass(frozen=True, eq=False)
class Factorization():
    """P = quotient * factor with the bisolvent the factor came from."""
    factor: Pencil
    quotient: polynomial.MatrixPolynomial
    max_rel_residual: float
    source: solvents.Bisolvent = None


@dataclass(frozen=True, eq=False)
class FactorReport():
    """Outcome of checking a user-supplied right factor."""
    divides: bool
    residual: float
    quotient: polynomial.MatrixPolynomial = None
    atlas_index: int = None
    transform: np.ndarray = None
    bisolvent_ok: bool = False


def pencil_is_regular(pencil, tol=DEFAULT_TOLERANCE):
    return polynomial.regularity(pencil.as_polynomial(), tol).regular


def right_factor(bisolvent, tol=DEFAULT_TOLERANCE):
    """Return F(lambda) = lambda S2 - S1.

    Raises:
        DegenerateFactor
    """
    factor = Pencil(
        a1=np.array(bisolvent.S2, dtype=complex),
        a0=-np.array(bisolvent.S1, dtype=complex))
    if not pencil_is_regular(factor, tol):
        raise DegenerateFactor("lambda S2 - S1 is a singular pencil.")
    return factor


def _well_conditioned(matrix):
    magnitude = np.linalg.norm(matrix, 2)
    if magnitude == 0:
        return False
    return abs(np.linalg.det(matrix)) > (
        SAMPLE_CONDITION * magnitude ** matrix.shape[0])


def sample_circle(factors, count, rng):
    """Pick count points on a random circle avoiding every factor's spectrum.

    Returns:
        (complex, ndarray): The circle's base point c and the points
            c * exp(2 pi i j / count).

    Raises:
        SpectrumAvoidanceFailed
    """
    for _ in range(solver_settings.SAMPLE_RETRIES):
        base = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        points = base * np.exp(2j * np.pi * np.arange(count) / count)
        if all(_well_conditioned(factor(point))
               for factor in factors for point in points):
            return base, points
    raise SpectrumAvoidanceFailed(
        f"No circle of {count} points avoided the spectrum in"
        f" {solver_settings.SAMPLE_RETRIES} attempts.")


def factorization_residual(poly, quotient, factor, points):
    """Largest relative residual of P - Q F over the points."""
    worst = 0.0
    for point in points:
        residual = poly(point) - quotient(point) @ factor(point)
        worst = max(worst, linalg_tools.scaled_norm(
            residual, spectral.evaluation_scale(poly, point)))
    return worst


def left_quotient(poly, factor, tol=DEFAULT_TOLERANCE,
                  seed=solver_settings.DEFAULT_SEED):
    """Compute Q of degree at most k - 1 with P = Q F.

    P(z) F(z)^-1 is sampled on a random circle, interpolated by FFT and the
    result checked at fresh points.

    Raises:
        DimensionMismatch
        NotRegularFactor
        SpectrumAvoidanceFailed
        NotADivisor
    """
    if factor.n != poly.n or factor.m != poly.m:
        raise polynomial.DimensionMismatch(
            f"A {factor.n}x{factor.m} factor cannot divide a {poly.n}x"
            f"{poly.m} polynomial.")
    if not pencil_is_regular(factor, tol):
        raise NotRegularFactor("The factor is a singular pencil.")
    rng = np.random.default_rng(seed)
    count = max(poly.k, 1)
    base, points = sample_circle([factor], count, rng)
    values = np.array([
        poly(point) @ linalg_tools.invert(factor(point), tol)
        for point in points])
    coefficients = np.fft.fft(values, axis=0) / count
    coefficients = [
        coefficients[i] / base ** i for i in range(count)]
    biggest = max(np.max(np.abs(coeff)) for coeff in coefficients)
    coefficients = [
        np.where(np.abs(coeff) < solver_settings.DET_FLUSH * biggest,
                 0, coeff)
        for coeff in coefficients]
    quotient = polynomial.make_polynomial(coefficients)

    _, fresh = sample_circle([factor], count + 1, rng)
    residual = factorization_residual(poly, quotient, factor, fresh)
    if residual > tol.residual_tol:
        raise NotADivisor(
            f"P - Q F has relative residual {residual:.3e} away from the"
            f" interpolation points.")
    return quotient


def factors_from_bisolvents(poly, bisolvents, tol=DEFAULT_TOLERANCE,
                            seed=solver_settings.DEFAULT_SEED):
    """Build the Factorization of each bisolvent, skipping degenerate ones."""
    rng = np.random.default_rng(seed)
    atlas = list()
    for bisolvent in bisolvents:
        try:
            factor = right_factor(bisolvent, tol)
            quotient = left_quotient(poly, factor, tol, seed)
        except (DegenerateFactor, NotRegularFactor, NotADivisor) as error:
            LOGGER.warning(f"Bisolvent skipped in the factor atlas: {error}")
            continue
        _, points = sample_circle([factor], 3 * max(poly.k, 1), rng)
        atlas.append(Factorization(
            factor=factor, quotient=quotient,
            max_rel_residual=factorization_residual(
                poly, quotient, factor, points),
            source=bisolvent))
    return atlas


def factor_atlas(poly, tol=DEFAULT_TOLERANCE,
                 limit=solver_settings.MAX_ENUM,
                 seed=solver_settings.DEFAULT_SEED):
    """One right factor per separable bisolvent, up to left equivalence.

    Raises:
        NotSquare
        NotRegular
        NoConvergence
    """
    result = solvents.bisolvents(poly, tol, limit)
    return factors_from_bisolvents(poly, result.items, tol, seed)


def left_equivalent(first, second, tol=DEFAULT_TOLERANCE,
                    seed=solver_settings.DEFAULT_SEED, samples=4):
    """Decide whether first = G second for a constant invertible G.

    Returns:
        (bool, ndarray or None): The verdict and G when it holds.

    Raises:
        SpectrumAvoidanceFailed
    """
    rng = np.random.default_rng(seed)
    _, points = sample_circle([first, second], samples, rng)
    ratios = [
        first(point) @ linalg_tools.invert(second(point), tol)
        for point in points]
    G = ratios[0]
    scale = max(1.0, np.linalg.norm(G))
    spread = max(np.linalg.norm(ratio - G) for ratio in ratios)
    if spread > solver_settings.EQUIVALENCE_TOL * scale:
        return False, None
    if linalg_tools.numerical_rank(G, tol) < G.shape[0]:
        return False, None
    return True, G


def verify_right_factor(poly, factor, tol=DEFAULT_TOLERANCE, atlas=None,
                        seed=solver_settings.DEFAULT_SEED):
    """Check that F divides P and locate it in the factor atlas.

    When F = G F0 for an atlas factor F0 = lambda S2 - S1, the transform
    X = G^-1 gives S2 = X A_1 and S1 = -X A_0 of F, which are then
    verified as a bisolvent.

    Raises:
        DimensionMismatch
        NotRegularFactor
        NotADivisor
        SpectrumAvoidanceFailed
    """
    quotient = left_quotient(poly, factor, tol, seed)
    rng = np.random.default_rng(seed + 1)
    _, points = sample_circle([factor], 3 * max(poly.k, 1), rng)
    residual = factorization_residual(poly, quotient, factor, points)

    if atlas is None:
        atlas = factor_atlas(poly, tol, seed=seed)
    for index, entry in enumerate(atlas):
        equivalent, G = left_equivalent(factor, entry.factor, tol, seed)
        if not equivalent:
            continue
        transform = linalg_tools.invert(G, tol)
        candidate = solvents.Bisolvent(
            S1=-transform @ factor.a0, S2=transform @ factor.a1,
            Pi=entry.source.Pi)
        check = solvents.verify_bisolvent(poly, candidate, tol)
        return FactorReport(
            divides=True, residual=residual, quotient=quotient,
            atlas_index=index, transform=transform,
            bisolvent_ok=check.passed(tol))
    return FactorReport(
        divides=True, residual=residual, quotient=quotient)
