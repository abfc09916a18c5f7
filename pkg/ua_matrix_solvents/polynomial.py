"""The matrix polynomial value type and its scalar invariants."""
import math
import logging
from dataclasses import dataclass

import numpy as np

from ua_matrix_solvents import solver_settings
from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)


class DimensionMismatch(Exception):
    """Matrices that must share dimensions do not."""


class ZeroPolynomialInput(Exception):
    """Every coefficient of the matrix polynomial is zero."""


class NotSquare(Exception):
    """The operation needs a square (n = m) matrix polynomial."""


class NotRegular(Exception):
    """det P(lambda) vanishes identically."""


@dataclass(frozen=True, eq=False)
class MatrixPolynomial():
    """P(lambda) = sum of coeffs[i] * lambda**i with n x m coefficients."""
    coeffs: tuple

    @property
    def n(self):
        return self.coeffs[0].shape[0]

    @property
    def m(self):
        return self.coeffs[0].shape[1]

    @property
    def k(self):
        return len(self.coeffs) - 1

    @property
    def scale(self):
        """Sum of the coefficient norms, used to scale residuals."""
        return float(sum(np.linalg.norm(coeff) for coeff in self.coeffs))

    def __call__(self, value):
        return eval_polynomial(self, value)


@dataclass(frozen=True)
class RegularityReport():
    """Holds the determinant data of a square matrix polynomial."""
    regular: bool
    det_poly: linalg_tools.ScalarPolynomial
    M: int
    infinite_mult_total: int
    essentially_monic: bool = False
    essentially_comonic: bool = False


def make_polynomial(coeffs):
    """Build a MatrixPolynomial, trimming trailing zero coefficients.

    Arguments:
        coeffs (list of array-like): A_0, ..., A_k; A_i multiplies lambda**i.

    Returns:
        (MatrixPolynomial): With A_k nonzero.

    Raises:
        DimensionMismatch
        ZeroPolynomialInput
    """
    if len(coeffs) == 0:
        raise DimensionMismatch("A matrix polynomial needs a coefficient.")
    matrices = [np.array(linalg_tools.as_matrix(coeff)) for coeff in coeffs]
    shape = matrices[0].shape
    for index, matrix in enumerate(matrices):
        if matrix.shape != shape:
            raise DimensionMismatch(
                f"Coefficient A_{index} is {matrix.shape[0]}x"
                f"{matrix.shape[1]} but A_0 is {shape[0]}x{shape[1]}.")

    while len(matrices) > 1 and not np.any(matrices[-1]):
        matrices.pop()
    if not np.any(matrices[-1]):
        raise ZeroPolynomialInput("The zero polynomial is not accepted.")

    for matrix in matrices:
        matrix.setflags(write=False)
    return MatrixPolynomial(coeffs=tuple(matrices))


def eval_polynomial(poly, value):
    """Evaluate P(value) by the Horner recurrence."""
    result = np.array(poly.coeffs[-1], dtype=complex)
    for coeff in reversed(poly.coeffs[:-1]):
        result = result * value + coeff
    return result


def reverse(poly):
    """Return lambda**k * P(1/lambda), re-trimmed when A_0 = 0."""
    return make_polynomial(list(reversed(poly.coeffs)))


def taylor_coeff(poly, point, order):
    """Return P^(order)(point) / order!.

    Orders above the degree give the zero matrix.
    """
    result = np.zeros((poly.n, poly.m), dtype=complex)
    for index in range(order, poly.k + 1):
        result += (
            math.comb(index, order) * poly.coeffs[index]
            * point ** (index - order))
    return result


def determinant_polynomial(poly):
    """Compute det P(lambda) by evaluation on a circle and interpolation.

    Samples nk + 1 roots of unity scaled to radius 1 + max norm(A_i); the
    coefficients are recovered by FFT and those below
    DET_FLUSH * max|coefficient| are flushed to zero.

    Raises:
        NotSquare
    """
    if poly.n != poly.m:
        raise NotSquare(
            f"The determinant needs a square polynomial, got {poly.n}x"
            f"{poly.m}.")
    count = poly.n * poly.k + 1
    radius = 1 + max(np.linalg.norm(coeff, 2) for coeff in poly.coeffs)
    points = radius * np.exp(2j * np.pi * np.arange(count) / count)
    samples = [eval_polynomial(poly, point) for point in points]
    values = np.array([np.linalg.det(sample) for sample in samples])
    # Rounding noise of a singular polynomial is not a determinant.
    magnitude = max(np.linalg.norm(sample, 2) for sample in samples)
    noise_floor = solver_settings.DET_FLUSH * magnitude ** poly.n
    if np.max(np.abs(values)) <= noise_floor:
        return linalg_tools.ScalarPolynomial.from_coefficients([0])
    coefficients = np.fft.fft(values) / count
    coefficients = coefficients / radius ** np.arange(count)
    return linalg_tools.ScalarPolynomial.from_coefficients(
        coefficients, flush=solver_settings.DET_FLUSH)


def regularity(poly, tol=DEFAULT_TOLERANCE):
    """Decide regularity and count the finite and infinite eigenvalues.

    Returns:
        (RegularityReport): M is the degree of det P; infinite_mult_total is
            nk - M.

    Raises:
        NotSquare
    """
    det_poly = determinant_polynomial(poly)
    regular = not det_poly.is_zero
    size = poly.n * poly.k
    degree = det_poly.degree if regular else 0
    return RegularityReport(
        regular=regular,
        det_poly=det_poly,
        M=degree,
        infinite_mult_total=size - degree if regular else 0,
        essentially_monic=(
            linalg_tools.numerical_rank(poly.coeffs[-1], tol) == poly.n),
        essentially_comonic=(
            linalg_tools.numerical_rank(poly.coeffs[0], tol) == poly.n))


def require_regular(poly, tol=DEFAULT_TOLERANCE):
    """Return the RegularityReport, raising NotRegular for singular P."""
    report = regularity(poly, tol)
    if not report.regular:
        raise NotRegular(
            f"The {poly.n}x{poly.n} polynomial of degree {poly.k} has an"
            f" identically zero determinant.")
    return report
