"""Companion pencils and Weierstrass spectral data of regular pencils."""
import logging
from dataclasses import dataclass

import numpy as np

from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import spectral
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)


class SingularPencil(Exception):
    """The pencil is singular; Kronecker null indices are not computed."""


@dataclass(frozen=True, eq=False)
class Pencil():
    """The pencil lambda * a1 + a0."""
    a1: np.ndarray
    a0: np.ndarray

    @classmethod
    def from_polynomial(cls, poly):
        """Wrap a matrix polynomial of degree at most one."""
        if poly.k > 1:
            raise ValueError(
                f"A pencil has degree one, got degree {poly.k}.")
        a1 = poly.coeffs[1] if poly.k == 1 else np.zeros_like(poly.coeffs[0])
        return cls(a1=np.array(a1, dtype=complex),
                   a0=np.array(poly.coeffs[0], dtype=complex))

    @property
    def n(self):
        return self.a0.shape[0]

    @property
    def m(self):
        return self.a0.shape[1]

    def as_polynomial(self):
        """The pencil as a MatrixPolynomial; degree 0 when a1 = 0."""
        return polynomial.make_polynomial([self.a0, self.a1])

    def transpose(self):
        return Pencil(a1=self.a1.T.copy(), a0=self.a0.T.copy())

    def __call__(self, value):
        return value * self.a1 + self.a0


@dataclass(frozen=True)
class WeierstrassData():
    """Eigenvalues with partial multiplicities, the infinite one included.

    finite holds (eigenvalue, descending partial multiplicities) pairs in
    eigenvalue order; infinite holds the descending partial multiplicities
    of the infinite eigenvalue.
    """
    finite: tuple
    infinite: tuple

    @property
    def finite_total(self):
        return sum(sum(sizes) for _, sizes in self.finite)

    @property
    def infinite_total(self):
        return sum(self.infinite)

    def matches(self, other, tol=DEFAULT_TOLERANCE):
        """Compare as multisets, eigenvalues within the cluster radius."""
        if tuple(self.infinite) != tuple(other.infinite):
            return False
        if len(self.finite) != len(other.finite):
            return False
        unmatched = list(other.finite)
        for value, sizes in self.finite:
            radius = tol.cluster_radius * (1 + abs(value))
            for index, (candidate, candidate_sizes) in enumerate(unmatched):
                if (abs(candidate - value) <= radius
                        and tuple(candidate_sizes) == tuple(sizes)):
                    unmatched.pop(index)
                    break
            else:
                return False
        return True


def _group_blocks(entries, tol):
    """Group (eigenvalue, size) entries into WeierstrassData.finite form."""
    clusters = linalg_tools.cluster_values(
        [value for value, _ in entries], tol)
    grouped = [(root.value, list()) for root in clusters]
    for value, size in entries:
        nearest = min(
            range(len(grouped)), key=lambda i: abs(grouped[i][0] - value))
        grouped[nearest][1].append(size)
    return tuple(
        (value, tuple(sorted(sizes, reverse=True)))
        for value, sizes in grouped)


def companion_down(poly):
    """Build the companion pencil with A_0..A_k in the lowest block row.

    The lambda coefficient is diag(I, ..., I, A_k); the constant term has -I
    blocks on the block superdiagonal and (A_0, ..., A_{k-1}) as its bottom
    block row. A pencil is its own companion.

    Raises:
        NotSquare
    """
    if poly.n != poly.m:
        raise polynomial.NotSquare(
            f"A companion pencil needs a square polynomial, got {poly.n}x"
            f"{poly.m}.")
    if poly.k < 1:
        raise ValueError("A companion pencil needs degree at least one.")
    if poly.k == 1:
        return Pencil.from_polynomial(poly)

    n, k = poly.n, poly.k
    size = n * k
    lead = np.eye(size, dtype=complex)
    lead[size - n:, size - n:] = poly.coeffs[k]
    constant = np.zeros((size, size), dtype=complex)
    for block in range(k - 1):
        rows = slice(block * n, (block + 1) * n)
        cols = slice((block + 1) * n, (block + 2) * n)
        constant[rows, cols] = -np.eye(n)
    for block in range(k):
        constant[size - n:, block * n:(block + 1) * n] = poly.coeffs[block]
    return Pencil(a1=lead, a0=constant)


def companion_right(poly):
    """Build C_r(lambda; P) as the transpose of C_d(lambda; P^T).

    Raises:
        NotSquare
    """
    if poly.n != poly.m:
        raise polynomial.NotSquare(
            f"A companion pencil needs a square polynomial, got {poly.n}x"
            f"{poly.m}.")
    transposed = polynomial.make_polynomial(
        [coeff.T for coeff in poly.coeffs])
    return companion_down(transposed).transpose()


def weierstrass_data(pencil, tol=DEFAULT_TOLERANCE):
    """Compute eigenvalues and partial multiplicities of a regular pencil.

    Infinite eigenvalues are reported through the chains of the reversed
    pencil at zero, i.e. as nilpotent comonic blocks.

    Raises:
        SingularPencil
        NoConvergence
    """
    if not np.any(pencil.a1):
        # lambda * 0 + A_0: every eigenvalue is infinite.
        if linalg_tools.numerical_rank(pencil.a0, tol) < pencil.n:
            raise SingularPencil("The constant pencil A_0 is singular.")
        return WeierstrassData(finite=(), infinite=(1,) * pencil.n)

    poly = pencil.as_polynomial()
    try:
        report = polynomial.require_regular(poly, tol)
    except polynomial.NotRegular as error:
        raise SingularPencil(
            f"Kronecker structure of singular pencils is not computed:"
            f" {error}")

    finite = list()
    if report.M > 0:
        for root in linalg_tools.poly_roots(report.det_poly, tol):
            chains = spectral.jordan_chains_at(
                poly, root.value, tol, multiplicity=root.multiplicity)
            finite.append((root.value, tuple(sorted(
                (chain.length for chain in chains), reverse=True))))

    infinite = tuple()
    if report.infinite_mult_total > 0:
        chains = spectral.jordan_chains_at(
            poly, spectral.INF, tol,
            multiplicity=report.infinite_mult_total)
        infinite = tuple(sorted(
            (chain.length for chain in chains), reverse=True))
    return WeierstrassData(finite=tuple(finite), infinite=infinite)


def polynomial_spectral_data(poly, tol=DEFAULT_TOLERANCE):
    """WeierstrassData of P through its down companion pencil."""
    if poly.k == 0:
        polynomial.require_regular(poly, tol)
        return WeierstrassData(finite=(), infinite=())
    return weierstrass_data(companion_down(poly), tol)


def pair_spectral_data(pair, tol=DEFAULT_TOLERANCE):
    """Read spectral data off a standard pair with block structure.

    Finite eigenvalues are those of T together with the inverses of the
    nonzero eigenvalues of Z; the zero eigenvalue of Z is the infinite one.
    """
    pair = spectral.jordan_normal_pair(pair, tol)
    entries = list()
    infinite = list()
    for block in pair.blocks:
        if block.side == "T":
            entries.append((block.eigenvalue, block.size))
        elif spectral.is_zero(block.eigenvalue, tol):
            infinite.append(block.size)
        else:
            entries.append((1 / block.eigenvalue, block.size))
    return WeierstrassData(
        finite=_group_blocks(entries, tol) if entries else (),
        infinite=tuple(sorted(infinite, reverse=True)))
