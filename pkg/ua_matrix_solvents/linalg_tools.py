"""Dense complex-matrix primitives and scalar polynomial root finding."""
import logging
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ua_matrix_solvents import solver_settings


LOGGER = logging.getLogger(__name__)

# A clustered root of a scalar polynomial.
Root = namedtuple("Root", ["value", "multiplicity"])


class SingularMatrix(Exception):
    """The matrix is numerically singular and cannot be inverted."""


class ZeroPolynomial(Exception):
    """The scalar polynomial is identically zero and has no roots."""


class NoConvergence(Exception):
    """An iterative method reached its iteration cap."""


@dataclass(frozen=True)
class Tolerance():
    """Holds the numerical thresholds shared by every computation."""
    rank_tol: float = solver_settings.RANK_TOL
    cluster_radius: float = solver_settings.CLUSTER_RADIUS
    residual_tol: float = solver_settings.RESIDUAL_TOL

    @classmethod
    def from_residual(cls, tol, rank_tol=None, cluster_radius=None):
        """Derive the full tolerance set from a residual tolerance.

        Arguments:
            tol (float): The residual tolerance.

        Keyword Arguments:
            rank_tol (float): Overrides the derived tol * 1e-2.
            cluster_radius (float): Overrides the derived tol * 1e3.
        """
        return cls(
            rank_tol=tol * 1e-2 if rank_tol is None else rank_tol,
            cluster_radius=(
                tol * 1e3 if cluster_radius is None else cluster_radius),
            residual_tol=tol)

    def loosened(self, factor):
        """Return a copy with rank_tol scaled by factor."""
        return Tolerance(
            self.rank_tol * factor, self.cluster_radius, self.residual_tol)


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True)
class ScalarPolynomial():
    """A polynomial with complex coefficients, index i multiplies x**i."""
    coefficients: tuple

    @classmethod
    def from_coefficients(cls, coefficients, flush=0.0):
        """Build a polynomial, flushing coefficients below flush * max|c|.

        Trailing (highest order) zeros are dropped so that the leading
        coefficient is nonzero unless the polynomial is zero.
        """
        coeffs = np.asarray(coefficients, dtype=complex).ravel()
        if coeffs.size == 0:
            return cls(coefficients=(0j,))
        biggest = np.max(np.abs(coeffs))
        if biggest > 0 and flush > 0:
            coeffs = np.where(np.abs(coeffs) < flush * biggest, 0, coeffs)
        nonzero = np.nonzero(coeffs)[0]
        if nonzero.size == 0:
            return cls(coefficients=(0j,))
        return cls(coefficients=tuple(
            complex(c) for c in coeffs[:nonzero[-1] + 1]))

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def is_zero(self):
        return all(c == 0 for c in self.coefficients)

    def __call__(self, x):
        # np.polyval wants the highest order coefficient first.
        return np.polyval(self.coefficients[::-1], x)


def eigenvalue_key(value, digits=10):
    """Sort key ordering by real part, then imaginary part, both descending."""
    value = complex(value)
    return (-round(value.real, digits), -round(value.imag, digits))


def as_matrix(entries):
    """Return entries as a 2-d complex ndarray with finite values."""
    matrix = np.atleast_2d(np.asarray(entries, dtype=complex))
    if matrix.ndim != 2:
        raise ValueError(f"Expected a matrix, got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must be finite.")
    return matrix


def scaled_norm(residual, scale):
    """Return norm(residual) / scale, with 0 / 0 read as 0."""
    value = np.linalg.norm(residual)
    if scale <= 0:
        return 0.0 if value == 0 else np.inf
    return float(value / scale)


def numerical_rank(matrix, tol=DEFAULT_TOLERANCE, scale=None):
    """Count the singular values above rank_tol * max(dim) * scale.

    Arguments:
        matrix (array-like): A nonempty matrix.
        tol (Tolerance): The thresholds to use.
        scale (float): Absolute magnitude to compare against; sigma_max
            when omitted.

    Returns:
        (int): The numerical rank; a zero matrix has rank 0.
    """
    matrix = as_matrix(matrix)
    if matrix.size == 0:
        return 0
    singular_values = linalg.svdvals(matrix)
    if singular_values[0] == 0:
        return 0
    reference = singular_values[0] if scale is None else scale
    threshold = tol.rank_tol * max(matrix.shape) * reference
    return int(np.sum(singular_values > threshold))


def nullspace(matrix, tol=DEFAULT_TOLERANCE, scale=None):
    """Return an orthonormal basis of the numerical kernel as columns.

    The column count equals cols - numerical_rank(matrix, tol, scale).
    """
    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    if scale is not None:
        _, singular_values, right = linalg.svd(matrix)
        rank = int(np.sum(
            singular_values > tol.rank_tol * max(rows, cols) * scale))
        return right[rank:].conj().T
    return linalg.null_space(matrix, rcond=tol.rank_tol * max(rows, cols))


def column_space(matrix, tol=DEFAULT_TOLERANCE):
    """Return an orthonormal basis of the numerical range as columns."""
    matrix = as_matrix(matrix)
    if matrix.size == 0:
        return np.zeros((matrix.shape[0], 0), dtype=complex)
    return linalg.orth(matrix, rcond=tol.rank_tol * max(matrix.shape))


def invert(matrix, tol=DEFAULT_TOLERANCE):
    """Invert a square matrix after checking its numerical rank.

    Raises:
        SingularMatrix
    """
    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if rows != cols:
        raise ValueError(f"Cannot invert a non-square {rows}x{cols} matrix.")
    if rows == 0:
        return np.zeros((0, 0), dtype=complex)
    rank = numerical_rank(matrix, tol)
    if rank < rows:
        raise SingularMatrix(
            f"The {rows}x{rows} matrix has numerical rank {rank}.")
    inverse = linalg.inv(matrix)
    condition = np.linalg.cond(matrix)
    residual = np.linalg.norm(matrix @ inverse - np.eye(rows), np.inf)
    if residual > tol.residual_tol * max(condition, 1.0):
        LOGGER.warning(
            f"Inverse residual {residual:.3e} exceeds the tolerance for a"
            f" matrix with condition estimate {condition:.3e}.")
    return inverse


def direct_sum(blocks):
    """Block-diagonal matrix of the given square blocks, empty blocks kept."""
    blocks = [np.asarray(block, dtype=complex) for block in blocks]
    blocks = [block if block.ndim == 2 else np.atleast_2d(block)
              for block in blocks]
    size = sum(block.shape[0] for block in blocks)
    result = np.zeros((size, size), dtype=complex)
    offset = 0
    for block in blocks:
        width = block.shape[0]
        result[offset:offset + width, offset:offset + width] = block
        offset += width
    return result


def _aberth(monic, max_iterations):
    """Run Aberth-Ehrlich iterations on a monic polynomial (highest first)."""
    degree = monic.size - 1
    derivative = np.polyder(monic)
    magnitudes = np.abs(monic)
    # Fujiwara-type bound on the root moduli.
    radius = max(
        (magnitudes[i] ** (1.0 / i) for i in range(1, degree + 1)),
        default=1.0)
    radius = max(radius, np.finfo(float).tiny)
    angles = 2 * np.pi * np.arange(degree) / degree + 0.4
    roots = radius * np.exp(1j * angles)
    active = np.ones(degree, dtype=bool)
    eps = np.finfo(float).eps

    for _ in range(max_iterations):
        if not active.any():
            return roots
        values = np.polyval(monic, roots)
        slopes = np.polyval(derivative, roots)
        bounds = 16 * eps * np.polyval(magnitudes, np.abs(roots))
        on_root = np.abs(values) <= bounds
        differences = roots[:, None] - roots[None, :]
        np.fill_diagonal(differences, 1.0)
        repulsion = (1.0 / differences).sum(axis=1) - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = values / slopes
            correction = newton / (1 - newton * repulsion)
        bad = ~np.isfinite(correction)
        correction[bad] = eps * (1 + np.abs(roots[bad]))
        correction[on_root | ~active] = 0
        roots = roots - correction
        small = np.abs(correction) <= 4 * eps * (1 + np.abs(roots))
        active &= ~(on_root | small)
    raise NoConvergence(
        f"Aberth-Ehrlich iteration did not converge in {max_iterations}"
        f" iterations for a degree {degree} polynomial.")


def _inclusion_radii(monic, roots):
    """Newton inclusion radii degree * |p(z)| / |p'(z)| of the roots.

    Approximations of a multiple root stall a distance of order
    eps ** (1 / multiplicity) apart, often with overlapping disks. Radii
    are capped at INCLUSION_CAP * (1 + |z|).
    """
    degree = monic.size - 1
    values = np.abs(np.polyval(monic, roots))
    slopes = np.abs(np.polyval(np.polyder(monic), roots))
    caps = solver_settings.INCLUSION_CAP * (1 + np.abs(roots))
    with np.errstate(divide="ignore", invalid="ignore"):
        radii = np.where(values == 0, 0.0, degree * values / slopes)
    return [float(min(radius, cap)) for radius, cap in zip(radii, caps)]


def cluster_reach(size, tol=DEFAULT_TOLERANCE):
    """Relative spread of size approximations of a root of that multiplicity.

    A root of multiplicity size moves by about rank_tol ** (1 / size) when
    the coefficients move by rank_tol. The reach is kept between
    cluster_radius and CLUSTER_CAP.
    """
    if size < 2:
        return tol.cluster_radius
    return max(tol.cluster_radius, min(
        tol.rank_tol ** (1.0 / size), solver_settings.CLUSTER_CAP))


def _overlap_groups(values, radii, tol):
    """Join values within cluster_radius, or with overlapping disks."""
    radius = tol.cluster_radius * (1 + np.max(np.abs(values)))
    labels = list(range(values.size))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(values.size):
        for j in range(i + 1, values.size):
            reach = radius if radii is None else max(
                radius, radii[i] + radii[j])
            if abs(values[i] - values[j]) <= reach:
                labels[find(j)] = find(i)

    groups = dict()
    for i in range(values.size):
        groups.setdefault(find(i), list()).append(i)
    return list(groups.values())


def _merge_around(values, groups, index, size, tol):
    """Merge groups[index] with its nearest groups into size members.

    Returns:
        (list or None): The new grouping, or None when the merged members
            spread further than cluster_reach(size) allows.
    """
    center = np.mean(values[groups[index]])
    order = sorted(
        (position for position in range(len(groups)) if position != index),
        key=lambda position: abs(np.mean(values[groups[position]]) - center))
    taken = [index]
    members = list(groups[index])
    for position in order:
        if len(members) >= size:
            break
        taken.append(position)
        members.extend(groups[position])
    if len(members) != size or len(taken) == 1:
        return None
    centroid = np.mean(values[members])
    spread = np.max(np.abs(values[members] - centroid))
    if spread > cluster_reach(size, tol) * (1 + abs(centroid)):
        return None
    return [group for position, group in enumerate(groups)
            if position not in taken] + [members]


def cluster_values(values, tol=DEFAULT_TOLERANCE, radii=None):
    """Group approximations of the same root.

    Values within cluster_radius * (1 + max|value|) of each other, or whose
    inclusion disks given by radii overlap, are joined first. Groups are
    then merged, largest size first, when all merged members lie within
    cluster_reach(size) * (1 + |centroid|) of their centroid.

    Returns:
        (list of Root): Centroids with cluster sizes, ordered by
            eigenvalue_key.
    """
    values = np.array([complex(v) for v in values])
    if values.size == 0:
        return []
    groups = _overlap_groups(values, radii, tol)
    for size in range(values.size, 1, -1):
        index = 0
        while index < len(groups):
            merged = _merge_around(values, groups, index, size, tol)
            if merged is None:
                index += 1
            else:
                groups = merged

    clusters = list()
    for members in groups:
        # Exact zeros stay exact.
        if np.any(values[members] == 0):
            representative = 0j
        else:
            representative = complex(np.mean(values[members]))
        clusters.append(Root(representative, len(members)))
    return sorted(clusters, key=lambda root: eigenvalue_key(root.value))


def _refine_multiple(monic, root, tol, max_iterations):
    """Newton steps on the (multiplicity - 1)-th derivative of the monic.

    A root of multiplicity m is a simple root of that derivative, which the
    centroid of the cluster approximates. The centroid is kept when Newton
    leaves the cluster's reach.
    """
    target = np.polyder(monic, root.multiplicity - 1)
    slope = np.polyder(target)
    eps = np.finfo(float).eps
    point = root.value
    for _ in range(max_iterations):
        derivative = np.polyval(slope, point)
        if derivative == 0:
            break
        step = np.polyval(target, point) / derivative
        point = point - step
        if abs(step) <= 4 * eps * (1 + abs(point)):
            break
    reach = cluster_reach(root.multiplicity, tol) * (1 + abs(root.value))
    if not np.isfinite(point) or abs(point - root.value) > reach:
        LOGGER.info(f"Kept the centroid {root.value} of a multiple root.")
        return root
    return Root(complex(point), root.multiplicity)


def poly_roots(poly, tol=DEFAULT_TOLERANCE,
               max_iterations=solver_settings.MAX_ITERATIONS):
    """Find all roots of a scalar polynomial, clustered with multiplicity.

    Clusters of nonzero roots are refined by Newton steps on the derivative
    whose simple root they are.

    Arguments:
        poly (ScalarPolynomial): The polynomial; must not be zero.
        tol (Tolerance): Supplies cluster_radius and rank_tol.

    Returns:
        (list of Root): Multiplicities sum to the degree.

    Raises:
        ZeroPolynomial
        NoConvergence
    """
    if poly.is_zero:
        raise ZeroPolynomial("The zero polynomial has no finite root set.")
    coeffs = np.asarray(poly.coefficients, dtype=complex)
    zero_count = int(np.argmax(coeffs != 0))
    reduced = coeffs[zero_count:]
    roots = [0j] * zero_count
    radii = [0.0] * zero_count
    if reduced.size == 1:
        return cluster_values(roots, tol, radii)
    monic = reduced[::-1] / reduced[-1]
    found = _aberth(monic, max_iterations)
    roots.extend(found)
    radii.extend(_inclusion_radii(monic, found))
    clusters = [
        _refine_multiple(monic, root, tol, max_iterations)
        if root.multiplicity > 1 and root.value != 0 else root
        for root in cluster_values(roots, tol, radii)]
    return sorted(clusters, key=lambda root: eigenvalue_key(root.value))


def matrix_jordan_structure(matrix, tol=DEFAULT_TOLERANCE):
    """Compute a full Jordan basis of a square matrix.

    Realized as the Jordan chains of the pencil lambda*I - A.

    Returns:
        (list of (complex, list of ndarray)): For each clustered eigenvalue,
            the chains as n x length arrays of column vectors.
    """
    # Imported here since spectral builds on this module.
    from ua_matrix_solvents import polynomial, spectral

    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if rows != cols:
        raise ValueError(
            f"Jordan structure needs a square matrix, got {rows}x{cols}.")
    if rows == 0:
        return list()
    pencil = polynomial.make_polynomial([-matrix, np.eye(rows)])
    det_poly = polynomial.determinant_polynomial(pencil)
    structure = list()
    for root in poly_roots(det_poly, tol):
        chains = spectral.jordan_chains_at(
            pencil, root.value, tol, multiplicity=root.multiplicity)
        structure.append((root.value, [chain.vectors for chain in chains]))
    return structure
