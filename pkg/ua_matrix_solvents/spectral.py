"""Jordan chains and decomposable standard pairs of regular polynomials.

A standard pair (X, Y, T, Z) stacks the finite Jordan chains of P in
(X, T) and the chains of the reversed polynomial at zero in (Y, Z). Both
T and Z are kept block upper triangular with one block per chain; the
blocks carry stable labels so that a chain can be followed across
spectral inversion.
"""
import cmath
import logging
from dataclasses import dataclass, replace

import numpy as np

from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)

# The point at infinity.
INF = float("inf")

# Rank-threshold escalations tried before a chain computation gives up.
LOOSENING_FACTORS = (1.0, 1e2, 1e4)


class NotAnEigenvalue(Exception):
    """The requested point is not an eigenvalue of the polynomial."""


class EigenvalueNotPresent(Exception):
    """A spectral inversion names an eigenvalue missing from the pair."""


class ZeroEigenvalueInversion(Exception):
    """A zero eigenvalue cannot be moved through spectral inversion."""


class RankDeficientPair(Exception):
    """The pair does not determine a polynomial: its controllability
    matrix is rank deficient or has the wrong shape."""


def is_infinite(point):
    return isinstance(point, (int, float, complex)) and cmath.isinf(point)


def is_zero(value, tol=DEFAULT_TOLERANCE):
    """True when value lies within the cluster radius of zero."""
    return abs(value) <= tol.cluster_radius


def jordan_block(eigenvalue, size):
    """Upper triangular Jordan block with ones on the superdiagonal."""
    block = eigenvalue * np.eye(size, dtype=complex)
    block += np.eye(size, k=1, dtype=complex)
    return block


def _power(matrix, exponent):
    if matrix.shape[0] == 0:
        return matrix.copy()
    return np.linalg.matrix_power(matrix, exponent)


@dataclass(frozen=True, eq=False)
class JordanChain():
    """A right Jordan chain stored as the columns v1, ..., v_length."""
    eigenvalue: complex
    vectors: np.ndarray

    @property
    def length(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class PairBlock():
    """One chain of a standard pair.

    side is "T" for a finite chain held in (X, T) and "Z" for a chain held
    in (Y, Z); eigenvalue is the eigenvalue of the T or Z block itself.
    """
    label: int
    side: str
    eigenvalue: complex
    start: int
    size: int

    def columns(self, length=None):
        stop = self.start + (self.size if length is None else length)
        return list(range(self.start, stop))


@dataclass(frozen=True, eq=False)
class StandardPair():
    """The matrices X (m x p), Y (m x q), T (p x p), Z (q x q).

    blocks is None for a pair whose T and Z have no known block structure;
    jordan_normal_pair recovers it.
    """
    X: np.ndarray
    Y: np.ndarray
    T: np.ndarray
    Z: np.ndarray
    blocks: tuple = None

    @property
    def m(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.T.shape[0]

    @property
    def q(self):
        return self.Z.shape[0]

    def side_blocks(self, side):
        return [block for block in self.blocks if block.side == side]

    def block(self, label):
        for block in self.blocks:
            if block.label == label:
                return block
        raise KeyError(f"No block labelled {label}.")

    @classmethod
    def from_matrices(cls, X, Y, T, Z, tol=DEFAULT_TOLERANCE):
        """Build a pair with block structure from plain matrices.

        Block upper triangular T and Z with constant block diagonals are
        kept as they are; otherwise the pair is gauged to Jordan form.

        Raises:
            DimensionMismatch
        """
        X, Y, T, Z = (_as_block(value) for value in (X, Y, T, Z))
        if X.shape[1] != T.shape[0] or T.shape[0] != T.shape[1]:
            raise polynomial.DimensionMismatch(
                f"X is {X.shape[0]}x{X.shape[1]} but T is"
                f" {T.shape[0]}x{T.shape[1]}.")
        if Y.shape[1] != Z.shape[0] or Z.shape[0] != Z.shape[1]:
            raise polynomial.DimensionMismatch(
                f"Y is {Y.shape[0]}x{Y.shape[1]} but Z is"
                f" {Z.shape[0]}x{Z.shape[1]}.")
        if X.shape[0] != Y.shape[0]:
            raise polynomial.DimensionMismatch(
                f"X has {X.shape[0]} rows but Y has {Y.shape[0]}.")

        sides = list()
        for side, outer, inner in (("T", X, T), ("Z", Y, Z)):
            found = _detect_blocks(inner, tol)
            if found is None:
                LOGGER.info(f"Bringing {side} to Jordan form.")
                basis, inner, found = _jordanize(inner, tol)
                outer = outer @ basis
            sides.append((outer, inner, found))

        blocks = list()
        for side, (_, _, found) in zip(("T", "Z"), sides):
            for eigenvalue, start, size in found:
                blocks.append(PairBlock(
                    len(blocks), side, eigenvalue, start, size))
        (X, T, _), (Y, Z, _) = sides
        return cls(X=X, Y=Y, T=T, Z=Z, blocks=tuple(blocks))


@dataclass(frozen=True, eq=False)
class ControllabilityMatrix():
    """Q_j: block row i is [X T^i | Y Z^(j-1-i)] for i < j."""
    Q: np.ndarray
    depth: int


@dataclass(frozen=True)
class PairReport():
    """Residuals and rank of a candidate standard pair."""
    residual_finite: float
    residual_infinite: float
    rank: int
    rank_ok: bool

    def passed(self, tol=DEFAULT_TOLERANCE):
        return (self.rank_ok
                and self.residual_finite <= tol.residual_tol
                and self.residual_infinite <= tol.residual_tol)


def _as_block(value):
    matrix = np.asarray(value, dtype=complex)
    if matrix.ndim != 2:
        raise polynomial.DimensionMismatch(
            f"Expected a matrix, got shape {matrix.shape}.")
    return matrix


def _detect_blocks(matrix, tol):
    """Split a block upper triangular matrix into constant-diagonal blocks.

    Returns:
        (list of (complex, int, int) or None): eigenvalue, start and size
            per block, or None when the matrix has no such structure.
    """
    size = matrix.shape[0]
    if size == 0:
        return list()
    tiny = 1e-12 * max(1.0, np.max(np.abs(matrix)))
    if np.any(np.abs(np.tril(matrix, -1)) > tiny):
        return None
    starts = [0] + [
        i for i in range(1, size) if np.max(np.abs(matrix[:i, i:])) <= tiny]
    found = list()
    for start, end in zip(starts, starts[1:] + [size]):
        diagonal = np.diag(matrix)[start:end]
        radius = tol.cluster_radius * (1 + np.max(np.abs(diagonal)))
        if np.max(np.abs(diagonal - diagonal[0])) > radius:
            return None
        found.append((complex(np.mean(diagonal)), start, end - start))
    return found


def _jordanize(matrix, tol):
    """Return (basis, J, blocks) with matrix @ basis = basis @ J."""
    columns = list()
    jordan_blocks = list()
    found = list()
    start = 0
    for eigenvalue, chains in linalg_tools.matrix_jordan_structure(
            matrix, tol):
        for vectors in chains:
            columns.append(vectors)
            jordan_blocks.append(jordan_block(eigenvalue, vectors.shape[1]))
            found.append((eigenvalue, start, vectors.shape[1]))
            start += vectors.shape[1]
    size = matrix.shape[0]
    if start != size:
        raise linalg_tools.NoConvergence(
            f"Jordan basis has {start} columns for a {size}x{size} matrix.")
    basis = np.hstack(columns) if columns else np.zeros((0, 0), complex)
    return basis, linalg_tools.direct_sum(jordan_blocks), found


def jordan_normal_pair(pair, tol=DEFAULT_TOLERANCE):
    """Return pair itself when it carries blocks, else a block form of it."""
    if pair.blocks is not None:
        return pair
    return StandardPair.from_matrices(pair.X, pair.Y, pair.T, pair.Z, tol)


def evaluation_scale(poly, point):
    """Sum of norm(A_i) * max(1, |point|)**i, the size of P near point."""
    radius = max(1.0, abs(point))
    return float(sum(
        np.linalg.norm(coeff) * radius ** i
        for i, coeff in enumerate(poly.coeffs)))


def _block_toeplitz(taylor, length):
    """Lower block triangular Toeplitz matrix of Taylor coefficients."""
    n, m = taylor[0].shape
    matrix = np.zeros((n * length, m * length), dtype=complex)
    for row in range(length):
        for col in range(row + 1):
            matrix[row * n:(row + 1) * n, col * m:(col + 1) * m] = (
                taylor[row - col])
    return matrix


def _kernel_filtration(target, point, multiplicity, tol):
    """Kernels N_l of the Toeplitz matrices until dim N_l = multiplicity.

    Returns:
        (list of ndarray or None): The kernels, or None when the
            dimensions stall or grow inconsistently.
    """
    taylor = [
        polynomial.taylor_coeff(target, point, order)
        for order in range(multiplicity)]
    scale = evaluation_scale(target, point)
    kernels = list()
    previous, increment = 0, None
    for length in range(1, multiplicity + 1):
        basis = linalg_tools.nullspace(
            _block_toeplitz(taylor, length), tol, scale)
        step = basis.shape[1] - previous
        if step <= 0 or (increment is not None and step > increment):
            return None
        kernels.append(basis)
        previous, increment = basis.shape[1], step
        if previous == multiplicity:
            return kernels
        if previous > multiplicity:
            return None
    return None


def _normalize_chain(vectors):
    """Scale so v1 has unit norm and its first nonzero entry is real > 0."""
    head = vectors[:, 0]
    norm = np.linalg.norm(head)
    magnitudes = np.abs(head)
    first = int(np.argmax(magnitudes > np.sqrt(np.finfo(float).eps) * norm))
    phase = head[first] / magnitudes[first]
    return vectors / (norm * phase)


def _canonical_chains(kernels, n, tol):
    """Extract a canonical set of chains from the kernel filtration."""
    eigenspaces = [
        linalg_tools.column_space(kernel[:n, :], tol) for kernel in kernels]
    dims = [kernel.shape[1] for kernel in kernels]
    heads = [dims[0]] + [
        later - earlier for earlier, later in zip(dims, dims[1:])]
    chains = list()
    above = np.zeros((n, 0), dtype=complex)
    for length in range(len(kernels), 0, -1):
        space = eigenspaces[length - 1]
        expected = heads[length - 1] - (
            heads[length] if length < len(kernels) else 0)
        if expected > 0:
            complement = space - above @ (above.conj().T @ space)
            directions = np.linalg.svd(complement)[0][:, :expected]
            kernel = kernels[length - 1]
            for head in directions.T:
                weights = np.linalg.lstsq(kernel[:n, :], head, rcond=None)[0]
                stacked = kernel @ weights
                chains.append(_normalize_chain(stacked.reshape(length, n).T))
        above = space
    return chains


def jordan_chains_at(poly, point, tol=DEFAULT_TOLERANCE, multiplicity=None):
    """Compute a canonical set of Jordan chains of P at a point.

    At INF the chains are those of the reversed polynomial at zero.

    Arguments:
        poly (MatrixPolynomial): A regular polynomial.
        point (complex): The eigenvalue, or INF.

    Keyword Arguments:
        multiplicity (int): The algebraic multiplicity when already known;
            computed from det P otherwise.

    Returns:
        (list of JordanChain): Longest first; the lengths sum to the
            algebraic multiplicity.

    Raises:
        NotAnEigenvalue
        NotRegular
        NoConvergence
    """
    if is_infinite(point):
        target, at, eigenvalue = polynomial.reverse(poly), 0j, INF
        if multiplicity is None:
            multiplicity = polynomial.require_regular(
                poly, tol).infinite_mult_total
    else:
        target, at, eigenvalue = poly, complex(point), complex(point)
        if multiplicity is None:
            multiplicity = _finite_multiplicity(poly, at, tol)

    if multiplicity == 0:
        raise NotAnEigenvalue(f"{point} is not an eigenvalue.")

    value = polynomial.eval_polynomial(target, at)
    scale = evaluation_scale(target, at)
    singular = False
    for factor in LOOSENING_FACTORS:
        loose = tol.loosened(factor)
        if linalg_tools.numerical_rank(value, loose, scale) == target.n:
            continue
        singular = True
        kernels = _kernel_filtration(target, at, multiplicity, loose)
        if kernels is not None:
            if factor != 1.0:
                LOGGER.info(
                    f"Chains at {point} needed rank_tol scaled by {factor}.")
            break
    else:
        if not singular:
            raise NotAnEigenvalue(f"{point} is not an eigenvalue.")
        raise linalg_tools.NoConvergence(
            f"Chain lengths at {point} do not add up to the algebraic"
            f" multiplicity {multiplicity}.")

    return [
        JordanChain(eigenvalue=eigenvalue, vectors=vectors)
        for vectors in _canonical_chains(kernels, target.n, tol)]


def _finite_multiplicity(poly, point, tol):
    report = polynomial.require_regular(poly, tol)
    if report.M == 0:
        return 0
    for root in linalg_tools.poly_roots(report.det_poly, tol):
        radius = linalg_tools.cluster_reach(root.multiplicity, tol) * (
            1 + abs(root.value))
        if abs(root.value - point) <= radius:
            return root.multiplicity
    return 0


def _assemble(chain_groups, m):
    """Stack chains into (outer, inner, blocks) for one side of a pair."""
    columns = list()
    inner = list()
    found = list()
    start = 0
    for eigenvalue, chains in chain_groups:
        for chain in chains:
            columns.append(chain.vectors)
            inner.append(jordan_block(eigenvalue, chain.length))
            found.append((eigenvalue, start, chain.length))
            start += chain.length
    outer = np.hstack(columns) if columns else np.zeros((m, 0), complex)
    return outer, linalg_tools.direct_sum(inner), found


def pair_with_blocks(X, Y, T, Z, t_found, z_found, labels=None):
    blocks = list()
    for side, found in (("T", t_found), ("Z", z_found)):
        for eigenvalue, start, size in found:
            label = len(blocks) if labels is None else labels[len(blocks)]
            blocks.append(PairBlock(label, side, eigenvalue, start, size))
    return StandardPair(X=X, Y=Y, T=T, Z=Z, blocks=tuple(blocks))


def maximal_standard_pair(poly, tol=DEFAULT_TOLERANCE):
    """Build the decomposable standard pair of a regular P.

    T holds one Jordan block per finite chain, eigenvalues in descending
    order; Z is nilpotent with one block per chain at infinity.
    The pair is checked with verify_standard_pair before it is returned.

    Raises:
        NotRegular
        NoConvergence
    """
    report = polynomial.require_regular(poly, tol)
    finite = list()
    if report.M > 0:
        for root in linalg_tools.poly_roots(report.det_poly, tol):
            finite.append((root.value, jordan_chains_at(
                poly, root.value, tol, multiplicity=root.multiplicity)))
    infinite = list()
    if report.infinite_mult_total > 0:
        infinite.append((0j, jordan_chains_at(
            poly, INF, tol, multiplicity=report.infinite_mult_total)))

    X, T, t_found = _assemble(finite, poly.n)
    Y, Z, z_found = _assemble(infinite, poly.n)
    pair = pair_with_blocks(X, Y, T, Z, t_found, z_found)

    check = verify_standard_pair(poly, pair, tol)
    if not check.passed(tol):
        raise linalg_tools.NoConvergence(
            f"The computed standard pair has residuals"
            f" {check.residual_finite:.3e} / {check.residual_infinite:.3e}"
            f" and rank {check.rank} of {pair.p + pair.q}.")
    LOGGER.info(
        f"Standard pair with p = {pair.p}, q = {pair.q} and"
        f" {len(pair.blocks)} chains.")
    return pair


def controllability(pair, depth):
    """Build Q_depth of a pair."""
    rows = list()
    for i in range(depth):
        rows.append(np.hstack([
            pair.X @ _power(pair.T, i),
            pair.Y @ _power(pair.Z, depth - 1 - i)]))
    return ControllabilityMatrix(Q=np.vstack(rows), depth=depth)


def verify_standard_pair(poly, pair, tol=DEFAULT_TOLERANCE):
    """Check sum A_i X T^i = 0, sum A_i Y Z^(k-i) = 0 and rank Q_k.

    Raises:
        DimensionMismatch
    """
    if pair.m != poly.m:
        raise polynomial.DimensionMismatch(
            f"The pair has {pair.m} rows but P has {poly.m} columns.")
    k = poly.k
    finite = sum(
        coeff @ pair.X @ _power(pair.T, i)
        for i, coeff in enumerate(poly.coeffs))
    infinite = sum(
        coeff @ pair.Y @ _power(pair.Z, k - i)
        for i, coeff in enumerate(poly.coeffs))
    finite_scale = poly.scale * np.linalg.norm(pair.X) * max(
        1.0, np.linalg.norm(pair.T)) ** k
    infinite_scale = poly.scale * np.linalg.norm(pair.Y) * max(
        1.0, np.linalg.norm(pair.Z)) ** k
    size = pair.p + pair.q
    rank = linalg_tools.numerical_rank(
        controllability(pair, k).Q, tol) if size else 0
    return PairReport(
        residual_finite=linalg_tools.scaled_norm(finite, finite_scale),
        residual_infinite=linalg_tools.scaled_norm(infinite, infinite_scale),
        rank=rank,
        rank_ok=rank == size)


def _matching_blocks(pair, side, eigenvalue, tol):
    matches = list()
    for block in pair.side_blocks(side):
        if side == "Z" and is_zero(block.eigenvalue, tol):
            continue
        value = block.eigenvalue if side == "T" else 1 / block.eigenvalue
        if abs(value - eigenvalue) <= tol.cluster_radius * (1 + abs(value)):
            matches.append(block)
    return matches


def spectral_inversion(pair, eigenvalues, tol=DEFAULT_TOLERANCE,
                       to_side="Z"):
    """Move the chains of the given eigenvalues between T and Z.

    With to_side="Z" the T blocks of the eigenvalues are inverted and placed
    in front of Z; with to_side="T" the Z blocks whose inverses are the
    eigenvalues are inverted and appended to T. Labels are preserved.

    Raises:
        ZeroEigenvalueInversion
        EigenvalueNotPresent
    """
    pair = jordan_normal_pair(pair, tol)
    source = "T" if to_side == "Z" else "Z"
    moving = list()
    for eigenvalue in eigenvalues:
        if is_zero(eigenvalue, tol):
            raise ZeroEigenvalueInversion(
                "Zero is the infinite eigenvalue of the reversed polynomial"
                " and cannot be inverted.")
        matches = _matching_blocks(pair, source, complex(eigenvalue), tol)
        if not matches:
            raise EigenvalueNotPresent(
                f"{eigenvalue} is not an eigenvalue of the {source} side.")
        moving.extend(block for block in matches if block not in moving)
    if not moving:
        return pair

    moving = [block for block in pair.blocks if block in moving]
    kept = {
        side: [block for block in pair.side_blocks(side)
               if block not in moving]
        for side in ("T", "Z")}
    outer = {"T": pair.X, "Z": pair.Y}
    inner = {"T": pair.T, "Z": pair.Z}

    def gather(blocks, invert=False):
        columns = [outer[block.side][:, block.columns()] for block in blocks]
        pieces = list()
        for block in blocks:
            cols = block.columns()
            piece = inner[block.side][np.ix_(cols, cols)]
            pieces.append(linalg_tools.invert(piece, tol) if invert else piece)
        entries = [
            (1 / block.eigenvalue if invert else block.eigenvalue, block.size)
            for block in blocks]
        return columns, pieces, entries

    stay_cols, stay_pieces, stay_entries = gather(kept[source])
    move_cols, move_pieces, move_entries = gather(moving, invert=True)
    other_cols, other_pieces, other_entries = gather(kept[to_side])

    if to_side == "Z":
        t_parts = (stay_cols, stay_pieces, stay_entries, kept["T"])
        z_parts = (move_cols + other_cols, move_pieces + other_pieces,
                   move_entries + other_entries, moving + kept["Z"])
    else:
        t_parts = (other_cols + move_cols, other_pieces + move_pieces,
                   other_entries + move_entries, kept["T"] + moving)
        z_parts = (stay_cols, stay_pieces, stay_entries, kept["Z"])

    matrices = list()
    found = list()
    labels = list()
    for columns, pieces, entries, blocks in (t_parts, z_parts):
        matrices.append(
            np.hstack(columns) if columns
            else np.zeros((pair.m, 0), complex))
        matrices.append(linalg_tools.direct_sum(pieces))
        side_found = list()
        start = 0
        for eigenvalue, size in entries:
            side_found.append((eigenvalue, start, size))
            start += size
        found.append(side_found)
        labels.extend(block.label for block in blocks)
    X, T, Y, Z = matrices
    LOGGER.info(
        f"Moved {len(moving)} chains to the {to_side} side.")
    return pair_with_blocks(X, Y, T, Z, found[0], found[1], labels)


def merge_pairs(pairs, depth, tol=DEFAULT_TOLERANCE):
    """Concatenate pairs block-diagonally and re-check controllability.

    Returns:
        (StandardPair, bool): The merged pair, relabelled in order, and
            whether Q_depth has full column rank.

    Raises:
        DimensionMismatch
    """
    pairs = [jordan_normal_pair(pair, tol) for pair in pairs]
    rows = {pair.m for pair in pairs}
    if len(rows) != 1:
        raise polynomial.DimensionMismatch(
            f"Pairs with row counts {sorted(rows)} cannot be merged.")
    blocks = list()
    offsets = {"T": 0, "Z": 0}
    for pair in pairs:
        for block in pair.blocks:
            blocks.append(replace(
                block, label=len(blocks),
                start=block.start + offsets[block.side]))
        offsets["T"] += pair.p
        offsets["Z"] += pair.q
    blocks.sort(key=lambda block: block.side)
    merged = StandardPair(
        X=np.hstack([pair.X for pair in pairs]),
        Y=np.hstack([pair.Y for pair in pairs]),
        T=linalg_tools.direct_sum([pair.T for pair in pairs]),
        Z=linalg_tools.direct_sum([pair.Z for pair in pairs]),
        blocks=tuple(blocks))
    size = merged.p + merged.q
    rank = linalg_tools.numerical_rank(
        controllability(merged, depth).Q, tol) if size else 0
    if rank < size:
        LOGGER.info(f"Merged pair has rank {rank} of {size}.")
    return merged, rank == size


def reconstruct_from_pair(pair, n, k, tol=DEFAULT_TOLERANCE):
    """Recover P from a standard pair as the left kernel of its moments.

    The coefficient rows span the left kernel of the matrix whose block row
    i is [X T^i | Y Z^(k-i)] for i = 0..k. P is made monic when its leading
    coefficient is nonsingular, comonic when A_0 is, and otherwise keeps
    orthonormal coefficient rows.

    Raises:
        RankDeficientPair
    """
    if pair.p + pair.q != n * k or pair.m != n:
        raise RankDeficientPair(
            f"A pair with p + q = {pair.p + pair.q} and {pair.m} rows does"
            f" not describe a {n}x{n} polynomial of degree {k}.")
    rank = linalg_tools.numerical_rank(controllability(pair, k).Q, tol)
    if rank < n * k:
        raise RankDeficientPair(
            f"Q_{k} has rank {rank}, not {n * k}.")
    moments = np.vstack([
        np.hstack([pair.X @ _power(pair.T, i),
                   pair.Y @ _power(pair.Z, k - i)])
        for i in range(k + 1)])
    left = linalg_tools.nullspace(moments.T, tol)
    if left.shape[1] != n:
        raise RankDeficientPair(
            f"The left kernel has dimension {left.shape[1]}, not {n}.")
    rows = left.T
    coeffs = [rows[:, i * n:(i + 1) * n] for i in range(k + 1)]
    for anchor in (coeffs[k], coeffs[0]):
        if linalg_tools.numerical_rank(anchor, tol) == n:
            scale = linalg_tools.invert(anchor, tol)
            coeffs = [scale @ coeff for coeff in coeffs]
            break
    return polynomial.make_polynomial(coeffs)


def gauge_transform(pair, G, H):
    """Return (X G, Y H, G^-1 T G, H^-1 Z H); block structure is dropped.

    Raises:
        SingularMatrix
    """
    G_inv = linalg_tools.invert(G)
    H_inv = linalg_tools.invert(H)
    return StandardPair(
        X=pair.X @ G, Y=pair.Y @ H,
        T=G_inv @ pair.T @ G, Z=H_inv @ pair.Z @ H)
