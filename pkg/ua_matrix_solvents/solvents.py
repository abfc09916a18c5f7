"""Solvents, cosolvents and separable bisolvents from invariant subspaces.

Every candidate is read off a SubspaceSelection: a prefix of each chain of
a standard pair, taken so that the selected columns number m. The
selected columns of X give a solvent when they are invertible, those of
Y a cosolvent, and the two together a bisolvent.
"""
import math
import logging
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from ua_matrix_solvents import solver_settings
from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import spectral
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)


class SingularQ0(Exception):
    """The selected columns [X~ | Y~] do not form an invertible matrix."""


class InvariantViolation(Exception):
    """Additive bisolvent data violate the separability invariants."""


@dataclass(frozen=True)
class SubspaceSelection():
    """Chain prefixes ((label, length), ...) with their T and Z dimensions."""
    prefixes: tuple
    t_dim: int
    z_dim: int

    @property
    def total(self):
        return self.t_dim + self.z_dim

    def on(self, pair):
        """The same prefixes, split by the sides they have in pair."""
        t_dim = sum(
            length for label, length in self.prefixes
            if pair.block(label).side == "T")
        return SubspaceSelection(
            self.prefixes, t_dim, self.total - t_dim)


@dataclass(frozen=True, eq=False)
class SolventRecord():
    """A solvent or cosolvent with the selection it came from."""
    matrix: np.ndarray
    selection: SubspaceSelection
    residual: float
    condition: float
    nilpotent: bool = False


@dataclass(frozen=True, eq=False)
class Bisolvent():
    """A separable bisolvent: S1, S2 commute and Pi separates them.

    alternatives holds further idempotents separating the same (S1, S2).
    """
    S1: np.ndarray
    S2: np.ndarray
    Pi: np.ndarray
    selection: SubspaceSelection = None
    condition: float = 1.0
    alternatives: tuple = ()

    @property
    def idempotents(self):
        return (self.Pi,) + tuple(self.alternatives)


@dataclass(frozen=True, eq=False)
class AdditiveBisolvent():
    """P1 = Pi S1 Pi and P2 = (I - Pi) S2 (I - Pi)."""
    P1: np.ndarray
    P2: np.ndarray
    Pi: np.ndarray


@dataclass(frozen=True)
class BisolventReport():
    commute: float
    idempotent: float
    separable: float
    residual: float

    def passed(self, tol=DEFAULT_TOLERANCE):
        return max(self.commute, self.idempotent, self.separable,
                   self.residual) <= tol.residual_tol


@dataclass(frozen=True, eq=False)
class ReducedBisolvent():
    """kind is one of solvent, cosolvent, both or neither."""
    kind: str
    solvent: np.ndarray = None
    cosolvent: np.ndarray = None


@dataclass(frozen=True)
class EnumerationResult():
    items: tuple
    infinite_family: bool
    bound: int
    truncated: bool = False
    warnings: tuple = field(default_factory=tuple)


def _norm(matrix):
    return float(np.linalg.norm(matrix))


def _same_matrix(first, second):
    scale = max(1.0, np.max(np.abs(first)), np.max(np.abs(second)))
    return np.max(np.abs(first - second)) <= solver_settings.DEDUP_TOL * scale


def iter_selections(pair, m, side="both"):
    """Yield every selection of chain prefixes with m columns in total.

    Blocks are visited in pair order, earlier blocks taking longer
    prefixes first.
    """
    blocks = [
        block for block in pair.blocks if side == "both"
        or block.side == side]
    capacity = [sum(block.size for block in blocks[i:])
                for i in range(len(blocks) + 1)]

    def extend(index, remaining, chosen):
        if remaining == 0:
            prefixes = tuple(chosen)
            t_dim = sum(
                length for label, length in prefixes
                if pair.block(label).side == "T")
            yield SubspaceSelection(prefixes, t_dim, m - t_dim)
            return
        if index == len(blocks) or capacity[index] < remaining:
            return
        block = blocks[index]
        for length in range(min(block.size, remaining), -1, -1):
            step = [(block.label, length)] if length else []
            yield from extend(index + 1, remaining - length, chosen + step)

    if m == 0:
        return
    yield from extend(0, m, [])


def enumerate_selections(pair, m, side="both"):
    """All selections of m chain-prefix columns; side is T, Z or both."""
    return list(iter_selections(pair, m, side))


def _bounded(selections, limit):
    """First limit selections and whether more remain."""
    taken = list(itertools.islice(selections, limit + 1))
    if len(taken) > limit:
        LOGGER.warning(
            f"Enumeration truncated after {limit} selections.")
        return taken[:limit], True
    return taken, False


def restrict(pair, selection):
    """Return (X~, T~, Y~, Z~) for the selected chain prefixes."""
    parts = {"T": ([], []), "Z": ([], [])}
    outer = {"T": pair.X, "Z": pair.Y}
    inner = {"T": pair.T, "Z": pair.Z}
    for label, length in selection.prefixes:
        block = pair.block(label)
        columns = block.columns(length)
        parts[block.side][0].append(outer[block.side][:, columns])
        parts[block.side][1].append(
            inner[block.side][np.ix_(columns, columns)])
    result = list()
    for side in ("T", "Z"):
        columns, pieces = parts[side]
        result.append(
            np.hstack(columns) if columns
            else np.zeros((pair.m, 0), complex))
        result.append(linalg_tools.direct_sum(pieces))
    return tuple(result)


def solvent_count_bound(poly, tol=DEFAULT_TOLERANCE):
    """Return C(M, n); P with an infinite solvent family has no bound."""
    report = polynomial.require_regular(poly, tol)
    return math.comb(report.M, poly.n)


def solvent_residual(poly, S, reverse=False):
    """Scaled norm of sum A_i S^i, or of sum A_i S^(k-i) for a cosolvent."""
    coeffs = poly.coeffs[::-1] if reverse else poly.coeffs
    residual = np.array(coeffs[-1], dtype=complex)
    for coeff in reversed(coeffs[:-1]):
        residual = residual @ S + coeff
    scale = poly.scale * max(1.0, _norm(S)) ** poly.k
    return linalg_tools.scaled_norm(residual, scale)


def _partial_family(pair, selection, side, tol):
    """True when the selection splits an eigenvalue with several chains.

    Such an invariant subspace takes part of the generalized eigenspace of
    a derogatory eigenvalue and lies in a continuous family.
    """
    selected = dict(selection.prefixes)
    blocks = pair.side_blocks(side)
    if not blocks:
        return False
    for root in linalg_tools.cluster_values(
            [block.eigenvalue for block in blocks], tol):
        radius = linalg_tools.cluster_reach(root.multiplicity, tol) * (
            1 + abs(root.value))
        members = [block for block in blocks
                   if abs(block.eigenvalue - root.value) <= radius]
        if len(members) < 2:
            continue
        chosen = sum(selected.get(block.label, 0) for block in members)
        if 0 < chosen < sum(block.size for block in members):
            return True
    return False


def _one_sided(poly, pair, side, tol, limit):
    """Shared enumeration for solvents (T side) and cosolvents (Z side)."""
    items = list()
    warnings = list()
    infinite_family = False
    selections, truncated = _bounded(
        iter_selections(pair, poly.n, side), limit)
    for selection in selections:
        X, T, Y, Z = restrict(pair, selection)
        outer, inner = (X, T) if side == "T" else (Y, Z)
        if linalg_tools.numerical_rank(outer, tol) < poly.n:
            continue
        condition = float(np.linalg.cond(outer))
        if condition > solver_settings.CONDITION_WARNING:
            message = (
                f"Selection {selection.prefixes} is admissible with"
                f" condition estimate {condition:.3e}.")
            LOGGER.warning(message)
            warnings.append(message)
        matrix = outer @ inner @ linalg_tools.invert(outer, tol)
        residual = solvent_residual(poly, matrix, reverse=side == "Z")
        if residual > tol.residual_tol:
            message = (
                f"Selection {selection.prefixes} gives residual"
                f" {residual:.3e}; discarded.")
            LOGGER.warning(message)
            warnings.append(message)
            continue
        infinite_family |= _partial_family(pair, selection, side, tol)
        nilpotent = side == "Z" and all(
            spectral.is_zero(pair.block(label).eigenvalue, tol)
            for label, _ in selection.prefixes)
        items.append(SolventRecord(
            matrix=matrix, selection=selection, residual=residual,
            condition=condition, nilpotent=nilpotent))
    return items, infinite_family, truncated, warnings


def solvents(poly, tol=DEFAULT_TOLERANCE, limit=solver_settings.MAX_ENUM):
    """Enumerate the right solvents S with sum A_i S^i = 0.

    One solvent is returned per admissible T-only selection. When an
    admissible selection keeps some but not all chains of an eigenvalue the
    solvents form continuous families and infinite_family is set.

    Raises:
        NotSquare
        NotRegular
        NoConvergence
    """
    report = polynomial.require_regular(poly, tol)
    pair = spectral.maximal_standard_pair(poly, tol)
    items, infinite_family, truncated, warnings = _one_sided(
        poly, pair, "T", tol, limit)
    LOGGER.info(f"Found {len(items)} solvents.")
    return EnumerationResult(
        items=tuple(items), infinite_family=infinite_family,
        bound=math.comb(report.M, poly.n), truncated=truncated,
        warnings=tuple(warnings))


def cosolvents(poly, tol=DEFAULT_TOLERANCE, limit=solver_settings.MAX_ENUM):
    """Enumerate the right cosolvents S with sum A_i S^(k-i) = 0.

    Every nonzero finite eigenvalue is moved to the Z side first; the
    cosolvents are then read off Z-only selections. A cosolvent made only of
    chains at infinity is nilpotent.

    Raises:
        NotSquare
        NotRegular
        NoConvergence
    """
    polynomial.require_regular(poly, tol)
    pair = spectral.maximal_standard_pair(poly, tol)
    nonzero = [
        block.eigenvalue for block in pair.side_blocks("T")
        if not spectral.is_zero(block.eigenvalue, tol)]
    if nonzero:
        pair = spectral.spectral_inversion(pair, nonzero, tol)
    items, infinite_family, truncated, warnings = _one_sided(
        poly, pair, "Z", tol, limit)
    LOGGER.info(f"Found {len(items)} cosolvents.")
    return EnumerationResult(
        items=tuple(items), infinite_family=infinite_family,
        bound=math.comb(pair.q, poly.n), truncated=truncated,
        warnings=tuple(warnings))


def bisolvent_from_selection(pair, selection, tol=DEFAULT_TOLERANCE):
    """Build (S1, S2, Pi) from a selection of m columns of [X | Y].

    With Q0 = [X~ | Y~]: S1 = Q0 (T~ + I) Q0^-1, S2 = Q0 (I + Z~) Q0^-1 and
    Pi = Q0 (I + 0) Q0^-1, where + is the direct sum.

    Raises:
        SingularQ0
    """
    selection = selection.on(pair)
    X, T, Y, Z = restrict(pair, selection)
    Q0 = np.hstack([X, Y])
    if linalg_tools.numerical_rank(Q0, tol) < pair.m:
        raise SingularQ0(
            f"Selection {selection.prefixes} gives a singular Q0.")
    Q0_inv = linalg_tools.invert(Q0, tol)
    t_dim, z_dim = selection.t_dim, selection.z_dim
    eye_t = np.eye(t_dim, dtype=complex)
    eye_z = np.eye(z_dim, dtype=complex)
    return Bisolvent(
        S1=Q0 @ linalg_tools.direct_sum([T, eye_z]) @ Q0_inv,
        S2=Q0 @ linalg_tools.direct_sum([eye_t, Z]) @ Q0_inv,
        Pi=Q0 @ linalg_tools.direct_sum(
            [eye_t, np.zeros((z_dim, z_dim))]) @ Q0_inv,
        selection=selection,
        condition=float(np.linalg.cond(Q0)))


def _with_idempotent(bisolvent, Pi):
    if any(_same_matrix(Pi, known) for known in bisolvent.idempotents):
        return bisolvent
    return replace(bisolvent, alternatives=bisolvent.alternatives + (Pi,))


def _idempotent_variants(pair, record, tol, inverted):
    """Add the idempotents found by moving finite chains of the record.

    Moving the chains of a nonzero eigenvalue to the Z side either leaves
    (S1, S2) unchanged, giving another separating idempotent, or yields a
    left-equivalent factor, which is dropped.
    """
    eigenvalues = linalg_tools.cluster_values([
        pair.block(label).eigenvalue for label, _ in record.selection.prefixes
        if pair.block(label).side == "T"
        and not spectral.is_zero(pair.block(label).eigenvalue, tol)], tol)
    values = [root.value for root in eigenvalues]
    for count in range(1, len(values) + 1):
        for subset in itertools.combinations(values, count):
            if subset not in inverted:
                inverted[subset] = spectral.spectral_inversion(
                    pair, subset, tol)
            try:
                variant = bisolvent_from_selection(
                    inverted[subset], record.selection, tol)
            except SingularQ0:
                continue
            if (_same_matrix(variant.S1, record.S1)
                    and _same_matrix(variant.S2, record.S2)):
                record = _with_idempotent(record, variant.Pi)
    return record


def bisolvents(poly, tol=DEFAULT_TOLERANCE, limit=solver_settings.MAX_ENUM):
    """Enumerate separable bisolvents up to left equivalence of F.

    Selections from the maximal standard pair with a nilpotent Z give one
    bisolvent each; equal (S1, S2) from different selections are merged
    into one record with several separating idempotents.

    Raises:
        NotSquare
        NotRegular
        NoConvergence
    """
    polynomial.require_regular(poly, tol)
    pair = spectral.maximal_standard_pair(poly, tol)
    records = list()
    warnings = list()
    infinite_family = False
    selections, truncated = _bounded(
        iter_selections(pair, poly.n, "both"), limit)
    for selection in selections:
        try:
            candidate = bisolvent_from_selection(pair, selection, tol)
        except SingularQ0:
            continue
        if candidate.condition > solver_settings.CONDITION_WARNING:
            message = (
                f"Selection {selection.prefixes} is admissible with"
                f" condition estimate {candidate.condition:.3e}.")
            LOGGER.warning(message)
            warnings.append(message)
        infinite_family |= any(
            _partial_family(pair, candidate.selection, side, tol)
            for side in ("T", "Z"))
        for index, record in enumerate(records):
            if (_same_matrix(candidate.S1, record.S1)
                    and _same_matrix(candidate.S2, record.S2)):
                records[index] = _with_idempotent(record, candidate.Pi)
                break
        else:
            records.append(candidate)

    inverted = dict()
    verified = list()
    for record in records:
        record = _idempotent_variants(pair, record, tol, inverted)
        check = verify_bisolvent(poly, record, tol)
        if not check.passed(tol):
            message = (
                f"Bisolvent from {record.selection.prefixes} fails its"
                f" checks with residual {check.residual:.3e}; discarded.")
            LOGGER.warning(message)
            warnings.append(message)
            continue
        verified.append(record)
    LOGGER.info(f"Found {len(verified)} bisolvents.")
    return EnumerationResult(
        items=tuple(verified), infinite_family=infinite_family,
        bound=math.comb(poly.n * poly.k, poly.n), truncated=truncated,
        warnings=tuple(warnings))


def _bisolvent_equation(poly, S1, S2):
    k = poly.k
    total = sum(
        coeff @ np.linalg.matrix_power(S1, i)
        @ np.linalg.matrix_power(S2, k - i)
        for i, coeff in enumerate(poly.coeffs))
    scale = poly.scale * max(1.0, _norm(S1), _norm(S2)) ** k
    return linalg_tools.scaled_norm(total, scale)


def verify_bisolvent(poly, bisolvent, tol=DEFAULT_TOLERANCE):
    """Measure commutation, idempotence, separation and the equation."""
    S1, S2, Pi = bisolvent.S1, bisolvent.S2, bisolvent.Pi
    eye = np.eye(S1.shape[0])
    complement = eye - Pi
    pi_scale = max(1.0, _norm(Pi)) ** 2
    separation = max(
        _norm(S1 - (Pi @ S1 @ Pi + complement)),
        _norm(S2 - (Pi + complement @ S2 @ complement)))
    return BisolventReport(
        commute=linalg_tools.scaled_norm(
            S1 @ S2 - S2 @ S1, max(1.0, _norm(S1) * _norm(S2))),
        idempotent=linalg_tools.scaled_norm(Pi @ Pi - Pi, pi_scale),
        separable=separation / (
            pi_scale * max(1.0, _norm(S1), _norm(S2))),
        residual=_bisolvent_equation(poly, S1, S2))


def reduce_bisolvent(poly, bisolvent, tol=DEFAULT_TOLERANCE):
    """Read a solvent (S2 invertible) or cosolvent (S1 invertible) off it.

    Each returned matrix is checked against P by direct substitution.
    """
    n = bisolvent.S1.shape[0]
    solvent = cosolvent = None
    if linalg_tools.numerical_rank(bisolvent.S2, tol) == n:
        solvent = linalg_tools.invert(bisolvent.S2, tol) @ bisolvent.S1
        if solvent_residual(poly, solvent) > tol.residual_tol:
            LOGGER.warning("Reduced solvent fails substitution; dropped.")
            solvent = None
    if linalg_tools.numerical_rank(bisolvent.S1, tol) == n:
        cosolvent = linalg_tools.invert(bisolvent.S1, tol) @ bisolvent.S2
        if solvent_residual(poly, cosolvent, reverse=True) > tol.residual_tol:
            LOGGER.warning("Reduced cosolvent fails substitution; dropped.")
            cosolvent = None
    if solvent is not None and cosolvent is not None:
        kind = "both"
    elif solvent is not None:
        kind = "solvent"
    elif cosolvent is not None:
        kind = "cosolvent"
    else:
        kind = "neither"
    return ReducedBisolvent(kind=kind, solvent=solvent, cosolvent=cosolvent)


def to_additive(bisolvent):
    """Return (Pi S1 Pi, (I - Pi) S2 (I - Pi), Pi)."""
    Pi = bisolvent.Pi
    complement = np.eye(Pi.shape[0]) - Pi
    return AdditiveBisolvent(
        P1=Pi @ bisolvent.S1 @ Pi,
        P2=complement @ bisolvent.S2 @ complement,
        Pi=Pi)


def _additive_power(matrix, exponent, zeroth):
    """matrix^exponent, with the zeroth power read as the given idempotent."""
    if exponent == 0:
        return zeroth
    return np.linalg.matrix_power(matrix, exponent)


def from_additive(additive, degree, tol=DEFAULT_TOLERANCE):
    """Recover (S1, S2) = (P1 + I - Pi, P2 + Pi).

    The additive powers are checked against the products of powers:
    P1^i + P2^j = S1^i S2^j for i, j up to degree, the degree of P, where
    P1^0 = Pi and P2^0 = I - Pi.

    Raises:
        InvariantViolation
    """
    P1, P2, Pi = additive.P1, additive.P2, additive.Pi
    eye = np.eye(Pi.shape[0])
    complement = eye - Pi
    scale = max(1.0, _norm(P1), _norm(P2), _norm(Pi)) ** 2
    checks = {
        "P1 P2 = 0": P1 @ P2,
        "P2 P1 = 0": P2 @ P1,
        "Pi^2 = Pi": Pi @ Pi - Pi,
        "P1 = Pi P1 Pi": P1 - Pi @ P1 @ Pi,
        "P2 = (I - Pi) P2 (I - Pi)": P2 - complement @ P2 @ complement,
    }
    for name, residual in checks.items():
        if linalg_tools.scaled_norm(residual, scale) > tol.residual_tol:
            raise InvariantViolation(f"Additive data violate {name}.")

    S1 = P1 + complement
    S2 = P2 + Pi
    for i in range(degree + 1):
        for j in range(degree + 1):
            left = (_additive_power(P1, i, Pi)
                    + _additive_power(P2, j, complement))
            right = (np.linalg.matrix_power(S1, i)
                     @ np.linalg.matrix_power(S2, j))
            bound = max(1.0, _norm(S1), _norm(S2)) ** (i + j)
            if linalg_tools.scaled_norm(left - right, bound) > \
                    tol.residual_tol:
                raise InvariantViolation(
                    f"P1^{i} + P2^{j} differs from S1^{i} S2^{j}.")
    return Bisolvent(S1=S1, S2=S2, Pi=Pi)


def additive_residual(poly, additive):
    """Scaled norm of sum A_i (P1^i + P2^(k-i))."""
    k = poly.k
    eye = np.eye(additive.Pi.shape[0])
    total = sum(
        coeff @ (_additive_power(additive.P1, i, additive.Pi)
                 + _additive_power(additive.P2, k - i, eye - additive.Pi))
        for i, coeff in enumerate(poly.coeffs))
    scale = poly.scale * max(
        1.0, _norm(additive.P1), _norm(additive.P2), _norm(additive.Pi)) ** k
    return linalg_tools.scaled_norm(total, scale)
