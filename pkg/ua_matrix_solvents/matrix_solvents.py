"""Computes spectral data, solvents and right factors of matrix polynomials."""
import sys
import math
import logging
import argparse

from ua_matrix_solvents import solver_settings
from ua_matrix_solvents import linalg_tools
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import linearize
from ua_matrix_solvents import spectral
from ua_matrix_solvents import solvents
from ua_matrix_solvents import factor
from ua_matrix_solvents import report_tools


LOGGER = logging.getLogger(__name__)

COMMANDS = (
    "analyze", "pair", "solvents", "cosolvents", "bisolvents", "factor",
    "verify", "reconstruct")

INPUT_ERRORS = (
    report_tools.ParseError,
    polynomial.DimensionMismatch,
    polynomial.ZeroPolynomialInput,
    polynomial.NotSquare,
    spectral.EigenvalueNotPresent,
    spectral.ZeroEigenvalueInversion,
    spectral.RankDeficientPair,
    OSError,
)
NOT_REGULAR_ERRORS = (
    polynomial.NotRegular,
    linearize.SingularPencil,
    factor.NotRegularFactor,
)
NUMERICAL_ERRORS = (
    linalg_tools.NoConvergence,
    linalg_tools.SingularMatrix,
    factor.SpectrumAvoidanceFailed,
    factor.NotADivisor,
    factor.DegenerateFactor,
)


def setup_arguments(argv=None):
    parser = argparse.ArgumentParser(
        description=(
            "Spectral data, solvents, bisolvents and right pencil factors"
            " of a regular matrix polynomial."))
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument(
        "path", help="Polynomial file; a pair file for reconstruct.")
    parser.add_argument("--tol", dest="tol", type=float, default=None)
    parser.add_argument(
        "--rank-tol", dest="rank_tol", type=float, default=None)
    parser.add_argument(
        "--cluster-radius", dest="cluster_radius", type=float, default=None)
    parser.add_argument(
        "--format", dest="format", choices=("json", "text"), default="text")
    parser.add_argument(
        "--invert", dest="invert", default=None,
        help="Comma separated eigenvalues to move to the Z side (pair).")
    parser.add_argument(
        "--max-enum", dest="max_enum", type=int,
        default=solver_settings.MAX_ENUM)
    parser.add_argument(
        "--companion", dest="companion", default=None,
        help="File with the pair, solvent, bisolvent or factor to verify.")
    parser.add_argument("--verbose", dest="verbose", action="store_true")

    return parser.parse_args(argv)


def build_tolerance(flags):
    """Tolerance from --tol, --rank-tol and --cluster-radius."""
    if flags.tol is not None:
        return linalg_tools.Tolerance.from_residual(
            flags.tol, flags.rank_tol, flags.cluster_radius)
    default = linalg_tools.DEFAULT_TOLERANCE
    return linalg_tools.Tolerance(
        rank_tol=(
            default.rank_tol if flags.rank_tol is None else flags.rank_tol),
        cluster_radius=(
            default.cluster_radius if flags.cluster_radius is None
            else flags.cluster_radius),
        residual_tol=default.residual_tol)


def parse_eigenvalues(text):
    """Parse "2,-2,1+1j" into complex values.

    Raises:
        ParseError
    """
    values = list()
    for part in text.split(","):
        try:
            values.append(complex(part.strip().replace(" ", "")))
        except ValueError:
            raise report_tools.ParseError(
                f"--invert: {part!r} is not a complex number.")
    return values


def _regularity_payload(report):
    return {
        "regular": report.regular,
        "M": report.M,
        "infinite_mult_total": report.infinite_mult_total,
        "essentially_monic": report.essentially_monic,
        "essentially_comonic": report.essentially_comonic,
        "det_coefficients": list(report.det_poly.coefficients),
    }


def _spectral_payload(data):
    return {
        "finite": [
            {"eigenvalue": value, "partial_multiplicities": list(sizes)}
            for value, sizes in data.finite],
        "infinite": list(data.infinite),
    }


def _pair_check_payload(check):
    return {
        "residual_finite": check.residual_finite,
        "residual_infinite": check.residual_infinite,
        "rank": check.rank,
        "rank_ok": check.rank_ok,
    }


def _pair_payload(standard_pair):
    return {
        "X": standard_pair.X,
        "Y": standard_pair.Y,
        "T": standard_pair.T,
        "Z": standard_pair.Z,
        "blocks": [
            {"label": block.label, "side": block.side,
             "eigenvalue": block.eigenvalue, "size": block.size}
            for block in standard_pair.blocks],
    }


def _polynomial_payload(poly):
    return {
        "n": poly.n,
        "m": poly.m,
        "k": poly.k,
        "coefficients": list(poly.coeffs),
    }


def _enumeration_payload(result, entries):
    return {
        "count": len(result.items),
        "bound": result.bound,
        "infinite_family": result.infinite_family,
        "truncated": result.truncated,
        "items": entries,
    }


def analyze(poly, tol, flags):
    report = polynomial.require_regular(poly, tol)
    data = linearize.polynomial_spectral_data(poly, tol)
    payload = {
        "spectral_data": _spectral_payload(data),
        "solvent_bound": math.comb(report.M, poly.n),
    }
    return report, payload, []


def pair(poly, tol, flags):
    report = polynomial.require_regular(poly, tol)
    standard_pair = spectral.maximal_standard_pair(poly, tol)
    if flags.invert:
        standard_pair = spectral.spectral_inversion(
            standard_pair, parse_eigenvalues(flags.invert), tol)
    check = spectral.verify_standard_pair(poly, standard_pair, tol)
    payload = {
        "p": standard_pair.p,
        "q": standard_pair.q,
        "pair": _pair_payload(standard_pair),
        "check": _pair_check_payload(check),
    }
    return report, payload, []


def _solvent_entries(result):
    return [
        {"matrix": item.matrix,
         "chains": [
             {"label": label, "length": length}
             for label, length in item.selection.prefixes],
         "residual": item.residual,
         "condition": item.condition,
         "nilpotent": item.nilpotent}
        for item in result.items]


def solvent_list(poly, tol, flags):
    report = polynomial.require_regular(poly, tol)
    result = solvents.solvents(poly, tol, flags.max_enum)
    return (report, _enumeration_payload(result, _solvent_entries(result)),
            list(result.warnings))


def cosolvent_list(poly, tol, flags):
    report = polynomial.require_regular(poly, tol)
    result = solvents.cosolvents(poly, tol, flags.max_enum)
    return (report, _enumeration_payload(result, _solvent_entries(result)),
            list(result.warnings))


def _bisolvent_entry(poly, bisolvent, tol):
    reduced = solvents.reduce_bisolvent(poly, bisolvent, tol)
    entry = {
        "S1": bisolvent.S1,
        "S2": bisolvent.S2,
        "idempotents": list(bisolvent.idempotents),
        "reduces_to": reduced.kind,
        "condition": bisolvent.condition,
    }
    if bisolvent.selection is not None:
        entry["chains"] = [
            {"label": label, "length": length}
            for label, length in bisolvent.selection.prefixes]
    return entry


def bisolvent_list(poly, tol, flags):
    report = polynomial.require_regular(poly, tol)
    result = solvents.bisolvents(poly, tol, flags.max_enum)
    entries = [_bisolvent_entry(poly, item, tol) for item in result.items]
    return (report, _enumeration_payload(result, entries),
            list(result.warnings))


def factor_list(poly, tol, flags):
    report = polynomial.require_regular(poly, tol)
    result = solvents.bisolvents(poly, tol, flags.max_enum)
    atlas = factor.factors_from_bisolvents(poly, result.items, tol)
    entries = [
        {"A1": entry.factor.a1,
         "A0": entry.factor.a0,
         "quotient": _polynomial_payload(entry.quotient),
         "max_rel_residual": entry.max_rel_residual}
        for entry in atlas]
    payload = {
        "count": len(atlas),
        "truncated": result.truncated,
        "items": entries,
    }
    return report, payload, list(result.warnings)


def verify(poly, tol, flags):
    if flags.companion is None:
        raise report_tools.ParseError("verify needs --companion <file>.")
    report = polynomial.require_regular(poly, tol)
    kind, value = report_tools.load_companion(flags.companion, tol)
    if kind == "pair":
        standard_pair, _ = value
        check = spectral.verify_standard_pair(poly, standard_pair, tol)
        checks = _pair_check_payload(check)
        passed = check.passed(tol)
    elif kind == "solvent":
        matrix, is_cosolvent = value
        residual = solvents.solvent_residual(
            poly, matrix, reverse=is_cosolvent)
        checks = {"residual": residual, "cosolvent": is_cosolvent}
        passed = residual <= tol.residual_tol
    elif kind == "bisolvent":
        check = solvents.verify_bisolvent(poly, value, tol)
        checks = {
            "commute": check.commute,
            "idempotent": check.idempotent,
            "separable": check.separable,
            "residual": check.residual,
        }
        passed = check.passed(tol)
    else:
        check = factor.verify_right_factor(poly, value, tol)
        checks = {
            "divides": check.divides,
            "residual": check.residual,
            "atlas_index": check.atlas_index,
            "bisolvent_ok": check.bisolvent_ok,
        }
        passed = check.divides and check.bisolvent_ok
    return report, {"kind": kind, "checks": checks, "passed": passed}, []


def reconstruct(path, tol):
    document = report_tools.load_document(path)
    standard_pair, depth = report_tools.pair_from_document(
        document, tol, path)
    n = standard_pair.m
    if depth is None:
        depth = (standard_pair.p + standard_pair.q) // max(n, 1)
    poly = spectral.reconstruct_from_pair(standard_pair, n, depth, tol)
    report = polynomial.regularity(poly, tol)
    return report, {
        "polynomial": _polynomial_payload(poly)}, []


HANDLERS = {
    "analyze": analyze,
    "pair": pair,
    "solvents": solvent_list,
    "cosolvents": cosolvent_list,
    "bisolvents": bisolvent_list,
    "factor": factor_list,
    "verify": verify,
}


def run(command, path, flags):
    """Execute a command and return the report dictionary.

    Raises:
        Any error in INPUT_ERRORS, NOT_REGULAR_ERRORS or NUMERICAL_ERRORS.
    """
    tol = build_tolerance(flags)
    LOGGER.info(f"Running {command} on {path}.")
    if command == "reconstruct":
        report, payload, warnings = reconstruct(path, tol)
    else:
        poly = report_tools.parse_input(path)
        report, payload, warnings = HANDLERS[command](poly, tol, flags)
    return {
        "schema_version": solver_settings.SCHEMA_VERSION,
        "command": {
            "name": command,
            "path": path,
            "invert": flags.invert,
            "max_enum": flags.max_enum,
            "companion": flags.companion,
        },
        "tolerance": {
            "rank_tol": tol.rank_tol,
            "cluster_radius": tol.cluster_radius,
            "residual_tol": tol.residual_tol,
        },
        "regularity": _regularity_payload(report),
        "payload": payload,
        "warnings": warnings,
    }


def exit_code(error):
    """Map a failure to the command line exit status."""
    if isinstance(error, INPUT_ERRORS):
        return 1
    if isinstance(error, NOT_REGULAR_ERRORS):
        return 2
    return 3


def main(argv=None):
    flags = setup_arguments(argv)
    solver_settings.setup_log(flags.verbose)
    try:
        report = run(flags.command, flags.path, flags)
    except INPUT_ERRORS + NOT_REGULAR_ERRORS + NUMERICAL_ERRORS as error:
        LOGGER.error(f"{type(error).__name__}: {error}")
        return exit_code(error)

    if flags.format == "json":
        sys.stdout.write(report_tools.render_json(report))
    else:
        sys.stdout.write(report_tools.render_text(report))
    return 0


if __name__ == '__main__':
    sys.exit(main())
