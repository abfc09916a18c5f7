"""Reading polynomial and companion files, and rendering reports."""
import os
import json
import math
import numbers
import logging

import numpy as np
from jinja2 import Template

from ua_matrix_solvents import solver_settings
from ua_matrix_solvents import polynomial
from ua_matrix_solvents import spectral
from ua_matrix_solvents import solvents
from ua_matrix_solvents.linearize import Pencil
from ua_matrix_solvents.linalg_tools import DEFAULT_TOLERANCE


LOGGER = logging.getLogger(__name__)

COMPANION_KINDS = ("pair", "solvent", "bisolvent", "factor")


class ParseError(Exception):
    """An input file is not valid JSON or does not follow the schema."""


def load_document(path):
    """Read a JSON document, reporting syntax errors with their position.

    Raises:
        OSError
        ParseError
    """
    with open(path, 'r') as file:
        text = file.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(
            f"{path}:{error.lineno}:{error.colno}: {error.msg}")


def _decode_entry(value, where):
    if isinstance(value, numbers.Real) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(part, numbers.Real)
                    and not isinstance(part, bool) for part in value)):
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected [re, im], got {value!r}.")


def decode_matrix(value, where, rows=None, cols=None):
    """Decode a list of rows of [re, im] entries into a complex matrix.

    Raises:
        ParseError
        DimensionMismatch
    """
    if not isinstance(value, list) or not all(
            isinstance(row, list) for row in value):
        raise ParseError(f"{where}: expected a list of rows.")
    widths = {len(row) for row in value}
    if len(widths) > 1:
        raise ParseError(f"{where}: rows have lengths {sorted(widths)}.")
    width = widths.pop() if widths else (cols or 0)
    matrix = np.zeros((len(value), width), dtype=complex)
    for i, row in enumerate(value):
        for j, entry in enumerate(row):
            matrix[i, j] = _decode_entry(entry, f"{where}[{i}][{j}]")
    if not np.all(np.isfinite(matrix)):
        raise ParseError(f"{where}: entries must be finite.")
    if (rows is not None and matrix.shape[0] != rows) or (
            cols is not None and matrix.shape[1] != cols):
        raise polynomial.DimensionMismatch(
            f"{where}: expected {rows}x{cols}, got"
            f" {matrix.shape[0]}x{matrix.shape[1]}.")
    return matrix


def encode_complex(value):
    """Return [re, im], or the string "inf" for the infinite eigenvalue."""
    value = complex(value)
    if spectral.is_infinite(value):
        return "inf"
    return [float(value.real), float(value.imag)]


def encode_matrix(matrix):
    return [[encode_complex(entry) for entry in row]
            for row in np.asarray(matrix)]


def _count(document, key, where):
    value = document.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ParseError(f"{where}: \"{key}\" must be a nonnegative integer.")
    return value


def polynomial_from_document(document, where="polynomial"):
    """Validate a PolynomialFile document into a MatrixPolynomial.

    Raises:
        ParseError
        DimensionMismatch
        ZeroPolynomialInput
    """
    if not isinstance(document, dict):
        raise ParseError(f"{where}: expected a JSON object.")
    if document.get("kind", "polynomial") != "polynomial":
        raise ParseError(f"{where}: kind must be \"polynomial\".")
    n, m, k = (_count(document, key, where) for key in ("n", "m", "k"))
    coefficients = document.get("coefficients")
    if not isinstance(coefficients, list):
        raise ParseError(f"{where}: \"coefficients\" must be a list.")
    if len(coefficients) != k + 1:
        raise polynomial.DimensionMismatch(
            f"{where}: k = {k} needs {k + 1} coefficients, got"
            f" {len(coefficients)}.")
    matrices = [
        decode_matrix(value, f"{where}.coefficients[{i}]", n, m)
        for i, value in enumerate(coefficients)]
    return polynomial.make_polynomial(matrices)


def parse_input(path):
    """Read a PolynomialFile.

    Raises:
        OSError
        ParseError
        DimensionMismatch
        ZeroPolynomialInput
    """
    return polynomial_from_document(
        load_document(path), os.path.basename(path))


def pair_from_document(document, tol=DEFAULT_TOLERANCE, where="pair"):
    """Return (StandardPair, k or None) from a pair document.

    Raises:
        ParseError
        DimensionMismatch
    """
    if not isinstance(document, dict):
        raise ParseError(f"{where}: expected a JSON object.")
    X, Y, T, Z = (
        decode_matrix(document.get(key), f"{where}.{key}")
        for key in ("X", "Y", "T", "Z"))
    rows = max(X.shape[0], Y.shape[0])
    # Empty sides are written as [] and have no rows.
    if X.size == 0:
        X = np.zeros((rows, T.shape[0]), dtype=complex)
    if Y.size == 0:
        Y = np.zeros((rows, Z.shape[0]), dtype=complex)
    if T.size == 0:
        T = np.zeros((X.shape[1], X.shape[1]), dtype=complex)
    if Z.size == 0:
        Z = np.zeros((Y.shape[1], Y.shape[1]), dtype=complex)
    depth = document.get("k")
    if depth is not None:
        depth = _count(document, "k", where)
    return spectral.StandardPair.from_matrices(X, Y, T, Z, tol), depth


def load_companion(path, tol=DEFAULT_TOLERANCE):
    """Read a verification file: a pair, solvent, bisolvent or factor.

    Returns:
        (string, object): The kind and the decoded value; a solvent is
            (matrix, is_cosolvent) and a pair is (StandardPair, k or None).

    Raises:
        OSError
        ParseError
    """
    document = load_document(path)
    where = os.path.basename(path)
    if not isinstance(document, dict):
        raise ParseError(f"{where}: expected a JSON object.")
    kind = document.get("kind")
    if kind not in COMPANION_KINDS:
        raise ParseError(
            f"{where}: kind must be one of {', '.join(COMPANION_KINDS)}.")
    if kind == "pair":
        return kind, pair_from_document(document, tol, where)
    if kind == "solvent":
        return kind, (
            decode_matrix(document.get("S"), f"{where}.S"),
            bool(document.get("cosolvent", False)))
    if kind == "bisolvent":
        S1, S2, Pi = (
            decode_matrix(document.get(key), f"{where}.{key}")
            for key in ("S1", "S2", "Pi"))
        return kind, solvents.Bisolvent(S1=S1, S2=S2, Pi=Pi)
    return kind, Pencil(
        a1=decode_matrix(document.get("A1"), f"{where}.A1"),
        a0=decode_matrix(document.get("A0"), f"{where}.A0"))


def jsonable(value):
    """Convert payload values to JSON types; complex numbers become [re, im].

    Non-finite reals become strings so reports never hold NaN or Infinity.
    """
    if isinstance(value, dict):
        return {key: jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return encode_matrix(value)
        return [jsonable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, numbers.Complex):
        return encode_complex(value)
    return value


def render_json(report):
    return json.dumps(jsonable(report), indent=2, allow_nan=False) + "\n"


def format_complex(value, digits=solver_settings.TEXT_DIGITS):
    value = complex(value)
    if spectral.is_infinite(value):
        return "inf"
    if value.imag == 0:
        return f"{value.real:.{digits}g}"
    return f"{value.real:.{digits}g}{value.imag:+.{digits}g}j"


def _text_lines(value, indent=0):
    """Flatten a payload into indented text lines."""
    pad = "  " * indent
    if isinstance(value, dict):
        lines = list()
        for key, item in value.items():
            if isinstance(item, (dict, list, tuple, np.ndarray)):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.extend(
                    f"{pad}{key}: {line.strip()}"
                    for line in _text_lines(item))
        return lines
    if isinstance(value, np.ndarray) and value.ndim == 2:
        if value.size == 0:
            return [f"{pad}[{value.shape[0]}x{value.shape[1]} empty]"]
        cells = [[format_complex(entry) for entry in row] for row in value]
        width = max(len(cell) for row in cells for cell in row)
        return [pad + "  ".join(cell.rjust(width) for cell in row)
                for row in cells]
    if isinstance(value, (list, tuple, np.ndarray)):
        lines = list()
        for item in value:
            nested = _text_lines(item, indent + 1)
            if nested:
                lines.append(f"{pad}- {nested[0].strip()}")
                lines.extend(nested[1:])
            else:
                lines.append(f"{pad}-")
        return lines
    if isinstance(value, (bool, np.bool_)) or value is None:
        return [f"{pad}{value}"]
    if isinstance(value, numbers.Integral):
        return [f"{pad}{value}"]
    if isinstance(value, numbers.Real):
        return [f"{pad}{float(value):.{solver_settings.TEXT_DIGITS}g}"]
    if isinstance(value, numbers.Complex):
        return [f"{pad}{format_complex(value)}"]
    return [f"{pad}{value}"]


def render_text(report):
    """Render a report through the text template."""
    template_path = os.path.join(
        os.path.split(__file__)[0], "report_template.txt")
    with open(template_path, 'r') as file:
        template = Template(
            file.read(), trim_blocks=True, keep_trailing_newline=True)
    return template.render(
        schema_version=report["schema_version"],
        command=report["command"],
        tolerance=report["tolerance"],
        regularity=report.get("regularity"),
        payload_lines=_text_lines(report["payload"], 1),
        warnings=report.get("warnings", []))
