"""Helpers for urysohn-fractals."""

from collections.abc import Iterable, Sequence
import csv
from fractions import Fraction
import io
from numbers import Rational
from typing import Any

import orjson

from .exceptions import FractalParseException

Distance = Fraction | float

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def parse_rational(value: str | int | float | Fraction) -> Fraction:
    """Parse a rational literal.

    Parameters
    ----------
    value
        A ``"p/q"`` string, a decimal string, an integer or a JSON float.
        Decimals become exact scaled rationals, so ``"0.001"`` is ``1/1000``.

    Returns
    -------
    Fraction
        The exact value.

    Raises
    ------
    FractalParseException
        If the literal is not a finite rational.

    """
    if isinstance(value, bool):
        raise FractalParseException(f"Boolean {value} is not a rational literal.")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    try:
        # repr keeps JSON floats like 0.1 as the decimal the author wrote
        return Fraction(repr(value) if isinstance(value, float) else value.strip())
    except (ValueError, ZeroDivisionError, AttributeError, OverflowError) as e:
        raise FractalParseException(f"Cannot parse rational literal {value!r}.") from e


def format_rational(value: Fraction) -> str:
    """Format a rational as ``"p/q"`` (or ``"p"`` for integers)."""
    return str(value)


def format_distance(value: Distance) -> str:
    """Format an exact or float distance for CSV and JSON output."""
    if isinstance(value, Fraction):
        return format_rational(value)
    return repr(float(value))


def to_jsonable(value: Any) -> Any:
    """Convert rationals nested in lists and dicts to strings."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    return value


def dumps_json(document: Any) -> bytes:
    """Serialize a document deterministically (sorted keys, fixed indent)."""
    return orjson.dumps(to_jsonable(document), option=JSON_OPTIONS) + b"\n"


def loads_json(data: str | bytes) -> Any:
    """Parse a JSON document.

    Raises
    ------
    FractalParseException
        If the document is not valid JSON.

    """
    try:
        return orjson.loads(data)
    except orjson.JSONDecodeError as e:
        raise FractalParseException("Cannot parse JSON document.") from e


def matrix_from_csv(text: str) -> tuple[list[str], list[list[Fraction]]]:
    """Read a labeled distance matrix from CSV.

    The header row holds the labels; each following row holds one matrix row,
    entries as decimal or ``"p/q"`` literals.

    Returns
    -------
    tuple[list[str], list[list[Fraction]]]
        Labels and the exact matrix.

    Raises
    ------
    FractalParseException
        If the CSV is empty, ragged or holds a bad literal.

    """
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise FractalParseException("Distance CSV is empty.")
    labels = [label.strip() for label in rows[0]]
    matrix = [[parse_rational(entry) for entry in row] for row in rows[1:]]
    if len(matrix) != len(labels) or any(len(row) != len(labels) for row in matrix):
        raise FractalParseException(
            f"Distance CSV must be {len(labels)}x{len(labels)} below its header."
        )
    return labels, matrix


def matrix_to_csv(labels: Sequence[str], matrix: Iterable[Iterable[Distance]]) -> str:
    """Write a labeled distance matrix as CSV."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(labels)
    for row in matrix:
        writer.writerow([format_distance(entry) for entry in row])
    return buffer.getvalue()


def points_to_csv(points: Iterable[Any]) -> str:
    """Write a point cloud, one point per row (a label or its coordinates)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for point in points:
        if isinstance(point, str):
            writer.writerow([point])
        else:
            writer.writerow([format_distance(float(c)) for c in point])
    return buffer.getvalue()
