"""Plain CSV matrices and vectors.

Matrices are one row per line, comma-separated, no header. Vectors are a
single comma-separated line. Values are written with 17 significant digits,
enough to round-trip any float64.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from scalex.core import InvalidInputError


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _parse_line(line: str, lineno: int, path) -> list[float]:
    out = []
    for col, tok in enumerate(line.split(",")):
        tok = tok.strip()
        try:
            out.append(float(tok))
        except ValueError:
            raise InvalidInputError(
                f"{path}: row {lineno}, column {col}: cannot parse {tok!r} as a number"
            ) from None
    return out


def read_matrix(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise InvalidInputError(f"{path}: empty matrix file")
    rows = [_parse_line(ln, i, path) for i, ln in enumerate(lines)]
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInputError(
                f"{path}: row {i} has {len(row)} columns, expected {width}"
            )
    return np.array(rows, dtype=np.float64)


def read_vector(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) != 1:
        raise InvalidInputError(f"{path}: expected a single-line vector, found {len(lines)} lines")
    return np.array(_parse_line(lines[0], 0, path), dtype=np.float64)


def write_matrix(path, A) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    Path(path).write_text("".join(",".join(map(_fmt, row)) + "\n" for row in A))


def write_vector(path, v) -> None:
    v = np.asarray(v, dtype=np.float64).ravel()
    Path(path).write_text(",".join(map(_fmt, v)) + "\n")
