"""Exact rational linear algebra for small dense matrices.

Everything here works on sequences of :class:`fractions.Fraction` (plain ints
are accepted and coerced). Pivoting is deterministic — first nonzero entry in
the current column — so bases are reproducible across runs.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Vector = tuple[Fraction, ...]
Matrix = Sequence[Sequence[int | Fraction]]


def _to_rows(matrix: Matrix) -> list[list[Fraction]]:
    rows = [[Fraction(x) for x in row] for row in matrix]
    if rows:
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged matrix")
    return rows


def rref(matrix: Matrix) -> tuple[tuple[tuple[Fraction, ...], ...], tuple[int, ...]]:
    """Reduced row echelon form.

    Returns (rows, pivot_columns). Pivot selection is the first row with a
    nonzero entry in the current column.
    """
    rows = _to_rows(matrix)
    if not rows:
        return (), ()
    n_cols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == len(rows):
            break
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return tuple(tuple(row) for row in rows), tuple(pivots)


def null_space(matrix: Matrix) -> tuple[Vector, ...]:
    """Basis of {x : M x = 0}, one vector per free column, in column order.

    An empty matrix (no rows) has no constraints; callers must pass at least
    one row to fix the dimension.
    """
    rows = _to_rows(matrix)
    if not rows:
        raise ValueError("cannot infer dimension from an empty matrix")
    n_cols = len(rows[0])
    reduced, pivots = rref(rows)
    pivot_set = set(pivots)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis: list[Vector] = []
    for f in free_cols:
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for r, c in enumerate(pivots):
            # row r reads x_c + sum(reduced[r][j] * x_j for free j) = 0
            vec[c] = -reduced[r][f]
        basis.append(tuple(vec))
    return tuple(basis)


def left_null_space(matrix: Matrix) -> tuple[Vector, ...]:
    """Basis of {w : w^T M = 0}."""
    rows = _to_rows(matrix)
    if not rows:
        raise ValueError("cannot infer dimension from an empty matrix")
    transposed = [list(col) for col in zip(*rows)]
    return null_space(transposed)


def primitive(vec: Sequence[int | Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to coprime integers with positive leading sign."""
    fracs = [Fraction(x) for x in vec]
    if not any(fracs):
        raise ValueError("the zero vector has no primitive representative")
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // gcd(denom, f.denominator)
    ints = [int(f * denom) for f in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    lead = next((v for v in ints if v != 0), 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def dot(a: Sequence[int | Fraction], b: Sequence[int | Fraction]) -> Fraction:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))
