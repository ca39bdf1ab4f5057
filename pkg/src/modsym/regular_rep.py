"""Regular representation of an order and its blockwise extension to matrices.

For an element ``a`` the matrix ``rep(a)`` is multiplication by ``a`` in the
fixed basis; ``phi`` sends an ``n x n`` matrix over the order to the
``nd x nd`` integer matrix of ``d x d`` blocks ``rep(m[i][j])``. Columns of
``phi(m)`` are ordered ``(v_1^1, ..., v_1^d, ..., v_n^1, ..., v_n^d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import exact_linalg as la
from .errors import DimensionMismatch
from .field_arith import FieldElement, NumberOrder, OrderElement

Column = tuple[OrderElement, ...]


def field_det(order: NumberOrder, cols: Sequence[Sequence[Sequence]]) -> FieldElement:
    """Determinant over K of the matrix with the given columns."""
    n = len(cols)
    if any(len(c) != n for c in cols):
        raise DimensionMismatch("symbol matrix must be square")
    one = tuple(Fraction(x) for x in order.one())
    if n == 0:
        return one
    # work on rows of the transpose; det is unchanged
    a = [[tuple(Fraction(x) for x in e) for e in col] for col in cols]
    det = one
    for k in range(n):
        piv = next((i for i in range(k, n) if any(a[i][k])), None)
        if piv is None:
            return tuple(Fraction(0) for _ in range(order.d))
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = order.neg(det)
        pk = a[k][k]
        det = order.mul(det, pk)
        inv = order.inv(pk)
        for i in range(k + 1, n):
            if any(a[i][k]):
                f = order.mul(a[i][k], inv)
                a[i] = [order.sub(a[i][j], order.mul(f, a[k][j])) if j > k else a[i][j]
                        for j in range(n)]
    return det


def matrix_norm(order: NumberOrder, cols: Sequence[Sequence[Sequence]]) -> int:
    """``|N(det m)|`` computed over the field."""
    value = abs(order.norm(field_det(order, cols)))
    if Fraction(value).denominator != 1:
        raise DimensionMismatch("norm of an integral matrix must be an integer")
    return int(value)


@dataclass(frozen=True)
class SymbolMatrix:
    """An ``n x n`` matrix over the order, stored by columns.

    ``cols[j][i]`` is the entry in row ``i`` of column ``j``; the columns are
    the vectors of the modular symbol. ``norm`` caches ``|N(det m)|``.
    """

    cols: tuple[Column, ...]
    norm: int = field(compare=False, default=-1)

    @classmethod
    def from_cols(cls, order: NumberOrder, cols: Sequence[Sequence[Sequence[int]]]) -> "SymbolMatrix":
        cols_t = tuple(tuple(tuple(int(x) for x in e) for e in c) for c in cols)
        n = len(cols_t)
        for c in cols_t:
            if len(c) != n:
                raise DimensionMismatch("symbol matrix must be square")
            for e in c:
                if len(e) != order.d:
                    raise DimensionMismatch(f"entry of length {len(e)} in a degree-{order.d} order")
        return cls(cols_t, matrix_norm(order, cols_t))

    @classmethod
    def from_rows(cls, order: NumberOrder, rows: Sequence[Sequence]) -> "SymbolMatrix":
        """Build from a row-major nested list; with d = 1 entries may be bare ints."""
        rows = [[(e,) if isinstance(e, int) else tuple(e) for e in row] for row in rows]
        n = len(rows)
        return cls.from_cols(order, [[rows[i][j] for i in range(n)] for j in range(n)])

    @property
    def n(self) -> int:
        return len(self.cols)

    def entry(self, i: int, j: int) -> OrderElement:
        return self.cols[j][i]

    def rows(self) -> list[list[list[int]]]:
        return [[list(self.cols[j][i]) for j in range(self.n)] for i in range(self.n)]

    def replace_col(self, order: NumberOrder, i: int, x: Column) -> "SymbolMatrix":
        cols = list(self.cols)
        cols[i] = x
        return SymbolMatrix.from_cols(order, cols)


def rep_element(order: NumberOrder, a: OrderElement) -> list[list[int]]:
    if not order.is_integral_coords(a):
        raise DimensionMismatch("rep_element expects an integral element")
    return order.rep(tuple(int(x) for x in a))


def rep_matrix(order: NumberOrder, m: SymbolMatrix) -> list[list[int]]:
    """``phi(m)``: the ``nd x nd`` integer matrix with blocks ``rep(m[i][j])``."""
    n, d = m.n, order.d
    out = [[0] * (n * d) for _ in range(n * d)]
    for i in range(n):
        for j in range(n):
            block = order.rep(m.entry(i, j))
            for a in range(d):
                out[i * d + a][j * d:(j + 1) * d] = block[a]
    return out


def phi_norm(order: NumberOrder, m: SymbolMatrix) -> int:
    """``|det phi(m)|``, the integer route to the norm."""
    return abs(int(la.det(rep_matrix(order, m))))


def column_split(order: NumberOrder, v: Sequence[OrderElement]) -> list[list[int]]:
    """The ``d`` integer vectors ``v^1..v^d`` that ``phi`` makes out of one column.

    Block ``k`` of ``v^j`` holds the coordinates of ``w_j * v_k``.
    """
    for e in v:
        if len(e) != order.d:
            raise DimensionMismatch(f"entry of length {len(e)} in a degree-{order.d} order")
    splits = [[] for _ in range(order.d)]
    for e in v:
        block = order.rep(e)
        for j in range(order.d):
            splits[j].extend(block[a][j] for a in range(order.d))
    return splits


def first_column_recombine(order: NumberOrder, q: Sequence[Sequence],
                           splits: Sequence[Sequence[Sequence[int]]]) -> list[Fraction]:
    """``sum_{i,j} q_i^j v_i^j`` for coefficients ``q_i`` and the splits of ``v_i``."""
    if len(q) != len(splits):
        raise DimensionMismatch("need one coefficient per split column")
    length = len(splits[0][0]) if splits else 0
    out = [Fraction(0)] * length
    for qi, split in zip(q, splits):
        if len(qi) != order.d or len(split) != order.d:
            raise DimensionMismatch("coefficient/split degree mismatch")
        for qij, vec in zip(qi, split):
            if qij:
                if len(vec) != length:
                    raise DimensionMismatch("split vectors of different lengths")
                out = [o + qij * x for o, x in zip(out, vec)]
    return out


def combine(order: NumberOrder, q: Sequence[Sequence], cols: Sequence[Sequence[OrderElement]]) -> tuple:
    """``sum_i q_i v_i`` computed in the field (one coordinate tuple per row)."""
    n = len(cols)
    out = []
    for row in range(n):
        acc = tuple(Fraction(0) for _ in range(order.d))
        for qi, col in zip(q, cols):
            if any(qi):
                acc = order.add(acc, order.mul(qi, col[row]))
        out.append(acc)
    return tuple(out)
