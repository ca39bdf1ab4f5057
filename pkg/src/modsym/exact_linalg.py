"""Exact integer/rational matrix algebra and floating-point lattice tools.

Matrices are plain lists of rows. Entries are Python ``int`` or
``fractions.Fraction``; nothing here ever converts an exact value to a float
unless the routine is explicitly a floating-point one (``lll_reduce`` and
``enumerate_lattice``), and those return integer data that callers re-check
exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DependentBasis, NotSquare, RadiusOverflow, SingularMatrix

Number = int | Fraction
Matrix = list[list[Number]]

DEFAULT_NODE_CAP = 10**7


def _check_square(m: Sequence[Sequence]) -> int:
    n = len(m)
    if any(len(row) != n for row in m):
        raise NotSquare(f"expected a square matrix, got {n} rows of lengths {[len(r) for r in m]}")
    return n


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[Number]], b: Sequence[Sequence[Number]]) -> Matrix:
    if a and len(a[0]) != len(b):
        raise ValueError("inner dimensions differ")
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence[Number]], v: Sequence[Number]) -> list[Number]:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def _bareiss(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    m = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = (pivot * row_i[j] - mik * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def det(m: Sequence[Sequence[Number]]) -> Number:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Rational input is scaled row by row to integers first, so the
    elimination itself only ever performs exact integer division.
    """
    n = _check_square(m)
    if all(isinstance(x, int) for row in m for x in row):
        return _bareiss([list(row) for row in m])
    scaled = []
    denom = 1
    for row in m:
        row = [Fraction(x) for x in row]
        l = 1
        for x in row:
            l = _lcm(l, x.denominator)
        denom *= l
        scaled.append([int(x * l) for x in row])
    return Fraction(_bareiss(scaled), denom) if n else Fraction(1)


def _gauss_jordan(m: Sequence[Sequence[Number]], rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Reduce [m | rhs] so that m becomes the identity; returns the transformed rhs."""
    n = _check_square(m)
    a = [[Fraction(x) for x in row] + rhs[i] for i, row in enumerate(m)]
    width = len(a[0]) if a else 0
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            raise SingularMatrix("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        pivot_row = [x * inv for x in a[col]]
        a[col] = pivot_row
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                row = a[i]
                a[i] = [row[j] - f * pivot_row[j] if pivot_row[j] else row[j] for j in range(width)]
    return [row[n:] for row in a]


def solve(m: Sequence[Sequence[Number]], b: Sequence[Number]) -> list[Fraction]:
    """Exact solution of ``m @ sol = b``; raises ``SingularMatrix`` when det(m) = 0."""
    n = _check_square(m)
    if len(b) != n:
        raise ValueError(f"right-hand side has length {len(b)}, expected {n}")
    out = _gauss_jordan(m, [[Fraction(x)] for x in b])
    return [row[0] for row in out]


def inverse(m: Sequence[Sequence[Number]]) -> list[list[Fraction]]:
    n = _check_square(m)
    return _gauss_jordan(m, [[Fraction(int(i == j)) for j in range(n)] for i in range(n)])


def rank(m: Sequence[Sequence[Number]]) -> int:
    a = [[Fraction(x) for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if a else 0
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, rows):
            if a[i][col]:
                f = a[i][col] / a[r][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == rows:
            break
    return r


# --- integer normal forms -------------------------------------------------

def smith_diagonal(m: Sequence[Sequence[int]]) -> list[int]:
    """Diagonal of the Smith normal form (nonnegative, each dividing the next)."""
    a = [list(map(int, row)) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    diag = []
    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    qt = a[i][t] // p
                    a[i] = [x - qt * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    qt = a[t][j] // p
                    for row in a:
                        row[j] -= qt * row[t]
                    if a[t][j]:
                        done = False
            if done:
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                            if a[i][j] % p), None)
                if bad is None:
                    break
                # fold a row with a non-divisible entry into the pivot row
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                continue
            nz = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
            nz += [(abs(a[t][j]), t, j) for j in range(t, cols) if a[t][j]]
            _, i, j = min(nz)
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag + [0] * (min(rows, cols) - len(diag))


def snf_index(m: Sequence[Sequence[int]]) -> int:
    """Index of the column lattice of ``m`` in Z^n; 0 when ``m`` is singular."""
    _check_square(m)
    return math.prod(smith_diagonal(m))


def hermite_normal_form(m: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style HNF of a nonsingular integer matrix under left GL_n(Z) action.

    The result is upper triangular with positive diagonal and every entry above
    the diagonal reduced into ``[0, pivot)``.
    """
    n = _check_square(m)
    a = [list(map(int, row)) for row in m]
    for col in range(n):
        while True:
            nz = [i for i in range(col, n) if a[i][col]]
            if not nz:
                raise SingularMatrix("HNF requires a nonsingular matrix")
            piv = min(nz, key=lambda i: abs(a[i][col]))
            a[col], a[piv] = a[piv], a[col]
            clean = True
            for i in range(col + 1, n):
                if a[i][col]:
                    qt = a[i][col] // a[col][col]
                    a[i] = [x - qt * y for x, y in zip(a[i], a[col])]
                    clean = clean and a[i][col] == 0
            if clean:
                break
        if a[col][col] < 0:
            a[col] = [-x for x in a[col]]
        for i in range(col):
            qt = a[i][col] // a[col][col]
            if qt:
                a[i] = [x - qt * y for x, y in zip(a[i], a[col])]
    return a


# --- floating-point lattice reduction ------------------------------------

def _gram_schmidt(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = b.shape[0]
    mu = np.zeros((k, k))
    bstar = np.zeros_like(b)
    norms = np.zeros(k)
    for i in range(k):
        v = b[i].copy()
        for j in range(i):
            mu[i, j] = (b[i] @ bstar[j]) / norms[j] if norms[j] else 0.0
            v -= mu[i, j] * bstar[j]
        bstar[i] = v
        norms[i] = v @ v
    return mu, norms


def lll_reduce(basis: Sequence[Sequence[float]], delta: float = 0.99
               ) -> tuple[list[list[float]], list[list[int]]]:
    """LLL-reduce the row vectors of ``basis``.

    Returns ``(reduced, U)`` with ``reduced[i] = sum_j U[i][j] * basis[j]``.
    The arithmetic on the vectors is floating point; ``U`` is tracked in exact
    integers and is unimodular by construction, and the float vectors are
    always recomputed from ``U`` so they never drift away from it.
    """
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    b0 = np.array(basis, dtype=float)
    if b0.ndim != 2:
        raise ValueError("basis must be a list of vectors")
    k = b0.shape[0]
    if k == 0:
        return [], []
    scale = float(np.max(np.abs(b0))) or 1.0
    b0 = b0 / scale
    u = identity(k)

    def row(i: int) -> np.ndarray:
        return np.array([float(c) for c in u[i]]) @ b0

    b = np.array([row(i) for i in range(k)])
    mu, norms = _gram_schmidt(b)
    tiny = 1e-24 * max(1.0, float(np.max(np.sum(b * b, axis=1))))
    if np.any(norms <= tiny):
        raise DependentBasis("basis vectors are (numerically) linearly dependent")

    i = 1
    guard = 0
    while i < k:
        guard += 1
        if guard > 100000:
            raise RuntimeError("LLL failed to converge")
        for j in range(i - 1, -1, -1):
            r = round(mu[i, j])
            if r:
                u[i] = [x - r * y for x, y in zip(u[i], u[j])]
                b[i] = row(i)
                mu, norms = _gram_schmidt(b)
        if norms[i] >= (delta - mu[i, i - 1] ** 2) * norms[i - 1]:
            i += 1
        else:
            u[i], u[i - 1] = u[i - 1], u[i]
            b[[i, i - 1]] = b[[i - 1, i]]
            mu, norms = _gram_schmidt(b)
            if np.any(norms <= tiny):
                raise DependentBasis("basis vectors are (numerically) linearly dependent")
            i = max(i - 1, 1)
    reduced = (np.array(u, dtype=float) @ b0) * scale
    return reduced.tolist(), u


def norm_key(value: float) -> float:
    """Quantize a squared length so float noise cannot reorder near-ties."""
    return float(f"{value:.10e}")


def enumerate_lattice(basis: Sequence[Sequence[float]], radius: float,
                      visit: Callable[[tuple[int, ...]], bool] | None = None,
                      node_cap: int = DEFAULT_NODE_CAP) -> Iterator[tuple[int, ...]]:
    """Fincke-Pohst enumeration of nonzero lattice vectors of length <= radius.

    ``basis`` holds the lattice basis as row vectors (ideally LLL-reduced).
    Coefficient vectors are yielded in nondecreasing squared length, ties
    broken by lexicographic order of the coefficients; ``visit`` optionally
    filters them. Exceeding ``node_cap`` search-tree nodes raises
    ``RadiusOverflow``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    found, _ = lattice_points(basis, radius, node_cap)
    found.sort(key=lambda item: (norm_key(item[0]), item[1]))
    for _, coeffs in found:
        if visit is None or visit(coeffs):
            yield coeffs


def lattice_points(basis: Sequence[Sequence[float]], radius: float, node_cap: int = DEFAULT_NODE_CAP
                   ) -> tuple[list[tuple[float, tuple[int, ...]]], int]:
    """Unordered ``(squared length, coefficients)`` pairs plus the node count."""
    b = np.array(basis, dtype=float)
    k = b.shape[0]
    mu, norms = _gram_schmidt(b)
    if np.any(norms <= 0):
        raise DependentBasis("enumeration basis is degenerate")
    bound = radius * radius * (1 + 1e-12)
    coeffs = [0] * k
    out: list[tuple[float, tuple[int, ...]]] = []
    nodes = 0

    def centre(i: int) -> float:
        return -sum(mu[j, i] * coeffs[j] for j in range(i + 1, k))

    # iterative depth-first search from the last Gram-Schmidt level down
    partial = [0.0] * (k + 1)
    stack_lo = [0] * k
    stack_hi = [0] * k
    level = k - 1

    def open_level(i: int) -> None:
        c = centre(i)
        rem = bound - partial[i + 1]
        w = math.sqrt(max(rem, 0.0) / norms[i])
        stack_lo[i] = math.ceil(c - w - 1e-12)
        stack_hi[i] = math.floor(c + w + 1e-12)
        coeffs[i] = stack_lo[i] - 1

    open_level(level)
    while level < k:
        coeffs[level] += 1
        if coeffs[level] > stack_hi[level]:
            level += 1
            continue
        nodes += 1
        if nodes > node_cap:
            raise RadiusOverflow(f"enumeration exceeded {node_cap} nodes at radius {radius}")
        c = centre(level)
        partial[level] = partial[level + 1] + norms[level] * (coeffs[level] - c) ** 2
        if partial[level] > bound:
            continue
        if level == 0:
            if any(coeffs):
                v = np.array(coeffs, dtype=float) @ b
                out.append((float(v @ v), tuple(coeffs)))
            continue
        level -= 1
        open_level(level)
    return out, nodes
