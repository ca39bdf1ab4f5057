"""Modular-symbol algebra and the reduction of a symbol into the spanning set.

A symbol ``[v_1, ..., v_n]`` is stored as a :class:`SymbolMatrix` whose
columns are the ``v_i``. :func:`canonicalize` picks a representative modulo
column swaps (with sign), rational rescaling of columns and linear dependence.
:func:`reduce` repeatedly replaces a symbol of norm above ``C`` by the
``n``-term relation through a pivot, recording every step in a
:class:`ReductionCertificate`.
"""

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import (
    BoundTooSmall,
    CapExceeded,
    InvalidPivot,
    NodeBudgetExceeded,
    SingularMatrix,
    ZeroColumn,
)
from .field_arith import NumberOrder, OrderSpec, format_rational, load_order
from .minkowski import spanning_bound
from .pivot_search import Pivot, PivotConfig, find_pivot
from .regular_rep import SymbolMatrix, combine

log = logging.getLogger(__name__)

CERT_FORMAT = "modsym-reduction-certificate/1"


# --- symbols ------------------------------------------------------------------

@dataclass(frozen=True)
class NormalSymbol:
    matrix: SymbolMatrix
    sign: int
    is_zero: bool


def _normalize_column(col: Sequence[Sequence]) -> tuple[tuple[int, ...], ...]:
    flat = [Fraction(x) for e in col for x in e]
    if not any(flat):
        raise ZeroColumn("symbol columns must be nonzero")
    den = 1
    for x in flat:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in flat]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    ints = [x // g for x in ints]
    if next(x for x in ints if x) < 0:
        ints = [-x for x in ints]
    d = len(col[0])
    return tuple(tuple(ints[k * d:(k + 1) * d]) for k in range(len(col)))


def integralize(order: NumberOrder, cols: Sequence[Sequence[Sequence]]) -> SymbolMatrix:
    """Clear denominators column by column (relation (2)); signs are kept."""
    out = []
    for col in cols:
        den = 1
        for e in col:
            for x in e:
                x = Fraction(x)
                den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([[int(Fraction(x) * den) for x in e] for e in col])
    return SymbolMatrix.from_cols(order, out)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def canonicalize(order: NumberOrder, cols: Sequence[Sequence[Sequence]]) -> NormalSymbol:
    """Normal form of ``[cols]``: integral primitive columns in sorted order.

    Each column is scaled by a rational so its coordinates are coprime
    integers with the first nonzero one positive; columns are then sorted in
    decreasing order (so the identity is its own normal form) and the parity
    of the sort becomes the sign.
    """
    normed = [_normalize_column(c) for c in cols]
    flat = [tuple(x for e in c for x in e) for c in normed]
    perm = sorted(range(len(normed)), key=lambda i: flat[i], reverse=True)
    sign = _perm_sign(perm)
    m = SymbolMatrix.from_cols(order, [normed[i] for i in perm])
    return NormalSymbol(m, sign, m.norm == 0)


class SymbolChain:
    """Finite integer combination of canonical symbols."""

    def __init__(self, terms: dict[SymbolMatrix, int] | None = None):
        self.terms: dict[SymbolMatrix, int] = {}
        for k, v in (terms or {}).items():
            self.add(k, v)

    @classmethod
    def of(cls, sym: NormalSymbol, coeff: int = 1) -> "SymbolChain":
        chain = cls()
        if not sym.is_zero:
            chain.add(sym.matrix, sym.sign * coeff)
        return chain

    def add(self, m: SymbolMatrix, coeff: int) -> None:
        if not coeff:
            return
        v = self.terms.get(m, 0) + coeff
        if v:
            self.terms[m] = v
        else:
            self.terms.pop(m, None)

    def add_chain(self, other: "SymbolChain", coeff: int = 1) -> None:
        for m, c in other.terms.items():
            self.add(m, coeff * c)

    def __add__(self, other: "SymbolChain") -> "SymbolChain":
        out = SymbolChain(self.terms)
        out.add_chain(other)
        return out

    def __neg__(self) -> "SymbolChain":
        return SymbolChain({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "SymbolChain") -> "SymbolChain":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolChain) and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[SymbolMatrix, int]]:
        return iter(self.items())

    def items(self) -> list[tuple[SymbolMatrix, int]]:
        return sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0]))

    def max_norm(self) -> int:
        return max((m.norm for m in self.terms), default=0)

    def to_json(self) -> list[dict]:
        return [{"coefficient": c, "matrix": m.rows(), "norm": m.norm} for m, c in self.items()]

    def __repr__(self) -> str:
        return f"SymbolChain({[(m.rows(), c) for m, c in self.items()]})"


def _sort_key(m: SymbolMatrix) -> tuple:
    return tuple(x for col in m.cols for e in col for x in e)


# --- one reduction step --------------------------------------------------------

def relation_terms(x, cols) -> list[tuple[int, int, list]]:
    """Expand the (n+1)-term relation on ``(x, v_1, ..., v_n)``.

    Returns ``(i, sign, columns)`` such that ``[v_1..v_n] = sum sign * [columns]``
    where ``columns`` is ``v`` with ``v_i`` replaced by ``x`` (0-based ``i``).
    The sign is read off the relation and the permutation that moves ``x``
    from the front into slot ``i``.
    """
    n = len(cols)
    out = []
    for k in range(1, n + 1):
        face = [x] + [cols[j] for j in range(n) if j != k - 1]
        # [v] + sum_{k>=1} (-1)^k [face_k] = 0
        coeff = -((-1) ** k)
        perm = [0 if i == k - 1 else (i + 1 if i < k - 1 else i) for i in range(n)]
        target = [face[p] for p in perm]
        out.append((k - 1, coeff * _perm_sign(perm), target))
    return out


def reduce_step(order: NumberOrder, m: SymbolMatrix, pivot: Pivot) -> list[tuple[int, SymbolMatrix]]:
    """The signed symbols ``[m_i]`` (``v_i`` replaced by ``x``) with ``q_i != 0``."""
    if len(pivot.q) != m.n or len(pivot.x) != m.n:
        raise InvalidPivot("pivot has the wrong length")
    if not any(any(qi) for qi in pivot.q):
        raise InvalidPivot("all pivot coefficients vanish")
    if combine(order, pivot.q, m.cols) != tuple(tuple(Fraction(c) for c in e) for e in pivot.x):
        raise InvalidPivot("x is not sum q_i v_i")
    if any(abs(order.norm(qi)) >= 1 for qi in pivot.q if any(qi)):
        raise InvalidPivot("some |N(q_i)| >= 1")
    out = []
    for i, sign, target in relation_terms(pivot.x, m.cols):
        if any(pivot.q[i]):
            out.append((sign, SymbolMatrix.from_cols(order, target)))
    return out


# --- the reduction loop ------------------------------------------------------------

@dataclass(frozen=True)
class ReduceConfig:
    node_budget: int = 10**5
    force: bool = False
    jobs: int = 1
    pivot: PivotConfig = field(default_factory=PivotConfig)


@dataclass
class CertNode:
    id: int
    matrix: SymbolMatrix
    pivot: Pivot
    children: list[tuple[int, int, SymbolMatrix, int | None]]  # (index, sign, matrix, node id)


@dataclass
class ReductionCertificate:
    field_hash: str
    n: int
    C: int
    forced: bool
    root: SymbolMatrix
    nodes: list[CertNode]
    chain: SymbolChain

    def to_json(self) -> dict:
        return {
            "format": CERT_FORMAT,
            "field_hash": self.field_hash,
            "n": self.n,
            "C": self.C,
            "forced": self.forced,
            "root": {"matrix": self.root.rows(), "norm": self.root.norm},
            "nodes": [
                {
                    "id": node.id,
                    "matrix": node.matrix.rows(),
                    "norm": node.matrix.norm,
                    "pivot": node.pivot.to_json(),
                    "children": [
                        {"index": i, "sign": sg, "matrix": cm.rows(), "norm": cm.norm, "node": ref}
                        for i, sg, cm, ref in node.children
                    ],
                }
                for node in self.nodes
            ],
            "leaves": self.chain.to_json(),
        }


_WORKER_ORDER: NumberOrder | None = None


def _worker_init(spec: OrderSpec) -> None:
    global _WORKER_ORDER
    _WORKER_ORDER = load_order(spec)


def _worker_pivot(args):
    cols, config = args
    order = _WORKER_ORDER
    return find_pivot(order, SymbolMatrix.from_cols(order, cols), config)


def _expand(order: NumberOrder, m: SymbolMatrix, pivot: Pivot) -> list[tuple[int, int, SymbolMatrix]]:
    out = []
    for i, sign, target in relation_terms(pivot.x, m.cols):
        if any(pivot.q[i]):
            sym = canonicalize(order, target)
            out.append((i, sign * sym.sign, sym.matrix))
    return out


def reduce(order: NumberOrder, m: SymbolMatrix, C: int | None = None,
           config: ReduceConfig | None = None) -> tuple[SymbolChain, ReductionCertificate]:
    """Write ``[m]`` as an integer combination of symbols of norm at most ``C``.

    ``C`` defaults to the certified spanning bound. Shared subtrees are
    expanded once (memoized on canonical form); the certificate lists nodes
    in depth-first order from the root with children ordered by column.
    """
    config = config or ReduceConfig()
    n = m.n
    if n < 2:
        raise ValueError("n = 1 symbols are all equal to [1]; nothing to reduce")
    bound = spanning_bound(order, n).c_min
    if C is None:
        C = bound
    if C < bound and not config.force:
        raise BoundTooSmall(f"C = {C} is below the certified spanning bound {bound}")
    forced = C < bound

    if m.norm == 0:
        return SymbolChain(), ReductionCertificate(order.digest(), n, C, forced, m, [], SymbolChain())
    if m.norm <= C:
        root_sym = canonicalize(order, m.cols)
        chain = SymbolChain.of(root_sym)
        return chain, ReductionCertificate(order.digest(), n, C, forced, m, [], chain)
    # the input itself is the root node; everything below it is canonical

    expanded: dict[SymbolMatrix, tuple[Pivot, list[tuple[int, int, SymbolMatrix]]]] = {}
    frontier = [m]
    executor = None
    if config.jobs > 1 and frontier:
        executor = ProcessPoolExecutor(max_workers=config.jobs, initializer=_worker_init,
                                       initargs=(order.spec,))
    try:
        while frontier:
            if len(expanded) + len(frontier) > config.node_budget:
                raise NodeBudgetExceeded(f"reduction needs more than {config.node_budget} nodes")
            if executor is not None:
                pivots = list(executor.map(_worker_pivot, [(f.cols, config.pivot) for f in frontier]))
            else:
                pivots = [find_pivot(order, f, config.pivot) for f in frontier]
            nxt = []
            queued = set()
            for mat, piv in zip(frontier, pivots):
                children = _expand(order, mat, piv)
                expanded[mat] = (piv, children)
                for _, _, child in children:
                    if child.norm >= mat.norm:
                        raise InvalidPivot("child norm did not decrease")
                    if child.norm > C and child not in expanded and child not in queued:
                        queued.add(child)
                        nxt.append(child)
            log.debug("level done: %d expanded, %d queued", len(expanded), len(nxt))
            frontier = nxt
    finally:
        if executor is not None:
            executor.shutdown()

    # number the nodes depth-first from the root
    ids: dict[SymbolMatrix, int] = {}
    order_list: list[SymbolMatrix] = []
    stack = [m]
    while stack:
        mat = stack.pop()
        if mat in ids:
            continue
        ids[mat] = len(order_list)
        order_list.append(mat)
        for _, _, child in reversed(expanded[mat][1]):
            if child in expanded and child not in ids:
                stack.append(child)
    nodes = []
    for mat in order_list:
        piv, children = expanded[mat]
        nodes.append(CertNode(ids[mat], mat, piv,
                              [(i, sg, ch, ids.get(ch)) for i, sg, ch in children]))

    # expand the DAG into the leaf chain, smallest norms first
    memo: dict[SymbolMatrix, SymbolChain] = {}
    for mat in sorted(expanded, key=lambda k: (k.norm, _sort_key(k))):
        acc = SymbolChain()
        for _, sg, child in expanded[mat][1]:
            if child in expanded:
                acc.add_chain(memo[child], sg)
            else:
                acc.add(child, sg)
        memo[mat] = acc
    chain = memo[m]
    cert = ReductionCertificate(order.digest(), n, C, forced, m, nodes, chain)
    return chain, cert


# --- K = Q oracles ---------------------------------------------------------------

RATIONALS = OrderSpec((0, 1), ((Fraction(1),),), "Q")


@functools.lru_cache(maxsize=None)
def _rational_order() -> NumberOrder:
    return load_order(RATIONALS)


def _convergents(p: int, q: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents of p/q, starting after (1, 0)."""
    out = []
    h0, k0, h1, k1 = 0, 1, 1, 0
    while q:
        a = p // q
        p, q = q, p - a * q
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append((h1, k1))
    return out


def cf_reduce_2x2_rational(m: Sequence[Sequence[int]]) -> SymbolChain:
    """Unimodular expansion of a 2x2 rational symbol via continued fractions.

    Uses ``[a, b] = [a, inf] + [inf, b]`` and, for a primitive column
    ``(p, q)``, ``[inf, p/q] = sum_k [c_(k-1), c_k]`` over the convergents.
    """
    qq = _rational_order()
    cols = [(int(m[0][j]), int(m[1][j])) for j in range(2)]
    if cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1] == 0:
        raise SingularMatrix("symbol matrix is singular")

    def from_infinity(v: tuple[int, int]) -> SymbolChain:
        g = math.gcd(*v)
        p, q = v[0] // g, v[1] // g
        if q < 0:
            p, q = -p, -q
        chain = SymbolChain()
        prev = (1, 0)
        for conv in _convergents(p, q):
            sym = canonicalize(qq, [[(prev[0],), (prev[1],)], [(conv[0],), (conv[1],)]])
            if not sym.is_zero:
                chain.add(sym.matrix, sym.sign)
            prev = conv
        return chain

    if abs(cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1]) == 1:
        return SymbolChain.of(canonicalize(qq, [[(x,) for x in c] for c in cols]))
    return from_infinity(cols[1]) - from_infinity(cols[0])


def enumerate_hnf_classes(n: int, C: int, cap: int = 10**6) -> list[list[list[int]]]:
    """One Hermite normal form per left-GL_n(Z) class with ``1 <= |det| <= C``."""
    if n < 2 or C < 1:
        raise ValueError("need n >= 2 and C >= 1")
    out: list[list[list[int]]] = []

    def diagonals(k: int, budget: int) -> Iterable[tuple[int, ...]]:
        if k == 0:
            yield ()
            return
        for a in range(1, budget + 1):
            for rest in diagonals(k - 1, budget // a):
                yield (a,) + rest

    for diag in diagonals(n, C):
        slots = [(i, j) for j in range(n) for i in range(j)]
        count = math.prod(diag[j] for _, j in slots)
        if len(out) + count > cap:
            raise CapExceeded(f"more than {cap} HNF classes")
        ranges = [range(diag[j]) for _, j in slots]

        def fill(idx: int, cur: list[list[int]]):
            if idx == len(slots):
                out.append([row[:] for row in cur])
                return
            i, j = slots[idx]
            for v in ranges[idx]:
                cur[i][j] = v
                fill(idx + 1, cur)
            cur[i][j] = 0

        base = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
        fill(0, base)
    return out
