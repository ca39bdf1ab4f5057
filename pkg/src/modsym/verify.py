"""Independent checker for reduction certificates.

Everything here is recomputed from the certificate and the order: column
normal forms, determinants and norms over the field, the signs produced by
the (n+1)-term relation. Only the field arithmetic of :class:`NumberOrder`
and the spanning bound are shared with the code that writes certificates.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import FieldMismatch, ParseError, SupportTooLarge
from .field_arith import NumberOrder, parse_rational
from .minkowski import spanning_bound

FORMAT = "modsym-reduction-certificate/1"

Col = tuple[tuple[int, ...], ...]
Cols = tuple[Col, ...]


@dataclass(frozen=True, order=True)
class Violation:
    path: str
    check: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: ({self.check}) {self.message}"


@dataclass
class VerifyResult:
    violations: list[Violation] = field(default_factory=list)
    nodes: int = 0
    leaves: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "nodes": self.nodes,
            "leaves": self.leaves,
            "violations": [{"path": v.path, "check": v.check, "message": v.message}
                           for v in self.violations],
        }


# --- field helpers (local on purpose) ---------------------------------------

def _det(order: NumberOrder, cols: Sequence[Sequence[Sequence]]) -> tuple:
    n = len(cols)
    a = [[tuple(Fraction(x) for x in cols[j][i]) for j in range(n)] for i in range(n)]
    det = tuple(Fraction(x) for x in order.one())
    for k in range(n):
        r = next((i for i in range(k, n) if any(a[i][k])), None)
        if r is None:
            return tuple(Fraction(0) for _ in range(order.d))
        if r != k:
            a[k], a[r] = a[r], a[k]
            det = order.neg(det)
        det = order.mul(det, a[k][k])
        inv = order.inv(a[k][k])
        for i in range(k + 1, n):
            if any(a[i][k]):
                f = order.mul(a[i][k], inv)
                for j in range(k, n):
                    a[i][j] = order.sub(a[i][j], order.mul(f, a[k][j]))
    return det


def _norm(order: NumberOrder, cols) -> Fraction:
    return abs(Fraction(order.norm(_det(order, cols))))


def _normal_column(col: Sequence[Sequence]) -> Col:
    flat = [Fraction(x) for e in col for x in e]
    den = math.lcm(*(x.denominator for x in flat))
    ints = [int(x * den) for x in flat]
    g = math.gcd(*ints)
    if g == 0:
        raise ValueError("zero column")
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    if lead < 0:
        ints = [-x for x in ints]
    d = len(col[0])
    return tuple(tuple(ints[k * d:(k + 1) * d]) for k in range(len(col)))


def _normal_form(order: NumberOrder, cols) -> tuple[int, Cols | None]:
    """(sign, normal columns) of a symbol; (0, None) when it vanishes."""
    if _norm(order, cols) == 0:
        return 0, None
    normed = [_normal_column(c) for c in cols]
    keyed = sorted(enumerate(normed), key=lambda t: tuple(x for e in t[1] for x in e), reverse=True)
    # parity by counting inversions of the sorting permutation
    perm = [i for i, _ in keyed]
    inversions = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
    return (-1) ** inversions, tuple(c for _, c in keyed)


def _boundary(order: NumberOrder, vectors: Sequence) -> dict[Cols, int]:
    """Canonicalized terms of sum_k (-1)^k [w_0, .., omit w_k, .., w_n]."""
    out: dict[Cols, int] = {}
    for k in range(len(vectors)):
        face = [v for j, v in enumerate(vectors) if j != k]
        sign, nf = _normal_form(order, face)
        if sign:
            out[nf] = out.get(nf, 0) + (-1) ** k * sign
    return {key: c for key, c in out.items() if c}


def _expected_children(order: NumberOrder, x, q, cols) -> list[tuple[int, int, Cols]]:
    """Read the children off the relation on (x, v_1..v_n).

    ``[v] = -sum_{k>=1} (-1)^k [x, v_1..omit v_k..v_n]``. The face holds the
    same columns as the replacement of ``v_k`` by ``x``, so both share one
    normal form and the face's own sign is the one to carry.
    """
    n = len(cols)
    out = []
    for k in range(1, n + 1):
        if not any(q[k - 1]):
            continue
        face = [x] + [cols[j] for j in range(n) if j != k - 1]
        face_sign, face_nf = _normal_form(order, face)
        if not face_sign:
            continue
        out.append((k - 1, -((-1) ** k) * face_sign, face_nf))
    return out


# --- parsing --------------------------------------------------------------------

def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{path}: expected an integer")
    return value


def _matrix(value, n: int, d: int, path: str) -> Cols:
    """Row-major n x n array of length-d integer vectors -> tuple of columns."""
    if not isinstance(value, list) or len(value) != n:
        raise ParseError(f"{path}: expected {n} rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"{path}[{i}]: expected {n} entries")
        ents = []
        for j, e in enumerate(row):
            if not isinstance(e, list) or len(e) != d:
                raise ParseError(f"{path}[{i}][{j}]: expected {d} coordinates")
            ents.append(tuple(_int(c, f"{path}[{i}][{j}]") for c in e))
        rows.append(ents)
    return tuple(tuple(rows[i][j] for i in range(n)) for j in range(n))


def _vector(value, n: int, d: int, path: str, rational: bool = False) -> tuple:
    if not isinstance(value, list) or len(value) != n:
        raise ParseError(f"{path}: expected {n} entries")
    out = []
    for i, e in enumerate(value):
        if not isinstance(e, list) or len(e) != d:
            raise ParseError(f"{path}[{i}]: expected {d} coordinates")
        if rational:
            try:
                out.append(tuple(parse_rational(c) for c in e))
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise ParseError(f"{path}[{i}]: {exc}") from exc
        else:
            out.append(tuple(_int(c, f"{path}[{i}]") for c in e))
    return tuple(out)


def _get(obj, key: str, path: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{path}: missing '{key}'")
    return obj[key]


def load_certificate(source) -> dict:
    """Accept a path, a JSON string, a dict or an object with ``to_json``."""
    if hasattr(source, "to_json"):
        return source.to_json()
    if isinstance(source, dict):
        return source
    try:
        if isinstance(source, str) and source.lstrip().startswith("{"):
            return json.loads(source)
        with open(source) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read certificate: {exc}") from exc


# --- verification -------------------------------------------------------------------

def verify(cert, order: NumberOrder, C: int | None = None) -> VerifyResult:
    """Check a certificate against ``order``; ``C`` pins the expected bound."""
    data = load_certificate(cert)
    if _get(data, "format", "$") != FORMAT:
        raise ParseError(f"unknown certificate format {data.get('format')!r}")
    if _get(data, "field_hash", "$") != order.digest():
        raise FieldMismatch("certificate was produced for a different order")
    n = _int(_get(data, "n", "$"), "n")
    if n < 2:
        raise ParseError("n must be at least 2")
    d = order.d
    cert_C = _int(_get(data, "C", "$"), "C")
    forced = _get(data, "forced", "$")
    if not isinstance(forced, bool):
        raise ParseError("forced: expected a boolean")
    root = _get(data, "root", "$")
    root_m = _matrix(_get(root, "matrix", "root"), n, d, "root.matrix")
    root_norm = _int(_get(root, "norm", "root"), "root.norm")
    raw_nodes = _get(data, "nodes", "$")
    raw_leaves = _get(data, "leaves", "$")
    if not isinstance(raw_nodes, list) or not isinstance(raw_leaves, list):
        raise ParseError("nodes and leaves must be lists")

    res = VerifyResult(nodes=len(raw_nodes), leaves=len(raw_leaves))
    bad = res.violations.append

    if C is not None and cert_C != C:
        bad(Violation("C", "e", f"certificate bound {cert_C} differs from requested {C}"))
    bound = spanning_bound(order, n).c_min
    if forced != (cert_C < bound):
        bad(Violation("forced", "e", f"forced={forced} inconsistent with C={cert_C}, bound {bound}"))
    if cert_C < 0:
        bad(Violation("C", "e", "negative bound"))
    true_root = _norm(order, root_m)
    if true_root != root_norm:
        bad(Violation("root.norm", "norm", f"declared {root_norm}, actual {true_root}"))

    # parse leaves
    declared: dict[Cols, int] = {}
    for li, leaf in enumerate(raw_leaves):
        p = f"leaves[{li}]"
        coeff = _int(_get(leaf, "coefficient", p), p + ".coefficient")
        mat = _matrix(_get(leaf, "matrix", p), n, d, p + ".matrix")
        nrm = _int(_get(leaf, "norm", p), p + ".norm")
        actual = _norm(order, mat)
        if actual != nrm:
            bad(Violation(p, "norm", f"declared norm {nrm}, actual {actual}"))
        if nrm > cert_C or actual > cert_C:
            bad(Violation(p, "e", f"leaf norm {max(nrm, actual)} exceeds C = {cert_C}"))
        sign, nf = _normal_form(order, mat) if actual else (0, None)
        if not sign or nf != mat or sign != 1:
            bad(Violation(p, "f", "leaf is not a nonzero symbol in normal form"))
        if coeff == 0:
            bad(Violation(p, "f", "zero coefficient"))
        if mat in declared:
            bad(Violation(p, "f", "duplicate leaf"))
        declared[mat] = declared.get(mat, 0) + coeff

    if not raw_nodes:
        expected: dict[Cols, int] = {}
        if true_root > cert_C:
            bad(Violation("root", "e", f"root norm {true_root} exceeds C with no reduction"))
        elif true_root:
            sign, nf = _normal_form(order, root_m)
            expected[nf] = sign
        if expected != declared:
            bad(Violation("leaves", "f", "declared chain differs from the root symbol"))
        res.violations.sort()
        return res

    # parse and check nodes
    node_m: list[Cols] = []
    node_norm: list[Fraction] = []
    links: list[list[tuple[int, Cols, int | None]]] = []
    structural = False
    for k, node in enumerate(raw_nodes):
        p = f"nodes[{k}]"
        if _int(_get(node, "id", p), p + ".id") != k:
            bad(Violation(p, "ref", "node ids must be 0, 1, ... in order"))
            structural = True
        mat = _matrix(_get(node, "matrix", p), n, d, p + ".matrix")
        nrm = _int(_get(node, "norm", p), p + ".norm")
        node_m.append(mat)
        actual = _norm(order, mat)
        node_norm.append(actual)
        if actual != nrm:
            bad(Violation(p, "norm", f"declared norm {nrm}, actual {actual}"))
        if actual <= cert_C:
            bad(Violation(p, "e", f"node norm {actual} is already within C; it should be a leaf"))
    if node_m[0] != root_m:
        bad(Violation("nodes[0]", "ref", "first node is not the root matrix"))
        structural = True

    for k, node in enumerate(raw_nodes):
        p = f"nodes[{k}]"
        mat, nrm = node_m[k], node_norm[k]
        piv = _get(node, "pivot", p)
        x = _vector(_get(piv, "x", p + ".pivot"), n, d, p + ".pivot.x")
        q = _vector(_get(piv, "q", p + ".pivot"), n, d, p + ".pivot.q", rational=True)
        # (a)
        if not any(any(e) for e in x):
            bad(Violation(p, "a", "pivot x is zero"))
        combo = []
        for row in range(n):
            acc = tuple(Fraction(0) for _ in range(d))
            for qi, col in zip(q, mat):
                acc = order.add(acc, order.mul(qi, col[row]))
            combo.append(acc)
        if tuple(combo) != tuple(tuple(Fraction(c) for c in e) for e in x):
            bad(Violation(p, "a", "x differs from sum q_i v_i"))
        # (b)
        for i, qi in enumerate(q):
            if any(qi) and abs(Fraction(order.norm(qi))) >= 1:
                bad(Violation(f"{p}.pivot.q[{i}]", "b", f"|N(q_{i + 1})| = {abs(order.norm(qi))} >= 1"))
        # (c)
        expect = _expected_children(order, x, q, mat) if any(any(e) for e in x) else []
        raw_children = _get(node, "children", p)
        if not isinstance(raw_children, list):
            raise ParseError(f"{p}.children: expected a list")
        got, refs = [], []
        for ci, ch in enumerate(raw_children):
            cp = f"{p}.children[{ci}]"
            idx = _int(_get(ch, "index", cp), cp + ".index")
            sign = _int(_get(ch, "sign", cp), cp + ".sign")
            cm = _matrix(_get(ch, "matrix", cp), n, d, cp + ".matrix")
            cn = _int(_get(ch, "norm", cp), cp + ".norm")
            ref = _get(ch, "node", cp)
            if ref is not None:
                ref = _int(ref, cp + ".node")
            got.append((idx, sign, cm))
            actual = _norm(order, cm)
            if actual != cn:
                bad(Violation(cp, "norm", f"declared norm {cn}, actual {actual}"))
            # (d)
            if actual >= nrm or cn >= nrm:
                bad(Violation(cp, "d", f"child norm {max(actual, cn)} not below node norm {nrm}"))
                structural = True
            # (e) and references
            if ref is None:
                if actual > cert_C or cn > cert_C:
                    bad(Violation(cp, "e", f"leaf norm {max(actual, cn)} exceeds C = {cert_C}"))
            elif not 0 <= ref < len(node_m) or node_m[ref] != cm:
                bad(Violation(cp, "ref", f"node reference {ref} does not hold this matrix"))
                structural = True
            refs.append(ref)
        links.append([(s, m, r) for (_, s, m), r in zip(got, refs)])
        if got != expect:
            bad(Violation(p, "c", "children differ from the relation expansion through x"))

    referenced = {r for k in range(len(links)) for _, _, r in links[k] if r is not None}
    for k in range(1, len(node_m)):
        if k not in referenced:
            bad(Violation(f"nodes[{k}]", "ref", "node is unreachable from the root"))

    # (f)
    if structural:
        bad(Violation("leaves", "f", "tree is malformed; chain not expanded"))
    else:
        memo: dict[int, dict[Cols, int]] = {}
        # children have strictly smaller (recomputed) norm, so this order is topological
        for k in sorted(range(len(node_m)), key=lambda i: node_norm[i]):
            acc: dict[Cols, int] = {}
            for sign, cm, ref in links[k]:
                terms = memo[ref] if ref is not None else {cm: 1}
                for key, c in terms.items():
                    acc[key] = acc.get(key, 0) + sign * c
            memo[k] = {key: c for key, c in acc.items() if c}
        if memo[0] != declared:
            bad(Violation("leaves", "f", "declared chain differs from the expanded tree"))
    res.violations.sort()
    return res


# --- equality modulo relations ----------------------------------------------

def _chain_terms(order: NumberOrder, chain) -> dict[Cols, int]:
    if hasattr(chain, "terms"):
        items = [(m.cols, c) for m, c in chain.terms.items()]
    elif isinstance(chain, Mapping):
        items = list(chain.items())
    else:
        items = list(chain)
    out: dict[Cols, int] = {}
    for cols, c in items:
        sign, nf = _normal_form(order, cols)
        if sign:
            out[nf] = out.get(nf, 0) + sign * c
    return {k: v for k, v in out.items() if v}


def _box_pool(n: int, d: int, bound: int) -> list[Col]:
    pool = set()
    for flat in itertools.product(range(-bound, bound + 1), repeat=n * d):
        if any(flat):
            pool.add(_normal_column([flat[k * d:(k + 1) * d] for k in range(n)]))
    return sorted(pool, reverse=True)


def chain_equal_small(a, b, bound: int, order: NumberOrder | None = None,
                      pool: str = "support", max_relations: int = 200_000) -> bool:
    """Decide whether chains ``a`` and ``b`` agree modulo relations (1)-(4).

    Relations (1)-(3) are absorbed by the normal form; relation (4) is added
    for every (n+1)-subset of a vector pool and ``a - b`` is tested for
    membership in their span by exact elimination. ``pool="support"`` uses
    the columns occurring in either chain, ``pool="box"`` every primitive
    vector with coordinates in ``[-bound, bound]``.
    """
    if order is None:
        from .field_arith import OrderSpec, load_order
        order = load_order(OrderSpec((0, 1), ((Fraction(1),),), "Q"))
    diff = _chain_terms(order, a)
    for key, c in _chain_terms(order, b).items():
        diff[key] = diff.get(key, 0) - c
    diff = {k: v for k, v in diff.items() if v}
    if not diff:
        return True
    n = len(next(iter(diff)))
    for cols in diff:
        for col in cols:
            if any(abs(x) > bound for e in col for x in e):
                raise ValueError(f"entry exceeds bound {bound}")
    if pool == "support":
        vectors = sorted({col for cols in diff for col in cols}, reverse=True)
    elif pool == "box":
        vectors = _box_pool(n, order.d, bound)
    else:
        raise ValueError(f"unknown pool {pool!r}")
    if math.comb(len(vectors), n + 1) > max_relations:
        raise SupportTooLarge(f"{math.comb(len(vectors), n + 1)} relations exceed {max_relations}")

    # sparse echelon form over Q, keyed by pivot symbol
    index: dict[Cols, int] = {}
    echelon: dict[int, dict[int, Fraction]] = {}

    def encode(terms: dict[Cols, int]) -> dict[int, Fraction]:
        return {index.setdefault(k, len(index)): Fraction(v) for k, v in terms.items()}

    def eliminate(row: dict[int, Fraction]) -> dict[int, Fraction]:
        row = dict(row)
        while row:
            p = min(row)
            if p not in echelon:
                return row
            f = row[p]
            for col, v in echelon[p].items():
                nv = row.get(col, 0) - f * v
                if nv:
                    row[col] = nv
                else:
                    row.pop(col, None)
        return row

    for subset in itertools.combinations(vectors, n + 1):
        row = eliminate(encode(_boundary(order, subset)))
        if row:
            p = min(row)
            inv = 1 / row[p]
            echelon[p] = {c: v * inv for c, v in row.items()}
    return not eliminate(encode(diff))
