import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from modsym.errors import (
    BoundTooSmall,
    CapExceeded,
    InvalidPivot,
    NodeBudgetExceeded,
    NotFound,
    SingularMatrix,
    ZeroColumn,
)
from modsym.pivot_search import Pivot, find_pivot
from modsym.reduction import (
    ReduceConfig,
    SymbolChain,
    canonicalize,
    cf_reduce_2x2_rational,
    enumerate_hnf_classes,
    integralize,
    reduce,
    reduce_step,
    relation_terms,
)
from modsym.regular_rep import SymbolMatrix, field_det
from modsym.verify import verify

from oracles import divisor, lex_hnf_classes_bruteforce, sigma

F = Fraction
NAMES = ["Q", "Qi", "Qsqrt2", "Qsqrt5", "Qsqrtm5"]


def qcols(*cols):
    return [[(x,) for x in c] for c in cols]


# --- canonical form ----------------------------------------------------------

def test_canonicalize_examples(QQ):
    a = canonicalize(QQ, qcols((1, 2), (3, 1)))
    b = canonicalize(QQ, qcols((3, 1), (1, 2)))
    assert a.matrix == b.matrix and a.sign == -b.sign
    c = canonicalize(QQ, [[(F(3, 2),), (F(3),)], [(3,), (1,)]])
    assert c.matrix == a.matrix and c.sign == a.sign
    assert canonicalize(QQ, qcols((2, 4), (1, 2))).is_zero
    ident = canonicalize(QQ, qcols((1, 0), (0, 1)))
    assert ident.sign == 1 and ident.matrix.rows() == [[[1], [0]], [[0], [1]]]
    with pytest.raises(ZeroColumn):
        canonicalize(QQ, qcols((0, 0), (0, 1)))


@settings(max_examples=80, deadline=None)
@given(st.data(), st.sampled_from(NAMES), st.integers(2, 3))
def test_canonicalize_relations_1_2(fields, data, name, n):
    o = fields[name]
    ent = st.tuples(*[st.integers(-5, 5)] * o.d)
    cols = [[data.draw(ent) for _ in range(n)] for _ in range(n)]
    if any(not any(any(e) for e in c) for c in cols):
        return
    base = canonicalize(o, cols)
    i, j = data.draw(st.permutations(range(n)))[:2]
    swapped = list(cols)
    swapped[i], swapped[j] = swapped[j], swapped[i]
    s = canonicalize(o, swapped)
    assert s.matrix == base.matrix and s.is_zero == base.is_zero
    if not base.is_zero:
        assert s.sign == -base.sign
    k = data.draw(st.integers(0, n - 1))
    lam = F(data.draw(st.integers(-7, 7).filter(bool)), data.draw(st.integers(1, 5)))
    scaled = list(cols)
    scaled[k] = [tuple(lam * x for x in e) for e in cols[k]]
    t = canonicalize(o, scaled)
    assert t.matrix == base.matrix and (base.is_zero or t.sign == base.sign)
    assert base.is_zero == (base.matrix.norm == 0)


# --- one step -------------------------------------------------------------------

def test_reduce_step_examples(QQ):
    m = SymbolMatrix.from_rows(QQ, [[2, 0], [0, 1]])
    terms = reduce_step(QQ, m, Pivot(((1,), (0,)), ((F(1, 2),), (F(0),)), F(1, 2)))
    assert [(s, t.rows()) for s, t in terms] == [(1, [[[1], [0]], [[0], [1]]])]
    m = SymbolMatrix.from_rows(QQ, [[3, 1], [1, 1]])
    terms = reduce_step(QQ, m, Pivot(((2,), (1,)), ((F(1, 2),), (F(1, 2),)), F(1, 2)))
    assert [t.norm for _, t in terms] == [1, 1]
    assert [s for s, _ in terms] == [1, 1]
    with pytest.raises(InvalidPivot):
        reduce_step(QQ, m, Pivot(((0,), (0,)), ((F(0),), (F(0),)), F(0)))
    with pytest.raises(InvalidPivot):
        reduce_step(QQ, m, Pivot(((3,), (1,)), ((F(1),), (F(0),)), F(1)))


@pytest.mark.parametrize("name", NAMES)
def test_step_identity_and_relation4(fields, name):
    """det(m_i) = q_i det(m), and [m] - sum sign [m_i] is the relation on (x, v)."""
    o = fields[name]
    rng = random.Random(NAMES.index(name))
    for _ in range(10):
        rows = [[tuple(rng.randint(-6, 6) for _ in range(o.d)) for _ in range(2)] for _ in range(2)]
        m = SymbolMatrix.from_rows(o, rows)
        try:
            piv = find_pivot(o, m)
        except (NotFound, SingularMatrix):
            continue
        dm = field_det(o, m.cols)
        for i, sign, cols in relation_terms(piv.x, m.cols):
            child = field_det(o, cols)
            assert child == o.mul(piv.q[i], dm)
            assert sign == 1
        # the canonicalized relation on (x, v1, v2) is [m] - sum sign [m_i]
        step = SymbolChain.of(canonicalize(o, m.cols))
        for sign, child in reduce_step(o, m, piv):
            step.add_chain(SymbolChain.of(canonicalize(o, child.cols)), -sign)
        chain = SymbolChain()
        vecs = [piv.x] + list(m.cols)
        for k in range(3):
            face = [v for j, v in enumerate(vecs) if j != k]
            if field_det(o, face) != o.zero() and any(any(e) for e in face[0]):
                chain.add_chain(SymbolChain.of(canonicalize(o, face)), (-1) ** k)
        assert chain == step
        assert len(step - chain) == 0


# --- full reduction ----------------------------------------------------------------

def test_reduce_examples(QQ):
    ident = SymbolMatrix.from_rows(QQ, [[1, 0], [0, 1]])
    chain, cert = reduce(QQ, ident, 1)
    assert cert.nodes == [] and [(m.rows(), c) for m, c in chain] == [([[[1], [0]], [[0], [1]]], 1)]
    m = SymbolMatrix.from_rows(QQ, [[2, 0], [0, 1]])
    chain, cert = reduce(QQ, m, 1)
    assert len(cert.nodes) == 1
    assert [(mm.rows(), c) for mm, c in chain] == [([[[1], [0]], [[0], [1]]], 1)]
    assert verify(cert, QQ, 1).ok


def test_reduce_singular_and_errors(QQ):
    sing = SymbolMatrix.from_rows(QQ, [[1, 2], [2, 4]])
    chain, cert = reduce(QQ, sing)
    assert len(chain) == 0 and cert.nodes == [] and verify(cert, QQ).ok
    m = SymbolMatrix.from_rows(QQ, [[5, 1], [2, 3]])
    with pytest.raises(BoundTooSmall):
        reduce(QQ, m, 0)
    with pytest.raises(ValueError):
        reduce(QQ, SymbolMatrix.from_rows(QQ, [[3]]))
    big = SymbolMatrix.from_rows(QQ, [[1000, 377], [3, 999]])
    with pytest.raises(NodeBudgetExceeded):
        reduce(QQ, big, 1, ReduceConfig(node_budget=2))


def test_forced_below_bound_surfaces_notfound(Qsqrtm5):
    # C = 0 forces every unimodular-ish symbol to be expanded; those with
    # norm <= 8 need not have pivots
    m = SymbolMatrix.from_rows(Qsqrtm5, [[(1, 0), (0, 0)], [(0, 0), (1, 0)]])
    with pytest.raises(NotFound):
        reduce(Qsqrtm5, m, 0, ReduceConfig(force=True))


def test_integralize(QQ):
    m = integralize(QQ, [[(F(1, 2),), (F(1, 3),)], [(0,), (F(2),)]])
    assert m.rows() == [[[3], [0]], [[2], [2]]]


@pytest.mark.parametrize("name,C", [("Q", 1), ("Qi", 1), ("Qsqrt2", 2), ("Qsqrt5", 1), ("Qsqrtm5", 8)])
def test_roundtrip_all_fields(fields, name, C):
    o = fields[name]
    rng = random.Random(C + len(name))
    for n in (2, 3):
        for _ in range(6 if n == 2 else 2):
            rows = [[tuple(rng.randint(-5, 5) for _ in range(o.d)) for _ in range(n)] for _ in range(n)]
            m = SymbolMatrix.from_rows(o, rows)
            chain, cert = reduce(o, m)
            assert chain.max_norm() <= cert.C
            for node in cert.nodes:
                for _, _, child, _ in node.children:
                    assert child.norm < node.matrix.norm
            res = verify(cert, o, cert.C)
            assert res.ok, res.violations


def test_parallel_matches_serial(Qsqrtm5):
    m = SymbolMatrix.from_rows(Qsqrtm5, [[(13, 4), (2, -7)], [(5, 1), (-9, 3)]])
    _, a = reduce(Qsqrtm5, m, 8)
    _, b = reduce(Qsqrtm5, m, 8, ReduceConfig(jobs=2))
    assert a.to_json() == b.to_json()


def test_memoization_shares_subtrees(QQ):
    m = SymbolMatrix.from_rows(QQ, [[31, 7, 2], [5, 29, 11], [3, 13, 37]])
    chain, cert = reduce(QQ, m, 1)
    mats = [node.matrix for node in cert.nodes]
    assert len(mats) == len(set(mats))
    refs = [ref for node in cert.nodes for *_, ref in node.children if ref is not None]
    assert len(refs) >= len(set(refs))
    assert verify(cert, QQ, 1).ok


# --- continued-fraction oracle ---------------------------------------------------

def test_cf_examples(QQ):
    assert [(m.rows(), c) for m, c in cf_reduce_2x2_rational([[5, 2], [2, 1]])] == [
        ([[[5], [2]], [[2], [1]]], 1)]
    assert [(m.rows(), c) for m, c in cf_reduce_2x2_rational([[2, 0], [0, 1]])] == [
        ([[[1], [0]], [[0], [1]]], 1)]
    with pytest.raises(SingularMatrix):
        cf_reduce_2x2_rational([[1, 2], [2, 4]])


def chain_divisor(chain):
    return divisor([(m.cols, c) for m, c in chain])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-300, 300), min_size=4, max_size=4))
def test_cf_and_reduce_agree_on_divisors(QQ, xs):
    rows = [xs[:2], xs[2:]]
    if xs[0] * xs[3] - xs[1] * xs[2] == 0:
        return
    m = SymbolMatrix.from_rows(QQ, rows)
    chain, _ = reduce(QQ, m, 1)
    cf = cf_reduce_2x2_rational(rows)
    assert chain.max_norm() == 1 and cf.max_norm() == 1
    want = divisor([(m.cols, 1)])
    assert chain_divisor(chain) == want == chain_divisor(cf)


# --- HNF enumeration ---------------------------------------------------------------

@pytest.mark.parametrize("C,count", [(1, 1), (2, 4), (4, 15)])
def test_hnf_examples(C, count):
    assert len(enumerate_hnf_classes(2, C)) == count


def test_hnf_sigma_sums():
    for C in range(1, 21):
        assert len(enumerate_hnf_classes(2, C)) == sum(sigma(k) for k in range(1, C + 1))


def test_hnf_bruteforce():
    C = 5
    brute = lex_hnf_classes_bruteforce(C, C)
    assert len(brute) == len(enumerate_hnf_classes(2, C))


def test_hnf_n3_and_cap():
    # classes of index D in Z^3: sum over d1 d2 d3 = D of d2 * d3^2
    assert len(enumerate_hnf_classes(3, 1)) == 1
    assert len(enumerate_hnf_classes(3, 2)) == 1 + 7
    with pytest.raises(CapExceeded):
        enumerate_hnf_classes(2, 50, cap=10)
    with pytest.raises(ValueError):
        enumerate_hnf_classes(1, 3)
