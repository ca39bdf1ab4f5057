import random
from fractions import Fraction

import pytest

from modsym.errors import BoxTooLarge, NodeBudgetExceeded, NotFound, SingularMatrix
from modsym.minkowski import region_S_contains, spanning_bound
from modsym.pivot_search import PivotConfig, exhaustive_pivot, find_pivot
from modsym.regular_rep import SymbolMatrix, combine

F = Fraction
NAMES = ["Q", "Qi", "Qsqrt2", "Qsqrt5", "Qsqrtm5"]


def check_pivot(order, m, piv):
    assert any(any(e) for e in piv.x)
    assert combine(order, piv.q, m.cols) == tuple(tuple(F(c) for c in e) for e in piv.x)
    ok, q = region_S_contains(order, m, piv.x)
    assert ok and tuple(q) == tuple(piv.q)
    assert piv.max_norm < 1
    for qi in piv.q:
        if any(qi):
            assert abs(order.norm(qi)) * m.norm < m.norm


def test_spec_example_rational(QQ):
    m = SymbolMatrix.from_rows(QQ, [[2, 0], [0, 1]])
    piv = find_pivot(QQ, m)
    assert piv.x == ((1,), (0,)) and piv.q == ((F(1, 2),), (0,))
    assert exhaustive_pivot(QQ, m, 1).x == ((1,), (0,))


def test_spec_example_gaussian(Qi):
    m = SymbolMatrix.from_rows(Qi, [[(1, 1), (0, 0)], [(0, 0), (1, 0)]])
    piv = find_pivot(Qi, m)
    assert piv.x == ((1, 0), (0, 0))
    assert piv.q == ((F(1, 2), F(-1, 2)), (0, 0))
    assert piv.max_norm == F(1, 2)


@pytest.mark.parametrize("name", NAMES)
def test_identity_has_no_pivot(fields, name):
    o = fields[name]
    one, zero = o.one(), o.zero()
    m = SymbolMatrix.from_cols(o, [[one, zero], [zero, one]])
    with pytest.raises(NotFound):
        find_pivot(o, m)
    with pytest.raises(NotFound):
        exhaustive_pivot(o, m, 1)


def test_errors(QQ):
    sing = SymbolMatrix.from_rows(QQ, [[1, 2], [2, 4]])
    with pytest.raises(SingularMatrix):
        find_pivot(QQ, sing)
    m = SymbolMatrix.from_rows(QQ, [[2, 0], [0, 1]])
    with pytest.raises(BoxTooLarge):
        exhaustive_pivot(QQ, m, 100, box_cap=1000)
    with pytest.raises(ValueError):
        exhaustive_pivot(QQ, m, 0)
    big = SymbolMatrix.from_rows(QQ, [[10**6, 1], [3, 10**6 + 7]])
    with pytest.raises(NodeBudgetExceeded):
        find_pivot(QQ, big, PivotConfig(node_budget=1))


def test_deterministic(Qsqrtm5):
    m = SymbolMatrix.from_rows(Qsqrtm5, [[(7, 3), (2, -1)], [(1, 4), (-5, 2)]])
    assert find_pivot(Qsqrtm5, m) == find_pivot(Qsqrtm5, m)


def random_matrix(rng, order, n, span):
    while True:
        rows = [[tuple(rng.randint(-span, span) for _ in range(order.d)) for _ in range(n)] for _ in range(n)]
        m = SymbolMatrix.from_rows(order, rows)
        if m.norm:
            return m


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [2, 3])
def test_completeness_above_bound(fields, name, n):
    o = fields[name]
    C = spanning_bound(o, n).c_min
    rng = random.Random(10 * NAMES.index(name) + n)
    tried = 0
    while tried < 100:
        m = random_matrix(rng, o, n, 4 if n == 3 else 6)
        if m.norm <= C:
            continue
        tried += 1
        check_pivot(o, m, find_pivot(o, m))


@pytest.mark.parametrize("name", NAMES)
def test_agrees_with_exhaustive(fields, name):
    o = fields[name]
    rng = random.Random(7)
    for _ in range(15):
        m = random_matrix(rng, o, 2, 3)
        try:
            brute = exhaustive_pivot(o, m, 2)
        except NotFound:
            continue
        check_pivot(o, m, brute)
        check_pivot(o, m, find_pivot(o, m))
