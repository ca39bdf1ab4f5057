import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modsym import intervals as ivl
from modsym.errors import BadSignature, PointOffSurface, SingularMatrix
from modsym.minkowski import (
    PiRational,
    abs_det_mu,
    certified_floor,
    interval_det,
    minkowski_constant,
    monte_carlo_volume,
    mu_matrix,
    norm_form_real,
    octahedron,
    octahedron_volume,
    region_S_contains,
    region_T_contains,
    sample_octahedron,
    spanning_bound,
    vol_P,
)
from modsym.regular_rep import SymbolMatrix

from oracles import FIELD_DATA, FROZEN_BOUNDS, bound_oracle, volume_oracle

F = Fraction
PI = PiRational(1, 1)


def test_minkowski_constant_examples():
    assert minkowski_constant(1, 0) == PiRational(1)
    assert minkowski_constant(2, 1) == PiRational(F(1, 2), 1)
    assert minkowski_constant(2, 0) == PiRational(2)
    with pytest.raises(BadSignature):
        minkowski_constant(2, 2)


@pytest.mark.parametrize("key", sorted(FROZEN_BOUNDS))
def test_spanning_bound_frozen(fields, key):
    name, n = key
    d, s, disc = FIELD_DATA[name]
    assert bound_oracle(d, s, disc, n) == FROZEN_BOUNDS[key]
    assert spanning_bound(fields[name], n).c_min == FROZEN_BOUNDS[key]


def test_spanning_bound_rejects_n1(QQ):
    with pytest.raises(ValueError):
        spanning_bound(QQ, 1)


def test_certified_floor_exact_boundary():
    # (sqrt 8 / 2)^2 = 2 exactly: the rational path must not round down
    assert certified_floor(PiRational(F(1, 2), 0, 8) ** 2) == 2
    assert certified_floor(PiRational(1, 0, 2)) == 1
    assert certified_floor(PiRational(320, -2)) == 32
    assert str(PiRational(1, 0, 400)) == "20"


def test_mu_examples(QQ, Qi, Qsqrt2):
    assert [[ivl.bounds(x) for x in row] for row in mu_matrix(QQ)] == [[(1, 1)]]
    mi = mu_matrix(Qi)
    for row, want in zip(mi, [[1, 0], [0, 1]]):
        for x, w in zip(row, want):
            assert ivl.contains(x, w)
    m2 = mu_matrix(Qsqrt2)
    assert ivl.contains(m2[0][0], 1) and ivl.contains(m2[1][0], 1)
    assert m2[0][1].a > 1.414 and m2[1][1].b < -1.414


@pytest.mark.parametrize("name", ["Q", "Qi", "Qsqrt2", "Qsqrt5", "Qsqrtm5"])
def test_det_mu_encloses(fields, name):
    o = fields[name]
    det = interval_det(mu_matrix(o, 128))
    want = abs_det_mu(o).interval(128)
    assert abs(det).a <= want.b and want.a <= abs(det).b
    assert float(abs_det_mu(o)) == pytest.approx(2.0 ** -o.s * math.sqrt(abs(o.disc)))


def test_octahedron_examples():
    o = octahedron((1, 0))
    assert o.contains([[1.0], [-1.0]]).all() and not o.contains([[1.01]]).any()
    disk = octahedron((0, 1))
    assert disk.contains([[0.6, 0.8]]).all() and not disk.contains([[0.8, 0.8]]).any()
    o = octahedron((2, 0), (F(2), F(1, 2)))
    # |x1|/2 + 2|x2| <= 2
    assert o.contains([[4.0, 0.0], [0.0, 1.0], [2.0, 0.5]]).all()
    assert not o.contains([[2.0, 0.51]]).any()
    with pytest.raises(PointOffSurface):
        octahedron((2, 0), (F(2), F(1)))
    with pytest.raises(PointOffSurface):
        octahedron((1, 0), (F(2),))


def test_octahedron_volume_examples():
    assert octahedron_volume(octahedron((1, 0))) == PiRational(2)
    assert octahedron_volume(octahedron((0, 1))) == PI
    assert octahedron_volume(octahedron((2, 0))) == PiRational(8)
    assert octahedron_volume(octahedron((2, 0), (F(2), F(1, 2)))) == PiRational(8)
    assert octahedron_volume(octahedron((1, 1))) == PiRational(F(9, 2), 1)
    assert octahedron_volume(octahedron((0, 2))) == PiRational(F(8, 3), 2)


@pytest.mark.parametrize("sig,p", [
    ((1, 0), None), ((2, 0), None), ((2, 0), (F(2), F(1, 2))),
    ((0, 1), None), ((1, 1), None), ((1, 1), (F(4), F(1, 2))),
    ((0, 2), None), ((0, 2), (F(2), F(1, 2))),
])
def test_monte_carlo_volume_quick(sig, p):
    o = octahedron(sig, p)
    est, err = monte_carlo_volume(o, 200_000, seed=11)
    assert abs(est - volume_oracle(*sig)) < 5 * err + 1e-9
    assert float(octahedron_volume(o)) == pytest.approx(volume_oracle(*sig))


@pytest.mark.parametrize("sig,p", [((2, 0), None), ((1, 1), (F(4), F(1, 2))), ((0, 2), (F(2), F(1, 2)))])
def test_am_gm_containment(sig, p):
    o = octahedron(sig, p)
    pts = sample_octahedron(o, 20_000, seed=3)
    assert (norm_form_real(o, pts) <= 1 + 1e-12).all()


def test_region_T(Qi, Qsqrt2):
    assert region_T_contains(Qi, (0, 0))
    assert not region_T_contains(Qi, (1, 1))
    assert region_T_contains(Qsqrt2, (1, 1))


def test_region_S(QQ):
    m = SymbolMatrix.from_rows(QQ, [[2, 0], [0, 1]])
    assert region_S_contains(QQ, m, [(0,), (0,)]) == (True, [(0,), (0,)])
    ok, q = region_S_contains(QQ, m, [(1,), (0,)])
    assert ok and q == [(F(1, 2),), (0,)]
    ident = SymbolMatrix.from_rows(QQ, [[1, 0], [0, 1]])
    assert not region_S_contains(QQ, ident, [(1,), (0,)])[0]
    with pytest.raises(SingularMatrix):
        region_S_contains(QQ, SymbolMatrix.from_rows(QQ, [[1, 2], [2, 4]]), [(1,), (0,)])


def test_vol_P(QQ, Qi):
    r = vol_P(Qi, SymbolMatrix.from_rows(Qi, [[(1, 0)]]))
    assert r.exact == PI and not r.exceeds_2nd
    r = vol_P(QQ, SymbolMatrix.from_rows(QQ, [[2, 0], [0, 1]]))
    assert r.exact == PiRational(8) and r.exceeds_2nd
    with pytest.raises(SingularMatrix):
        vol_P(QQ, SymbolMatrix.from_rows(QQ, [[1, 1], [1, 1]]))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["Qi", "Qsqrt2", "Qsqrtm5"]), st.integers(1, 200))
def test_exceeds_2nd_matches_volume(fields, name, norm):
    # vol P > 2^(nd)  iff  ||m|| > (sqrt|D| / M_K)^n, for a diagonal m of that norm over Q-coords
    o = fields[name]
    cols = [[(norm, 0), (0, 0)], [(0, 0), (1, 0)]]
    m = SymbolMatrix.from_cols(o, cols)
    rep = vol_P(o, m)
    vol = rep.exact.interval(256)
    bound = 2 ** (2 * o.d)
    if vol.a > bound:
        assert rep.exceeds_2nd
    elif vol.b < bound:
        assert not rep.exceeds_2nd
