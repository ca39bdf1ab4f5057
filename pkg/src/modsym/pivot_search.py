"""Search for the pivot ``x = sum q_i v_i`` with every ``|N(q_i)| < 1``.

The search runs in coefficient space. The lattice ``m^-1 O^n`` (coordinates
``phi(m)^-1 Z^(nd)``) is pushed through ``mu`` block by block, LLL-reduced,
and enumerated in growing balls around the origin. The body ``Q^n`` of the
default octahedron sits inside the ball of radius ``sqrt(n) * R_Q``, so when
``||m||`` exceeds the spanning bound a valid pivot turns up there. Floats
only order the candidates; acceptance is always an exact norm computation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact_linalg as la
from .errors import BoxTooLarge, NodeBudgetExceeded, NotFound, RadiusOverflow, SingularMatrix
from .field_arith import NumberOrder
from .minkowski import mu_float, octahedron
from .regular_rep import SymbolMatrix, rep_matrix


@dataclass(frozen=True)
class PivotConfig:
    node_budget: int = 10**7
    escalation: float = 2.0
    lll_delta: float = 0.99
    precision: int = 128
    box_cap: int = 10**6


@dataclass(frozen=True)
class Pivot:
    x: tuple[tuple[int, ...], ...]
    q: tuple[tuple[Fraction, ...], ...]
    max_norm: Fraction

    def to_json(self) -> dict:
        from .field_arith import format_rational
        return {
            "x": [list(e) for e in self.x],
            "q": [[format_rational(c) for c in qi] for qi in self.q],
        }


def _accept(order: NumberOrder, q: Sequence[Sequence[Fraction]]) -> Fraction | None:
    worst = Fraction(0)
    for qi in q:
        if any(qi):
            nm = abs(Fraction(order.norm(qi)))
            if nm >= 1:
                return None
            worst = max(worst, nm)
    return worst


def _order_key(norm2: float, z: Sequence[int]) -> tuple:
    # larger coordinates first among equal lengths, so x and -x resolve to
    # the one whose first nonzero coordinate is positive
    return la.norm_key(norm2), tuple(-c for c in z)


def find_pivot(order: NumberOrder, m: SymbolMatrix, config: PivotConfig | None = None) -> Pivot:
    """First valid pivot in (length, reverse-lex) order of the embedded lattice."""
    config = config or PivotConfig()
    if m.norm == 0:
        raise SingularMatrix("pivot search needs a nonsingular matrix")
    n, d = m.n, order.d
    phi_inv = la.inverse(rep_matrix(order, m))
    mu = mu_float(order, config.precision)
    gram = mu.T @ mu
    blk = np.kron(np.eye(n), mu)
    embedded = blk @ np.array([[float(x) for x in row] for row in phi_inv])
    # lattice basis vectors are the columns of `embedded`
    reduced, u = la.lll_reduce(embedded.T.tolist(), config.lll_delta)
    u_arr = u

    r_circ = math.sqrt(n) * octahedron(order).circumradius()
    limits = [r_circ * (1 + 1e-9), r_circ * config.escalation * (1 + 1e-9)]
    shortest = min(math.sqrt(sum(c * c for c in v)) for v in reduced)
    radius = min(shortest * (1 + 1e-9), limits[0])
    seen: set[tuple[int, ...]] = set()
    nodes_left = config.node_budget
    for limit in limits:
        while True:
            radius = min(radius, limit)
            try:
                coeff_vectors, used = la.lattice_points(reduced, radius, nodes_left)
            except RadiusOverflow as exc:
                raise NodeBudgetExceeded(str(exc)) from exc
            nodes_left -= used
            fresh = []
            for _, c in coeff_vectors:
                z = tuple(sum(ci * u_arr[i][j] for i, ci in enumerate(c) if ci) for j in range(n * d))
                if z in seen:
                    continue
                seen.add(z)
                qv = la.matvec(phi_inv, z)
                q = [tuple(qv[i * d:(i + 1) * d]) for i in range(n)]
                norm2 = sum(float(np.array([float(t) for t in qi]) @ gram @ np.array([float(t) for t in qi]))
                            for qi in q)
                fresh.append((_order_key(norm2, z), z, q))
            fresh.sort(key=lambda item: item[0])
            for _, z, q in fresh:
                worst = _accept(order, q)
                if worst is not None:
                    x = tuple(tuple(z[i * d:(i + 1) * d]) for i in range(n))
                    return Pivot(x, tuple(tuple(qi) for qi in q), worst)
            if radius >= limit:
                break
            radius *= 2
    raise NotFound(f"no pivot within radius {limits[-1]:.4g} (norm {m.norm})")


def exhaustive_pivot(order: NumberOrder, m: SymbolMatrix, box_radius: int,
                     box_cap: int = 10**6) -> Pivot:
    """Brute-force oracle: scan every ``x`` with coordinates in ``[-R, R]``.

    Candidates are visited in descending lexicographic order of their
    coordinate vector; the first one passing the exact test is returned.
    """
    if box_radius < 1:
        raise ValueError("box_radius must be at least 1")
    if m.norm == 0:
        raise SingularMatrix("pivot search needs a nonsingular matrix")
    n, d = m.n, order.d
    count = (2 * box_radius + 1) ** (n * d)
    if count > box_cap:
        raise BoxTooLarge(f"{count} candidates exceed the cap {box_cap}")
    phi_inv = la.inverse(rep_matrix(order, m))
    axis = range(box_radius, -box_radius - 1, -1)
    for z in itertools.product(axis, repeat=n * d):
        if not any(z):
            continue
        qv = la.matvec(phi_inv, z)
        q = [tuple(qv[i * d:(i + 1) * d]) for i in range(n)]
        worst = _accept(order, q)
        if worst is not None:
            x = tuple(tuple(z[i * d:(i + 1) * d]) for i in range(n))
            return Pivot(x, tuple(q), worst)
    raise NotFound(f"no pivot with coordinates in [-{box_radius}, {box_radius}]")
