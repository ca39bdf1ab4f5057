"""Arithmetic in an order of a number field given by a fixed Z-basis.

An order is specified by a monic integer polynomial ``f`` with root ``theta``
and a rational matrix whose row ``j`` expresses the basis element ``w_j`` in
the power basis ``1, theta, ..., theta^(d-1)``. Loading computes structure
constants ``c[j][k][l]`` with ``w_j * w_k = sum_l c[j][k][l] w_l``; all later
arithmetic is a contraction against them.

Elements are tuples of coordinates in the fixed basis: integers for order
elements, ``Fraction`` for field elements.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import mpmath
import sympy

from . import exact_linalg as la
from . import intervals as ivl
from .errors import (
    DimensionMismatch,
    NonSquarefreePoly,
    NotClosed,
    NotMonic,
    ParseError,
    PrecisionUnavailable,
    ReduciblePoly,
    SingularBasis,
)

OrderElement = tuple[int, ...]
FieldElement = tuple[Fraction, ...]

MIN_PRECISION = 32
MAX_PRECISION = 1 << 16

FIELD_DIR = Path(__file__).parent / "data" / "fields"


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    raise ParseError(f"not a rational: {value!r}")


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class OrderSpec:
    """User-facing description of an order: minimal polynomial plus basis."""

    min_poly: tuple[int, ...]
    basis: tuple[tuple[Fraction, ...], ...]
    name: str = ""

    @classmethod
    def from_json(cls, data: dict) -> "OrderSpec":
        try:
            poly = data["min_poly"]
            basis = data["basis"]
        except (KeyError, TypeError) as exc:
            raise ParseError("field file needs 'min_poly' and 'basis'") from exc
        coeffs = []
        for c in poly:
            q = parse_rational(c)
            if q.denominator != 1:
                raise NotMonic("minimal polynomial must have integer coefficients")
            coeffs.append(int(q))
        rows = tuple(tuple(parse_rational(x) for x in row) for row in basis)
        return cls(tuple(coeffs), rows, str(data.get("name", "")))

    def to_json(self) -> dict:
        return {
            "min_poly": list(self.min_poly),
            "basis": [[format_rational(x) for x in row] for row in self.basis],
        }

    def digest(self) -> str:
        """Stable hash of the mathematical content (the name is ignored)."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def read_field_file(path: str | Path) -> OrderSpec:
    """Read a field file; bare names such as ``Qsqrtm5`` resolve to shipped files."""
    p = Path(path)
    if not p.exists():
        shipped = FIELD_DIR / f"{path}.json"
        if shipped.exists():
            p = shipped
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ParseError(f"no such field file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return OrderSpec.from_json(data)


def shipped_fields() -> dict[str, Path]:
    return {p.stem: p for p in sorted(FIELD_DIR.glob("*.json"))}


# --- polynomial helpers (coefficients low degree first) ------------------

def _poly_mulmod(a: Sequence[Fraction], b: Sequence[Fraction], f: Sequence[int]) -> list[Fraction]:
    d = len(f) - 1
    prod = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            for i in range(d + 1):
                prod[k - d + i] -= c * f[i]
    return (prod + [Fraction(0)] * d)[:d]


def _has_integer_root(f: Sequence[int]) -> bool:
    c0 = f[0]
    if c0 == 0:
        return True
    c0 = abs(c0)
    for r in range(1, math.isqrt(c0) + 1):
        if c0 % r == 0:
            for cand in {r, c0 // r}:
                for z in (cand, -cand):
                    if sum(c * z**i for i, c in enumerate(f)) == 0:
                        return True
    return False


@dataclass(frozen=True, eq=False)
class NumberOrder:
    """An order with structure constants over a fixed basis ``w_1 = 1, ..., w_d``.

    Immutable after :func:`load_order`; every method is a pure function of
    its arguments (the root cache only memoizes a deterministic computation).
    """

    spec: OrderSpec
    d: int
    r: int
    s: int
    struct_consts: tuple[tuple[tuple[int, ...], ...], ...]
    disc: int
    _basis_inv: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- element plumbing ------------------------------------------------
    def _check(self, *elems: Sequence) -> None:
        for e in elems:
            if len(e) != self.d:
                raise DimensionMismatch(f"element of length {len(e)} in a degree-{self.d} order")

    def one(self) -> OrderElement:
        return (1,) + (0,) * (self.d - 1)

    def zero(self) -> OrderElement:
        return (0,) * self.d

    def from_int(self, k: int) -> OrderElement:
        return (k,) + (0,) * (self.d - 1)

    def add(self, a, b):
        self._check(a, b)
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        self._check(a, b)
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def scale(self, k, a):
        return tuple(k * x for x in a)

    def mul(self, a, b):
        """Product of two elements; integer inputs give integer outputs."""
        self._check(a, b)
        d = self.d
        c = self.struct_consts
        out = [0] * d
        for j in range(d):
            aj = a[j]
            if not aj:
                continue
            cj = c[j]
            for k in range(d):
                bk = b[k]
                if not bk:
                    continue
                t = aj * bk
                for l, v in enumerate(cj[k]):
                    if v:
                        out[l] += t * v
        return tuple(out)

    def rep(self, a) -> list[list]:
        """Matrix of ``y -> a*y``: column ``j`` holds the coordinates of ``a*w_j``."""
        self._check(a)
        d = self.d
        c = self.struct_consts
        return [[sum(a[k] * c[k][j][l] for k in range(d) if a[k]) for j in range(d)] for l in range(d)]

    def norm(self, a) -> Fraction | int:
        if not any(a):
            self._check(a)
            return 0
        return la.det(self.rep(a))

    def norm_form_eval(self, lam: Sequence) -> Fraction | int:
        """Norm form evaluated at a coefficient tuple (same value as ``norm``)."""
        self._check(lam)
        return self.norm(tuple(Fraction(x) for x in lam))

    def trace(self, a) -> Fraction | int:
        m = self.rep(a)
        return sum(m[i][i] for i in range(self.d))

    def inv(self, a) -> FieldElement:
        self._check(a)
        if not any(a):
            raise ZeroDivisionError("zero has no inverse")
        return tuple(la.solve(self.rep(a), [1] + [0] * (self.d - 1)))

    def div(self, a, b) -> FieldElement:
        return self.mul(a, self.inv(b))

    def is_integral_coords(self, a) -> bool:
        return all(Fraction(x).denominator == 1 for x in a)

    # -- embeddings ------------------------------------------------------
    def _theta_intervals(self, precision: int):
        """Certified enclosures of the chosen roots, as (ctx, [(re, im), ...])."""
        if not MIN_PRECISION <= precision <= MAX_PRECISION:
            raise PrecisionUnavailable(f"precision {precision} outside [{MIN_PRECISION}, {MAX_PRECISION}]")
        key = ("theta", precision)
        if key not in self._cache:
            ctx = ivl.context(precision + 16)
            roots = _certify_roots(ctx, self.spec.min_poly, self.r, precision)
            if roots is None:
                raise PrecisionUnavailable("could not certify root enclosures")
            self._cache[key] = (ctx, roots)
        return self._cache[key]

    def embed(self, q: Sequence, precision: int = 128) -> list:
        """Interval enclosure of ``q`` in R^r x C^s, flattened.

        Entries are the ``r`` real embeddings followed by (Re, Im) of one
        representative (positive imaginary part) of each complex pair.
        """
        self._check(q)
        ctx, thetas = self._theta_intervals(precision)
        # power-basis coefficients of q
        coeffs = [sum(Fraction(q[j]) * self.spec.basis[j][k] for j in range(self.d)) for k in range(self.d)]
        out = []
        for idx, (re, im) in enumerate(thetas):
            vre, vim = ctx.mpf(0), ctx.mpf(0)
            for c in reversed(coeffs):
                vre, vim = vre * re - vim * im, vre * im + vim * re
                vre = vre + _iv_rational(ctx, c)
            if idx < self.r:
                out.append(vre)
            else:
                out.extend([vre, vim])
        return out

    def embed_matrix(self, precision: int = 128) -> list[list]:
        """``(r+2s) x d`` interval matrix whose column ``j`` embeds ``w_j``."""
        key = ("embed_matrix", precision)
        if key not in self._cache:
            cols = [self.embed(self.unit(j), precision) for j in range(self.d)]
            self._cache[key] = [[cols[j][i] for j in range(self.d)] for i in range(self.d)]
        return self._cache[key]

    def unit(self, j: int) -> OrderElement:
        return tuple(int(k == j) for k in range(self.d))

    def digest(self) -> str:
        return self.spec.digest()

    def __repr__(self) -> str:
        label = self.spec.name or f"f={list(self.spec.min_poly)}"
        return f"NumberOrder({label}, d={self.d}, r={self.r}, s={self.s}, disc={self.disc})"


def _iv_rational(ctx, q: Fraction):
    return ivl.from_rational(ctx, q)


def _poly_at(ctx, f: Sequence[int], re, im):
    """Interval values of f and f' at re + i*im."""
    fre, fim = ctx.mpf(0), ctx.mpf(0)
    dre, dim = ctx.mpf(0), ctx.mpf(0)
    for i in range(len(f) - 1, -1, -1):
        if i:
            dre, dim = dre * re - dim * im + i * f[i], dre * im + dim * re
        fre, fim = fre * re - fim * im + f[i], fre * im + fim * re
    return fre, fim, dre, dim


def _approx_roots(f: Sequence[int], r: int, work: int) -> tuple[list[Fraction], list[tuple[Fraction, Fraction]]]:
    """High-precision root approximations: sorted reals, upper-half-plane complex."""
    with mpmath.workprec(work):
        try:
            zs = mpmath.polyroots(list(reversed(f)), maxsteps=400, extraprec=work)
        except mpmath.libmp.NoConvergence as exc:
            raise PrecisionUnavailable("root approximation did not converge") from exc
        zs = [mpmath.mpc(z) for z in zs]
        zs.sort(key=lambda z: abs(z.imag))
        reals = sorted((_to_fraction(z.real) for z in zs[:r]), reverse=True)
        upper = sorted((_to_fraction(z.real), _to_fraction(z.imag)) for z in zs[r:] if z.imag > 0)
    return reals, upper


def _to_fraction(x) -> Fraction:
    return ivl._raw_to_fraction(mpmath.mpf(x)._mpf_)


def _certify_roots(ctx, f: Sequence[int], r: int, precision: int):
    """Certified enclosures of all roots: r reals, then one per complex pair.

    Each real approximation ``z`` is certified by a sign change of ``f`` on
    ``[z - h, z + h]``. Each complex approximation gets the disk of radius
    ``deg * |f(z)| / |f'(z)|``, which always contains a root. When the r real
    intervals and the 2s conjugate disks are pairwise disjoint (disks kept
    off the real axis) they hold d distinct roots, i.e. every root exactly
    once. Returns a list of interval pairs (re, im), or ``None``.
    """
    deg = len(f) - 1
    reals, upper = _approx_roots(f, r, precision + 40)
    if len(reals) != r or 2 * len(upper) != deg - r:
        return None
    h = Fraction(1, 1 << (precision + 8))
    out = []
    if any(a - b <= 2 * h for a, b in zip(reals, reals[1:])):
        return None
    for z in reals:
        lo, hi = z - h, z + h
        flo = ivl.bounds(_poly_at(ctx, f, ivl.from_rational(ctx, lo), ctx.mpf(0))[0])
        fhi = ivl.bounds(_poly_at(ctx, f, ivl.from_rational(ctx, hi), ctx.mpf(0))[0])
        if not ((flo[1] < 0 < fhi[0]) or (fhi[1] < 0 < flo[0])):
            return None
        out.append((ivl.hull(ctx, lo, hi), ctx.mpf(0)))
    disks = []
    for zre, zim in upper:
        fre, fim, dre, dim = _poly_at(ctx, f, ivl.from_rational(ctx, zre), ivl.from_rational(ctx, zim))
        dabs2 = dre**2 + dim**2
        if ivl.bounds(dabs2)[0] <= 0:
            return None
        rad = ivl.bounds(ctx.sqrt((deg * deg) * (fre**2 + fim**2) / dabs2))[1]
        rad = max(rad, Fraction(1, 1 << (precision + 24)))
        if rad > h or zim <= rad:
            return None
        disks.append((zre, zim, rad))
    for i, (a_re, a_im, a_r) in enumerate(disks):
        for b_re, b_im, b_r in disks[i + 1:]:
            if (a_re - b_re) ** 2 + (a_im - b_im) ** 2 <= (a_r + b_r) ** 2:
                return None
    for zre, zim, rad in disks:
        out.append((ivl.hull(ctx, zre - rad, zre + rad), ivl.hull(ctx, zim - rad, zim + rad)))
    return out


def load_order(spec: OrderSpec) -> NumberOrder:
    """Validate an :class:`OrderSpec` and compute its structure constants."""
    f = list(spec.min_poly)
    if len(f) < 2 or f[-1] != 1:
        raise NotMonic(f"minimal polynomial {f} is not monic of degree >= 1")
    d = len(f) - 1
    basis = [list(row) for row in spec.basis]
    if len(basis) != d or any(len(row) != d for row in basis):
        raise SingularBasis(f"basis must be a {d}x{d} matrix")
    if basis[0] != [1] + [0] * (d - 1):
        raise SingularBasis("first basis element must be the constant 1")
    if la.det(basis) == 0:
        raise SingularBasis("basis matrix is singular")
    t = sympy.Symbol("t")
    poly = sympy.Poly(list(reversed(f)), t)
    if d > 1 and not poly.is_sqf:
        raise NonSquarefreePoly(f"{poly.as_expr()} has repeated roots")
    if 2 <= d <= 3 and _has_integer_root(f):
        raise ReduciblePoly(f"{poly.as_expr()} has a rational root")

    binv = la.inverse(basis)
    consts = []
    for j in range(d):
        plane = []
        for k in range(d):
            prod = _poly_mulmod(basis[j], basis[k], f)
            coords = [sum(prod[i] * binv[i][l] for i in range(d)) for l in range(d)]
            if any(c.denominator != 1 for c in coords):
                raise NotClosed(f"w_{j + 1} * w_{k + 1} is not in the Z-span of the basis")
            plane.append(tuple(int(c) for c in coords))
        consts.append(tuple(plane))
    consts = tuple(consts)

    r = int(poly.count_roots()) if d > 1 else 1
    s = (d - r) // 2
    traces = [sum(consts[k][l][l] for l in range(d)) for k in range(d)]
    gram = [[sum(consts[i][j][k] * traces[k] for k in range(d)) for j in range(d)] for i in range(d)]
    disc = la.det(gram)
    if disc == 0:
        raise NonSquarefreePoly("trace form is degenerate")
    return NumberOrder(spec, d, r, s, consts, int(disc),
                       tuple(tuple(row) for row in binv))


def load_field(path: str | Path) -> NumberOrder:
    return load_order(read_field_file(path))
