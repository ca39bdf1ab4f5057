"""Minkowski constant, the spanning bound and the generalized octahedron.

Constants involving pi are kept exactly as ``coeff * pi**k * sqrt(rad)``
(:class:`PiRational`) and only turned into certified intervals on demand, so
every floor and comparison made here is exact or interval-certified.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact_linalg as la
from . import intervals as ivl
from .errors import BadSignature, DimensionMismatch, FloorUndecidable, PointOffSurface, SingularMatrix
from .field_arith import NumberOrder
from .regular_rep import SymbolMatrix, rep_matrix

MAX_FLOOR_PRECISION = 1 << 14


@dataclass(frozen=True)
class PiRational:
    """The real number ``coeff * pi**pi_power * sqrt(rad)``."""

    coeff: Fraction
    pi_power: int = 0
    rad: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "rad", Fraction(self.rad))
        if self.rad < 0:
            raise ValueError("radicand must be nonnegative")
        num, den = self.rad.numerator, self.rad.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den and self.rad:
            object.__setattr__(self, "coeff", self.coeff * Fraction(rn, rd))
            object.__setattr__(self, "rad", Fraction(1))

    def __mul__(self, other: "PiRational | int | Fraction") -> "PiRational":
        if not isinstance(other, PiRational):
            return PiRational(self.coeff * other, self.pi_power, self.rad)
        return PiRational(self.coeff * other.coeff, self.pi_power + other.pi_power, self.rad * other.rad)

    __rmul__ = __mul__

    def __truediv__(self, other: "PiRational | int | Fraction") -> "PiRational":
        if not isinstance(other, PiRational):
            return PiRational(self.coeff / other, self.pi_power, self.rad)
        if other.coeff == 0 or other.rad == 0:
            raise ZeroDivisionError("division by zero constant")
        return PiRational(self.coeff / other.coeff, self.pi_power - other.pi_power, self.rad / other.rad)

    def __pow__(self, k: int) -> "PiRational":
        if k < 0:
            return PiRational(1) / (self ** -k)
        return PiRational(self.coeff**k, self.pi_power * k, self.rad**k)

    def _key(self):
        if self.coeff == 0 or self.rad == 0:
            return (0,)
        sign = 1 if self.coeff > 0 else -1
        return (sign, self.pi_power, self.coeff**2 * self.rad)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiRational):
            other = PiRational(Fraction(other))
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def interval(self, precision: int = 128):
        ctx = ivl.context(precision)
        v = ivl.from_rational(ctx, self.coeff) * ctx.pi**self.pi_power
        if self.rad != 1:
            v = v * ctx.sqrt(ivl.from_rational(ctx, self.rad))
        return v

    def __float__(self) -> float:
        return self.coeff.__float__() * math.pi**self.pi_power * math.sqrt(self.rad)

    def rational_square(self) -> Fraction | None:
        """``value**2`` when it is rational (no pi factor), else ``None``."""
        return self.coeff**2 * self.rad if self.pi_power == 0 else None

    def __str__(self) -> str:
        parts = [str(self.coeff)] if self.coeff != 1 or (not self.pi_power and self.rad == 1) else []
        if self.pi_power:
            parts.append("pi" if self.pi_power == 1 else f"pi^{self.pi_power}")
        if self.rad != 1:
            parts.append(f"sqrt({self.rad})")
        return "*".join(parts)


def certified_floor(value: PiRational, precision: int = 64) -> int:
    """Exact floor of a nonnegative :class:`PiRational`.

    Without a pi factor the square is rational and ``floor(sqrt(x)) ==
    isqrt(floor(x))`` settles it exactly. Otherwise the interval precision is
    doubled until the enclosure no longer straddles an integer.
    """
    if value.coeff < 0:
        raise ValueError("certified_floor expects a nonnegative value")
    sq = value.rational_square()
    if sq is not None:
        return math.isqrt(sq.numerator // sq.denominator)
    prec = precision
    while prec <= MAX_FLOOR_PRECISION:
        fl = ivl.floor_certified(value.interval(prec))
        if fl is not None:
            return fl
        prec *= 2
    raise FloorUndecidable(f"floor of {value} not certified at {MAX_FLOOR_PRECISION} bits")


def minkowski_constant(d: int, s: int) -> PiRational:
    """``(pi/4)^s d^d / d!``."""
    if d < 1 or s < 0 or 2 * s > d:
        raise BadSignature(f"no signature with degree {d} and {s} complex places")
    return PiRational(Fraction(d**d, math.factorial(d) * 4**s), s)


@dataclass(frozen=True)
class BoundReport:
    mink_const: PiRational
    ratio_power: PiRational
    c_min: int
    n: int

    def to_json(self) -> dict:
        return {
            "minkowski_constant": str(self.mink_const),
            "minkowski_constant_numeric": float(self.mink_const),
            "ratio_power": str(self.ratio_power),
            "ratio_power_numeric": float(self.ratio_power),
            "bound": self.c_min,
        }


def bound_ratio(order: NumberOrder, n: int) -> PiRational:
    """``(sqrt|D| / M_K)^n`` as an exact constant."""
    mk = minkowski_constant(order.d, order.s)
    return (PiRational(1, 0, abs(order.disc)) / mk) ** n


def spanning_bound(order: NumberOrder, n: int) -> BoundReport:
    """``floor((sqrt|D| / M_K)^n)``, certified."""
    if n < 2:
        raise ValueError("the spanning bound is defined for n >= 2")
    ratio = bound_ratio(order, n)
    c = certified_floor(ratio)
    return BoundReport(minkowski_constant(order.d, order.s), ratio, max(c, 1), n)


# --- the embedding map ------------------------------------------------------

def mu_matrix(order: NumberOrder, precision: int = 128) -> list[list]:
    """``d x d`` interval matrix whose column ``j`` is the embedding of ``w_j``."""
    return order.embed_matrix(precision)


def interval_det(m: Sequence[Sequence]):
    n = len(m)
    total = None
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = m[0][perm[0]]
        for i in range(1, n):
            term = term * m[i][perm[i]]
        if inversions % 2:
            term = -term
        total = term if total is None else total + term
    return total


def abs_det_mu(order: NumberOrder) -> PiRational:
    """``|det mu| = 2^-s sqrt|D|`` exactly."""
    return PiRational(Fraction(1, 2**order.s), 0, abs(order.disc))


def mu_float(order: NumberOrder, precision: int = 128) -> np.ndarray:
    return np.array([[ivl.midpoint(x) for x in row] for row in mu_matrix(order, precision)])


# --- the generalized octahedron --------------------------------------------

@dataclass(frozen=True)
class Octahedron:
    """``{ sum |x_i| w_i + 2 sum |z_j| u_j <= d }`` in R^r x C^s.

    ``weights_x[i] = 1/p_i`` and ``weights_rho[j] = 1/rho_j(p)`` for the
    tangency point ``p`` on the norm-one surface.
    """

    r: int
    s: int
    weights_x: tuple
    weights_rho: tuple
    p: tuple

    @property
    def d(self) -> int:
        return self.r + 2 * self.s

    def half_widths(self) -> list[float]:
        """Half-widths of the bounding box in (x_1..x_r, Re z_1, Im z_1, ...)."""
        out = [self.d / float(w) for w in self.weights_x]
        for w in self.weights_rho:
            out += [self.d / (2 * float(w))] * 2
        return out

    def circumradius(self) -> float:
        return max(self.half_widths())

    def gauge(self, pts: np.ndarray) -> np.ndarray:
        """Value of ``sum |x_i| w_i + 2 sum |z_j| u_j`` for each row of ``pts``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        val = np.zeros(pts.shape[0])
        for i, w in enumerate(self.weights_x):
            val += np.abs(pts[:, i]) * float(w)
        for j, w in enumerate(self.weights_rho):
            k = self.r + 2 * j
            val += 2 * np.hypot(pts[:, k], pts[:, k + 1]) * float(w)
        return val

    def contains(self, pts) -> np.ndarray:
        return self.gauge(pts) <= self.d


def octahedron(order: NumberOrder | tuple[int, int], p: Sequence | None = None) -> Octahedron:
    """The body swept out by the tangent simplex at ``p`` (default: all ones).

    ``p`` lists ``x_1..x_r`` then ``rho_1..rho_s`` and must satisfy
    ``prod x_i * prod rho_j^2 = 1`` with all coordinates positive.
    """
    r, s = (order.r, order.s) if isinstance(order, NumberOrder) else order
    if r < 0 or s < 0 or r + s == 0:
        raise BadSignature(f"bad signature ({r}, {s})")
    if p is None:
        p = (Fraction(1),) * (r + s)
    p = tuple(p)
    if len(p) != r + s:
        raise PointOffSurface(f"tangency point needs {r + s} coordinates")
    if any(x <= 0 for x in p):
        raise PointOffSurface("tangency point must have positive coordinates")
    prod = math.prod(p[:r]) * math.prod(x * x for x in p[r:])
    exact = all(isinstance(x, (int, Fraction)) for x in p)
    if (exact and prod != 1) or (not exact and abs(float(prod) - 1) > 1e-12):
        raise PointOffSurface(f"tangency point has norm {prod}, not 1")
    inv = [1 / Fraction(x) if exact else 1 / float(x) for x in p]
    return Octahedron(r, s, tuple(inv[:r]), tuple(inv[r:]), p)


def octahedron_volume(o: Octahedron) -> PiRational:
    """Exact volume ``2^(r+s) M_K``.

    The body is the image of the default one under the diagonal scaling by
    ``p``, whose Jacobian ``prod p_i * prod rho_j^2`` is 1 on the surface.
    """
    d = o.d
    base = PiRational(Fraction(2**o.r * d**d, 2**o.s * math.factorial(d)), o.s)
    if all(isinstance(x, (int, Fraction)) for x in o.p):
        jac = math.prod(Fraction(x) for x in o.p[:o.r]) * math.prod(Fraction(x) ** 2 for x in o.p[o.r:])
        return base * jac
    return base


def monte_carlo_volume(o: Octahedron, samples: int = 10**6, seed: int = 0,
                       chunk: int = 250_000) -> tuple[float, float]:
    """Rejection-sampling volume estimate and its standard error."""
    rng = np.random.default_rng(seed)
    hw = np.array(o.half_widths())
    box = float(np.prod(2 * hw))
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        pts = rng.uniform(-1.0, 1.0, size=(k, hw.size)) * hw
        hits += int(np.count_nonzero(o.contains(pts)))
        done += k
    frac = hits / samples
    return box * frac, box * math.sqrt(frac * (1 - frac) / samples)


def sample_octahedron(o: Octahedron, count: int, seed: int = 0) -> np.ndarray:
    """Uniform points of the body (rejection from the bounding box)."""
    rng = np.random.default_rng(seed)
    hw = np.array(o.half_widths())
    out = []
    have = 0
    while have < count:
        pts = rng.uniform(-1.0, 1.0, size=(4 * count, hw.size)) * hw
        pts = pts[o.contains(pts)]
        out.append(pts)
        have += len(pts)
    return np.concatenate(out)[:count]


def norm_form_real(o: Octahedron, pts: np.ndarray) -> np.ndarray:
    """``prod |x_i| * prod |z_j|^2`` at each point."""
    pts = np.atleast_2d(pts)
    val = np.ones(pts.shape[0])
    for i in range(o.r):
        val *= np.abs(pts[:, i])
    for j in range(o.s):
        k = o.r + 2 * j
        val *= pts[:, k] ** 2 + pts[:, k + 1] ** 2
    return val


# --- regions ----------------------------------------------------------------

def region_T_contains(order: NumberOrder, y: Sequence) -> bool:
    """``|N(sum y_i w_i)| <= 1``, decided exactly."""
    return abs(order.norm_form_eval(y)) <= 1


def solve_coefficients(order: NumberOrder, m: SymbolMatrix, x: Sequence[Sequence[int]]) -> list[tuple]:
    """The ``q`` with ``x = sum q_i v_i``, by an exact solve against ``phi(m)``."""
    if len(x) != m.n:
        raise DimensionMismatch("vector length does not match the matrix")
    rhs = [c for e in x for c in e]
    sol = la.solve(rep_matrix(order, m), rhs)
    d = order.d
    return [tuple(sol[i * d:(i + 1) * d]) for i in range(m.n)]


def region_S_contains(order: NumberOrder, m: SymbolMatrix, x: Sequence[Sequence[int]]
                      ) -> tuple[bool, list[tuple]]:
    """Whether ``x = sum q_i v_i`` with every ``|N(q_i)| < 1``; returns ``q`` too."""
    if m.norm == 0:
        raise SingularMatrix("region S needs a nonsingular matrix")
    q = solve_coefficients(order, m, x)
    return all(abs(order.norm(qi)) < 1 for qi in q), q


@dataclass(frozen=True)
class VolumeReport:
    exact: PiRational
    interval: object
    exceeds_2nd: bool


def vol_P(order: NumberOrder, m: SymbolMatrix, n: int | None = None, precision: int = 128) -> VolumeReport:
    """Volume of ``phi(m)(mu^-1 Q)^n`` and whether it exceeds ``2^(nd)``.

    The comparison is decided as ``||m|| > (sqrt|D|/M_K)^n`` through the
    certified floor of the right-hand side, never through the float value.
    """
    n = m.n if n is None else n
    if m.norm == 0:
        raise SingularMatrix("vol P needs a nonsingular matrix")
    vol_q = octahedron_volume(octahedron(order))
    exact = PiRational(m.norm) * (vol_q / abs_det_mu(order)) ** n
    exceeds = m.norm > certified_floor(bound_ratio(order, n))
    return VolumeReport(exact, exact.interval(precision), exceeds)
