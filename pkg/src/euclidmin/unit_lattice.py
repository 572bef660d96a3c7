"""The logarithmic unit lattice, the norm h0 on the trace-zero hyperplane W,
the size measure F_UK, and unit reduction of points into a bounded box."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import intervals as ivl
from .field_core import EmbeddingPoint, _embed_at, FieldElement, FieldError, NumberField, embed, norm_kbar
from .intervals import PrecisionError


class NotAUnitError(ValueError):
    pass


class ZeroNormError(ValueError):
    pass


def log_embed(u: FieldElement, prec: int | None = None) -> tuple:
    """Enclosure of (log|u_i|)_{i in I} for a unit u."""
    if not u.is_integral or abs(u.norm()) != 1:
        raise NotAUnitError(f"{u} is not a unit")
    prec = prec or ivl.default_precision()
    return _log_moduli(embed(u, 2.0 ** (-prec // 2)))


def _log_moduli(p: EmbeddingPoint) -> tuple:
    ctx = ivl.context(p.prec)
    out = []
    for i, v in enumerate(p.values):
        if i < p.r1:
            out.append(ctx.log(abs(v)))
        else:
            out.append(ctx.log(ivl.abs2(ctx, v)) / 2)
    return tuple(out)


def h0(w: Sequence, weights: Sequence[int], prec: int | None = None):
    """h0(w) = 1/2 sum d_i |w_i| for w in W (intervals or floats)."""
    ctx = ivl.context(prec or ivl.default_precision())
    acc = ctx.mpf(0)
    for wi, di in zip(w, weights):
        wi = wi if hasattr(wi, "_mpi_") else ivl.from_fraction(ctx, Fraction(wi))
        acc = acc + abs(wi) * di
    return acc / 2


def mahler(u: FieldElement, prec: int | None = None):
    """Logarithmic Mahler measure h0(L(u)); zero exactly for roots of unity."""
    return h0(log_embed(u, prec), u.field.weights, prec)


def real_quadratic_unit(K: NumberField) -> FieldElement:
    """Fundamental unit of the order spanned by the basis of a real quadratic field.

    Uses the continued fraction of omega = (s + sqrt(D))/2; the first convergent
    p/q with N(p - q*omega) = +-1 yields the unit (p - q*s) + q*omega > 1.
    """
    if K.degree != 2 or K.r1 != 2:
        raise FieldError("continued-fraction units are only available for real quadratic fields")
    c, b, _ = K.min_poly
    disc_poly = b * b - 4 * c
    D = K.discriminant
    s = D % 2
    k2 = Fraction(D, disc_poly)
    k = Fraction(math.isqrt(k2.numerator), math.isqrt(k2.denominator))
    if k * k != k2:
        raise FieldError("basis discriminant is not a square multiple of the polynomial discriminant")
    # omega = (s + k(2 theta + b)) / 2, choosing the sign of sqrt(D) as k(2 theta + b)
    omega = K.from_power([Fraction(s) / 2 + k * b / 2, k])
    if not omega.is_integral:
        raise FieldError("(s + sqrt(D))/2 is not integral in the given basis")

    def norm_pq(p, q):  # N(p - q*omega) for omega = (s + sqrt(D))/2
        return p * p - p * q * s + q * q * (s * s - D) // 4

    rootD = math.isqrt(D)
    P, Q = s, 2
    p_prev, p_cur = 0, 1
    q_prev, q_cur = 1, 0
    for _ in range(100000):
        a = (P + rootD) // Q
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if abs(norm_pq(p_cur, q_cur)) == 1:
            unit = K.scalar(p_cur - q_cur * s) + omega * q_cur
            return _normalize_sign(unit)
        P = a * Q - P
        Q = (D - P * P) // Q
    raise FieldError("continued fraction did not produce a unit")


def _normalize_sign(u: FieldElement) -> FieldElement:
    """Return +-u or +-1/u so that the last real embedding exceeds 1."""
    ctx = ivl.context(ivl.default_precision())
    v = embed(u).values[-1]
    if ivl.upper(v) < 0:
        u, v = -u, -v
    if ivl.upper(v) < 1:
        u = u.inverse()
    return u


@dataclass(frozen=True)
class UnitLattice:
    """Log lattice of the torsion-free group G generated by the stored units."""

    field: NumberField
    units: tuple[FieldElement, ...]
    log_vectors: tuple[tuple, ...]
    regulator: object
    f_uk: object
    successive_minima: tuple
    torsion: int | None = None
    prec: int = ivl.DEFAULT_PRECISION

    @property
    def rank(self) -> int:
        return len(self.units)

    @property
    def f_uk_flagged(self) -> bool:
        """True when F_UK is the rank-0 convention value 0."""
        return self.rank == 0

    @property
    def log_matrix(self) -> np.ndarray:
        """Float r x |I| matrix of log vectors."""
        if not self.units:
            return np.zeros((0, self.field.n_places))
        return np.array([[ivl.mid_float(v) for v in row] for row in self.log_vectors])

    def reduction_constant(self, prec: int | None = None):
        """exp(r/2 * F_UK) with the upper endpoint of F_UK, as an interval."""
        ctx = ivl.context(prec or self.prec)
        f_up = ctx.mpf(self.f_uk.b)
        return ctx.exp(f_up * self.rank / 2)

    def unit(self, exponents: Sequence[int]) -> FieldElement:
        """prod u_l^(e_l), cached by exponent vector."""
        key = tuple(int(e) for e in exponents)
        cache = self.__dict__.setdefault("_unit_cache", {})
        g = cache.get(key)
        if g is None:
            g = self.field.one
            for u, e in zip(self.units, key):
                if e:
                    g = g * u ** e
            if len(cache) < 100_000:
                cache[key] = g
        return g

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "units": [[str(c) for c in u.coords] for u in self.units],
            "log_vectors": [[ivl.mid_float(v) for v in row] for row in self.log_vectors],
            "regulator": ivl.mid_float(self.regulator),
            "regulator_interval": [ivl.lower_float(self.regulator), ivl.upper_float(self.regulator)],
            "F_UK": ivl.mid_float(self.f_uk),
            "F_UK_interval": [ivl.lower_float(self.f_uk), ivl.upper_float(self.f_uk)],
            "F_UK_flagged": self.f_uk_flagged,
            "successive_minima": [ivl.mid_float(t) for t in self.successive_minima],
        }


def _iv_det(ctx, m):
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = ctx.mpf(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _iv_det(ctx, minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _rank(vectors) -> int:
    rows = [[Fraction(v) for v in vec] for vec in vectors]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _pinv_bounds(lam: np.ndarray, weights) -> np.ndarray:
    """Per-exponent factor k_l with |v_l| <= k_l * h0(v . Lambda)."""
    pinv = np.linalg.pinv(lam)  # |I| x r
    w = np.asarray(weights, dtype=float)[:, None]
    return 2.0 * np.max(np.abs(pinv) / w, axis=0)


def _enumerate_short(lam: np.ndarray, weights, bound: float):
    """All nonzero exponent vectors v with h0(v . Lambda) <= bound (floats)."""
    r = lam.shape[0]
    k = _pinv_bounds(lam, weights) * bound * (1 + 1e-9) + 1e-9
    ranges = [range(-int(math.floor(kl)), int(math.floor(kl)) + 1) for kl in k]
    w = np.asarray(weights, dtype=float)
    out = []
    for v in itertools.product(*ranges):
        if not any(v):
            continue
        h = 0.5 * float(np.sum(w * np.abs(np.asarray(v, dtype=float) @ lam)))
        if h <= bound * (1 + 1e-9):
            out.append((h, v))
    out.sort()
    return out


def build_unit_lattice(
    field: NumberField,
    units: Sequence[FieldElement] | None = None,
    torsion: int | None = None,
    prec: int | None = None,
) -> UnitLattice:
    """Assemble G, its log vectors, regulator and F_UK.

    ``units`` defaults to the field's stored fundamental units; a real quadratic
    field with none stored gets its unit from the continued fraction.
    """
    prec = prec or ivl.default_precision()
    ctx = ivl.context(prec)
    r = field.unit_rank
    if units is None:
        units = list(field.fundamental_units)
        if not units and r == 1 and field.degree == 2:
            units = [real_quadratic_unit(field)]
    units = tuple(units)
    if len(units) != r:
        raise FieldError(f"expected {r} fundamental units, got {len(units)}")
    for u in units:
        if not u.is_integral or abs(u.norm()) != 1:
            raise NotAUnitError(f"{u} is not a unit")
    torsion = torsion if torsion is not None else field.torsion

    if r == 0:
        zero = ctx.mpf(0)
        return UnitLattice(field, (), (), ctx.mpf(1), zero, (), torsion, prec)

    logs = tuple(log_embed(u, prec) for u in units)
    weights = field.weights
    # regulator: |det(d_i log|u_l|_i)| over the first r places
    reg = abs(_iv_det(ctx, [[logs[l][i] * weights[i] for i in range(r)] for l in range(r)]))
    if not ivl.lower(reg) > 0:
        raise FieldError("fundamental units are not multiplicatively independent")

    lam = np.array([[ivl.mid_float(v) for v in row] for row in logs])
    basis_h = [ivl.upper_float(h0(row, weights, prec)) for row in logs]
    candidates = _enumerate_short(lam, weights, max(basis_h))
    chosen, minima = [], []
    for h, v in candidates:
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            minima.append(h)
            if len(chosen) == r:
                break

    def h_iv(v):
        w = [sum((logs[l][i] * v[l] for l in range(r)), ctx.mpf(0)) for i in range(len(weights))]
        return h0(w, weights, prec)

    minima_iv = []
    for t in minima:
        near = [v for h, v in candidates if abs(h - t) <= 1e-9 * max(1.0, t)]
        minima_iv.append(ivl.hull(ctx, [h_iv(v) for v in near]))
    return UnitLattice(field, units, logs, reg, minima_iv[-1], tuple(minima_iv), torsion, prec)


def f_uk(lattice: UnitLattice):
    """F_UK as an interval (0 with ``lattice.f_uk_flagged`` for rank 0)."""
    return lattice.f_uk


def exponent_window(lattice: UnitLattice, bound: float) -> list[int]:
    """Per-exponent radius covering every v with h0(v . Lambda) <= bound."""
    if lattice.rank == 0:
        return []
    k = _pinv_bounds(lattice.log_matrix, lattice.field.weights) * bound
    return [int(math.ceil(x)) + 1 for x in k]


def units_up_to_mahler(lattice: UnitLattice, bound: float) -> list[tuple[int, ...]]:
    """Exponent vectors (including 0) of units in G with Mahler measure <= bound."""
    if lattice.rank == 0:
        return [()]
    short = _enumerate_short(lattice.log_matrix, lattice.field.weights, bound)
    return [(0,) * lattice.rank] + [v for _, v in short]


@dataclass(frozen=True)
class Reduction:
    """Result of reduce_point: g in G with g.x inside the box of radius ``bound``."""

    unit: FieldElement
    exponents: tuple[int, ...]
    image: FieldElement | EmbeddingPoint
    moduli: tuple
    bound: object


def _bound_for(lattice: UnitLattice, p: EmbeddingPoint):
    ctx = ivl.context(p.prec)
    n = abs(norm_kbar(p))
    if not ivl.lower(n) > 0:
        raise ZeroNormError("point has zero norm")
    d = lattice.field.degree
    return lattice.reduction_constant(p.prec) * ctx.exp(ctx.log(n) / d)


def _point_at(x: FieldElement, prec: int) -> EmbeddingPoint:
    return EmbeddingPoint(_embed_at(x, prec), x.field.r1, prec)


def _fits(moduli, bound) -> bool:
    lim = ivl.lower(bound)
    return all(ivl.upper(m) <= lim for m in moduli)


def _candidate_exponents(lattice: UnitLattice, p: EmbeddingPoint, limit: int = 16) -> list[tuple[int, ...]]:
    """Exponent vectors e whose unit moves log|x| closest to the diagonal, best first."""
    K = lattice.field
    r = lattice.rank
    logs = np.array([math.log(ivl.mid_float(m)) for m in p.moduli()])
    weights = np.asarray(K.weights, dtype=float)
    w = logs - np.sum(weights * logs) / K.degree
    lam = lattice.log_matrix
    coeff = np.linalg.lstsq(lam.T, w, rcond=None)[0]
    reach = exponent_window(lattice, r * ivl.upper_float(lattice.f_uk) / 2 + 1.0)
    center = np.rint(coeff).astype(int)
    scored = []
    for off in itertools.product(*(range(-k, k + 1) for k in reach)):
        e = center + np.asarray(off, dtype=int)
        score = float(np.max(w - e @ lam))
        scored.append((score, int(np.sum(np.abs(e))), tuple(-int(v) for v in e)))
    scored.sort()
    out = [(0,) * r]
    out += [e for _, _, e in scored[:limit] if any(e)]
    return out


def reduce_point(x: FieldElement | EmbeddingPoint, lattice: UnitLattice) -> Reduction:
    """Find g in G with |(g x)_i| <= exp(r F_UK / 2) |N(x)|^(1/d) for all i.

    The nearest lattice vector to the normalized log vector of x is found by
    exhaustive search of a window of unit exponents; the inequality is then
    certified with interval arithmetic.  Returns g = 1 when x already fits.
    Inputs sitting on the boundary of the box are certified by raising the
    working precision, since the bound uses the upper endpoint of F_UK.
    """
    K = lattice.field
    r = lattice.rank
    exact = isinstance(x, FieldElement)
    if exact and x.is_zero:
        raise ZeroNormError("cannot reduce zero")
    if K.n_places == 1:
        # a single place: |x_1|^d = |N(x)| identically, so x itself is the answer
        p = embed(x) if exact else x
        if not ivl.lower(abs(norm_kbar(p))) > 0:
            raise ZeroNormError("point has zero norm")
        return Reduction(K.one, (), x, p.moduli(), _bound_for(lattice, p))
    prec = max(lattice.prec, x.prec if not exact else 0)
    p = _point_at(x, prec) if exact else x
    candidates = _candidate_exponents(lattice, p)
    while True:
        bound = _bound_for(lattice, p)
        for e in candidates:
            g = lattice.unit(e)
            if exact:
                image = g * x
                img_pt = _point_at(image, prec)
            else:
                image = img_pt = _point_at(g, prec).times(p)
            mods = img_pt.moduli()
            if _fits(mods, bound):
                return Reduction(g, e, image, mods, bound)
        prec *= 2
        if not exact or prec > ivl.MAX_PRECISION:
            break
        p = _point_at(x, prec)
    raise PrecisionError("could not certify the reduction bound")
