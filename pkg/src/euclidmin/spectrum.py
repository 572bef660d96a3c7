"""Bounds on the Euclidean minimum M(K).

Lower bounds come from exact minima at rational points (denominator sweep and
box centres); upper bounds from a branch-and-bound over the unit cube of basis
coordinates, where a box is closed once a single translate y in O_K certifies
sup over the box of |N(x - y)| below the current threshold.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import intervals as ivl
from .field_core import FieldElement, NumberField, embed
from .minima import BoxRegion, _candidate_chunks, _candidate_count, _coset_vectors, _place_moduli, class_orbit, m_rational
from .unit_lattice import UnitLattice


def bayer_bound(field: NumberField) -> Fraction:
    """The global upper bound 2^-d |D_K| for M(K)."""
    return Fraction(field.abs_discriminant, 2 ** field.degree)


@dataclass
class SweepResult:
    value: Fraction
    witnesses: list[FieldElement]
    per_q: dict[int, Fraction]
    evaluated: int


def _classes_with_denominator(K: NumberField, q: int):
    for nums in itertools.product(range(q), repeat=K.degree):
        x = K.element([Fraction(n, q) for n in nums])
        if x.denominator == q:
            yield x


def denominator_sweep(field: NumberField, lattice: UnitLattice, qmax: int) -> SweepResult:
    """max of m_K over classes of q^-1 O_K / O_K, 2 <= q <= qmax, up to units and sign."""
    if qmax < 2:
        raise ValueError("qmax must be at least 2")
    best, witnesses, per_q, evaluated = None, [], {}, 0
    seen: set = set()
    for q in range(2, qmax + 1):
        q_best = None
        for x in _classes_with_denominator(field, q):
            if x.coords in seen:
                continue
            orbit = class_orbit(x, lattice)
            for c, _ in orbit:
                seen.add(c.coords)
                seen.add((-c).reduce_mod_ok().coords)
            val = m_rational(x, lattice).value
            evaluated += 1
            q_best = val if q_best is None or val > q_best else q_best
            if best is None or val > best:
                best, witnesses = val, [x]
            elif val == best:
                witnesses.append(x)
        if q_best is not None:
            per_q[q] = q_best
    return SweepResult(best, witnesses, per_q, evaluated)


@dataclass(frozen=True)
class TowerBound:
    """Q = exp(exp(exp(e3))); only ``log_e3`` = log(e3) is stored exactly-ish."""

    log_e3: float

    @property
    def e3(self) -> float:
        return math.exp(self.log_e3)

    def __lt__(self, other: TowerBound) -> bool:
        return self.log_e3 < other.log_e3

    def __le__(self, other: TowerBound) -> bool:
        return self.log_e3 <= other.log_e3


def complexity_q(field: NumberField, lattice: UnitLattice, C: float = 1.0) -> TowerBound:
    """Q = exp exp exp(D_K^(C F_UK^2)), stored through log(e3) = C F^2 log D_K."""
    if not C > 0:
        raise ValueError("C must be positive")
    F = ivl.upper_float(lattice.f_uk)
    return TowerBound(C * F * F * math.log(field.abs_discriminant))


def enumeration_count_bound(field: NumberField, lattice: UnitLattice, q: int) -> float:
    """(2 q D^(1/d) exp(r F_UK / 2) + 1)^d."""
    if q < 1:
        raise ValueError("q must be at least 1")
    d = field.degree
    R = field.abs_discriminant ** (1.0 / d) * ivl.upper_float(lattice.reduction_constant())
    return (2 * q * R + 1) ** d


def finiteness_radius(field: NumberField, lattice: UnitLattice) -> float:
    """R = D_K^(1/d) exp(r F_UK / 2)."""
    return field.abs_discriminant ** (1.0 / field.degree) * ivl.upper_float(lattice.reduction_constant())


def count_points_in_box(field: NumberField, lattice: UnitLattice, q: int) -> int:
    """|q^-1 O_K cap B_R| with R = D_K^(1/d) exp(r F_UK / 2)."""
    R = finiteness_radius(field, lattice)
    vecs, _ = _coset_vectors(field.zero, BoxRegion.canonical(field, q * R))
    return len(vecs)


# -- branch and bound -----------------------------------------------------------


@dataclass(frozen=True)
class CubeBox:
    """Axis box in basis coordinates: corner + [0, widths]."""

    corner: tuple[Fraction, ...]
    widths: tuple[Fraction, ...]
    depth: int
    parent_bound: Fraction | None
    parent_translate: FieldElement | None = None

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple(a + w / 2 for a, w in zip(self.corner, self.widths))

    def split(self, axis: int, bound, translate=None) -> tuple[CubeBox, CubeBox]:
        w = list(self.widths)
        w[axis] /= 2
        c2 = list(self.corner)
        c2[axis] += w[axis]
        return (CubeBox(self.corner, tuple(w), self.depth + 1, bound, translate),
                CubeBox(tuple(c2), tuple(w), self.depth + 1, bound, translate))

    def contains(self, coords: Sequence[Fraction]) -> bool:
        return all(a <= c <= a + w for a, w, c in zip(self.corner, self.widths, coords))


@dataclass
class SearchResult:
    lower: Fraction
    upper: Fraction
    witnesses: list[FieldElement]
    converged: bool
    counts: dict
    history: list[tuple[Fraction, Fraction]]
    discarded: list[tuple[CubeBox, FieldElement]] = dc_field(default_factory=list)
    open_boxes: list[CubeBox] = dc_field(default_factory=list)


# units stretching the box beyond this multiple of the search radius are skipped
_STRETCH = 4.0
_MAX_TRANSLATES = 20_000


class _UnitTable:
    """Float data for the units g in a window of exponents."""

    def __init__(self, lattice: UnitLattice, E: int):
        K = lattice.field
        self.entries = []
        window = range(-E, E + 1)
        for e in itertools.product(window, repeat=lattice.rank):
            g = lattice.unit(e)
            pt = embed(g)
            sg = np.array([complex(ivl.mid_float(v.real), ivl.mid_float(v.imag)) if ivl.is_complex(v)
                           else complex(ivl.mid_float(v), 0.0) for v in pt.values])
            self.entries.append((e, g, sg))


def _window_size(lattice: UnitLattice, rho_max: float) -> int:
    if lattice.rank == 0:
        return 0
    t1 = max(ivl.mid_float(lattice.successive_minima[0]), 1e-3)
    E = 1 + int(math.ceil(math.log(max(2.0, 1.0 / max(rho_max, 1e-300))) / t1))
    return min(E, 12 if lattice.rank == 1 else 3)


class _BoxEvaluator:
    def __init__(self, field: NumberField, lattice: UnitLattice, prec: int):
        self.K = field
        self.lattice = lattice
        self.prec = prec
        self.ctx = ivl.context(prec)
        self.C = ivl.upper_float(lattice.reduction_constant())
        self.emb = field.basis_embeddings(prec)
        self.emb_mod = [[ivl.modulus(self.ctx, v) for v in row] for row in self.emb]
        self.weights = np.asarray(field.weights)
        self.tables: dict[int, _UnitTable] = {}
        self.inverses: dict[tuple, FieldElement] = {}

    def table(self, E: int) -> _UnitTable:
        if E not in self.tables:
            self.tables[E] = _UnitTable(self.lattice, E)
        return self.tables[E]

    def rho(self, box: CubeBox) -> np.ndarray:
        return self.K.basis_moduli @ np.array([float(w) / 2 for w in box.widths])

    def _to_places(self, real_coords: np.ndarray) -> np.ndarray:
        r1 = self.K.r1
        out = list(real_coords[:r1].astype(complex))
        for k in range(self.K.r2):
            out.append(complex(real_coords[r1 + 2 * k], real_coords[r1 + 2 * k + 1]))
        return np.array(out)

    def _from_places(self, vals: np.ndarray) -> np.ndarray:
        r1 = self.K.r1
        out = list(vals[:r1].real)
        for v in vals[r1:]:
            out += [v.real, v.imag]
        return np.array(out)

    def best_translate(self, box: CubeBox, target: float):
        """Float search for (g, t) minimizing prod(|g c - t|_i + |g_i| rho_i)^d_i."""
        K = self.K
        c = np.array([float(v) for v in box.center])
        rho = self.rho(box)
        sc = self._to_places(K.embedding_matrix @ c)
        E = _window_size(self.lattice, float(np.max(rho)))
        best = (math.inf, None, None)
        base_r = self.C * max(target, 1e-12) ** (1.0 / K.degree)
        for e, g, sg in self.table(E).entries:
            grho = np.abs(sg) * rho
            if any(e) and float(np.max(grho)) > _STRETCH * base_r:
                continue
            gc = sg * sc
            box_t = BoxRegion(
                tuple(complex(v) if i >= K.r1 else float(v.real) for i, v in enumerate(gc)),
                tuple(float(base_r + gr) for gr in grho),
            )
            if _candidate_count(K, np.zeros(K.degree), box_t) > _MAX_TRANSLATES:
                continue
            gc_real = self._from_places(gc)
            for chunk in _candidate_chunks(K, np.zeros(K.degree), box_t):
                z = chunk @ K.embedding_matrix.T
                mods = _place_moduli(gc_real[None, :] - z, K.r1, K.n_places)
                score = np.prod((mods + grho[None, :]) ** self.weights, axis=1)
                k = int(np.argmin(score))
                if score[k] < best[0]:
                    best = (float(score[k]), e, tuple(int(v) for v in chunk[k]))
        return best

    def certify(self, box: CubeBox, e, t) -> tuple[Fraction, FieldElement]:
        """Certified upper bound for sup over the box of |N(x - y)|, y = g^-1 t."""
        K = self.K
        ctx = self.ctx
        if e not in self.inverses:
            self.inverses[e] = self.lattice.unit(tuple(-v for v in e))
        y = self.inverses[e] * K.element(list(t))
        z = K.element(list(box.center)) - y
        zv = embed(z).values
        acc = ctx.mpf(1)
        half = [ivl.from_fraction(ctx, w / 2) for w in box.widths]
        for i, v in enumerate(zv):
            rho = sum((h * m for h, m in zip(half, self.emb_mod[i])), ctx.mpf(0))
            f = ivl.modulus(ctx, v) + rho
            acc = acc * (f if i < K.r1 else f ** 2)
        return ivl.upper(acc), y

    def evaluate(self, box: CubeBox, target: float):
        score, e, t = self.best_translate(box, target)
        if e is None:
            return None, None
        return self.certify(box, e, t)


def _default_center_denominator(d: int) -> int:
    """Largest q with q^d <= 4096, so centre classes stay few."""
    q = 2
    while (q + 1) ** d <= 4096:
        q += 1
    return q


def _split_axis(K: NumberField, box: CubeBox) -> int:
    ext = [float(w) * float(np.max(K.basis_moduli[:, j])) for j, w in enumerate(box.widths)]
    return int(np.argmax(ext))


def branch_and_bound_M(
    field: NumberField,
    lattice: UnitLattice,
    tol: float = 1e-3,
    max_depth: int = 40,
    qmax: int = 8,
    center_denominator: int | None = None,
    threads: int = 1,
    max_boxes: int = 2_000_000,
) -> SearchResult:
    """Certified enclosure lo <= M(K) <= hi by box subdivision of the unit cube.

    Each box gets a certified bound b >= sup of m over the box (via one translate,
    capped by the parent's bound).  Boxes with b < lo are discarded, boxes with
    b <= lo + tol are settled, others are bisected along the edge of longest
    embedding extent until ``max_depth``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    K = field
    if center_denominator is None:
        center_denominator = _default_center_denominator(K.degree)
    tol_q = Fraction(tol)
    sweep = denominator_sweep(K, lattice, qmax)
    lo = sweep.value
    witnesses = list(sweep.witnesses)
    hi = bayer_bound(K)
    history = [(lo, hi)]
    ev = _BoxEvaluator(K, lattice, ivl.default_precision())
    evaluated_centers: dict[tuple, Fraction] = {}
    counts = {"boxes": 0, "discarded": 0, "settled": 0, "split": 0, "centers": 0,
              "sweep_classes": sweep.evaluated}
    discarded: list[tuple[CubeBox, FieldElement]] = []
    settled_max = None
    level = [CubeBox((Fraction(0),) * K.degree, (Fraction(1),) * K.degree, 0, hi)]
    open_boxes: list[CubeBox] = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while level:
            # raise lo from box centres of small denominator first
            for box in level:
                c = K.element(list(box.center))
                if c.denominator > center_denominator:
                    continue
                key = c.reduce_mod_ok().coords
                if key in evaluated_centers:
                    continue
                val = m_rational(c, lattice).value
                evaluated_centers[key] = val
                counts["centers"] += 1
                if val > lo:
                    lo, witnesses = val, [c]
                elif val == lo and all(
                    (c - w).denominator != 1 for w in witnesses
                ):
                    witnesses.append(c)
            target = float(lo + tol_q)
            if pool is not None:
                results = list(pool.map(lambda b: ev.evaluate(b, target), level))
            else:
                results = [ev.evaluate(b, target) for b in level]
            nxt = []
            for box, (bound, y) in zip(level, results):
                counts["boxes"] += 1
                if bound is None or (box.parent_bound is not None and bound > box.parent_bound):
                    # the parent's translate covers this box with the parent's bound
                    bound, y = box.parent_bound, box.parent_translate
                if bound < lo:
                    counts["discarded"] += 1
                    discarded.append((box, y))
                elif bound <= lo + tol_q:
                    counts["settled"] += 1
                    settled_max = bound if settled_max is None else max(settled_max, bound)
                elif box.depth >= max_depth or counts["boxes"] + len(nxt) >= max_boxes:
                    open_boxes.append(CubeBox(box.corner, box.widths, box.depth, bound, y))
                else:
                    counts["split"] += 1
                    nxt.extend(box.split(_split_axis(K, box), bound, y))
            pending = [b.parent_bound for b in nxt] + [b.parent_bound for b in open_boxes]
            new_hi = max([lo] + ([settled_max] if settled_max is not None else []) + pending)
            hi = min(hi, new_hi)
            history.append((lo, hi))
            level = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    converged = not open_boxes and hi - lo <= tol_q
    counts["open"] = len(open_boxes)
    witnesses = _dedupe_classes(witnesses)
    return SearchResult(lo, hi, witnesses, converged, counts, history, discarded, open_boxes)


def _dedupe_classes(points: list[FieldElement]) -> list[FieldElement]:
    out, seen = [], set()
    for p in points:
        key = p.reduce_mod_ok().coords
        if key not in seen:
            seen.add(key)
            out.append(p.reduce_mod_ok())
    return out
