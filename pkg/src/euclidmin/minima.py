"""Euclidean minima by enumerating cosets x + O_K inside boxes of K (x) R.

A rational point x has a finite orbit G.x in q^-1 O_K / O_K.  Unit reduction
shows that some orbit element has a representative of minimal norm inside
B_R with R = exp(r F_UK / 2) * m^(1/d), so scanning every class of the orbit in
that box and taking exact norms gives m_K(x) exactly.  R shrinks as smaller
norms are found, which keeps the scan short.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import exact
from . import intervals as ivl
from .field_core import EmbeddingPoint, FieldElement, NumberField, embed, norm_kbar
from .unit_lattice import UnitLattice

# relative slack for float screens; points inside the slack band are re-checked
# with intervals and kept unless certainly outside
_SLACK = 1e-9
# relative error allowance for float norm estimates in exact-norm prefilters
_NORM_SLACK = 1e-10
_CHUNK = 200_000


@dataclass(frozen=True)
class BoxRegion:
    """{x : |x_i - c_i| <= rho_i for i in I}; centers are float or complex."""

    centers: tuple
    radii: tuple[float, ...]

    def __post_init__(self):
        if any(r < 0 or not math.isfinite(r) for r in self.radii):
            raise ValueError("box radii must be finite and nonnegative")

    @classmethod
    def canonical(cls, field: NumberField, R: float) -> BoxRegion:
        """B_R: centred at 0 with every radius R."""
        centers = tuple(0.0 if i < field.r1 else 0j for i in range(field.n_places))
        return cls(centers, (float(R),) * field.n_places)

    def sup_norm(self, weights: Sequence[int]) -> float:
        return math.prod((abs(c) + r) ** d for c, r, d in zip(self.centers, self.radii, weights))

    def inf_norm(self, weights: Sequence[int]) -> float:
        return math.prod(max(0.0, abs(c) - r) ** d for c, r, d in zip(self.centers, self.radii, weights))

    def _real_bounds(self, r1: int):
        lo, hi = [], []
        for i, (c, r) in enumerate(zip(self.centers, self.radii)):
            if i < r1:
                lo.append(float(c) - r)
                hi.append(float(c) + r)
            else:
                c = complex(c)
                lo += [c.real - r, c.imag - r]
                hi += [c.real + r, c.imag + r]
        return np.array(lo), np.array(hi)


@dataclass
class MinimumResult:
    value: object
    witness: FieldElement | None
    scanned: int = 0
    radius: float = 0.0
    orbit_size: int = 1
    stats: dict = dc_field(default_factory=dict)


def _place_moduli(z: np.ndarray, r1: int, n_places: int) -> np.ndarray:
    """Per-place moduli from real coordinates (rows of z)."""
    cols = [np.abs(z[:, i]) for i in range(r1)]
    for k in range(n_places - r1):
        cols.append(np.hypot(z[:, r1 + 2 * k], z[:, r1 + 2 * k + 1]))
    return np.stack(cols, axis=1)


def _place_distances(z, box: BoxRegion, r1: int) -> np.ndarray:
    cols = []
    for i, c in enumerate(box.centers):
        if i < r1:
            cols.append(np.abs(z[:, i] - float(c)))
        else:
            k = r1 + 2 * (i - r1)
            c = complex(c)
            cols.append(np.hypot(z[:, k] - c.real, z[:, k + 1] - c.imag))
    return np.stack(cols, axis=1)


def _place_scale(K: NumberField, absv: np.ndarray) -> np.ndarray:
    """Per-place magnitude of the terms summed when embedding (for slack)."""
    s = absv @ K.basis_moduli.T
    return s


def _coordinate_ranges(K: NumberField, offset: np.ndarray, box: BoxRegion):
    lo, hi = box._real_bounds(K.r1)
    Ainv = K.embedding_matrix_inv
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    cmid = Ainv @ mid
    chalf = np.abs(Ainv) @ half
    slack = _SLACK * (1 + np.abs(cmid) + chalf) + 1e-12
    lo_c = np.ceil(cmid - chalf - slack - offset).astype(np.int64)
    hi_c = np.floor(cmid + chalf + slack - offset).astype(np.int64)
    return lo_c, hi_c


def _candidate_count(K: NumberField, offset: np.ndarray, box: BoxRegion) -> int:
    lo_c, hi_c = _coordinate_ranges(K, offset, box)
    return int(np.prod(np.maximum(hi_c - lo_c + 1, 0).astype(float)))


def _candidate_chunks(K: NumberField, offset: np.ndarray, box: BoxRegion) -> Iterator[np.ndarray]:
    """Integer vectors a (chunks) such that offset + a may lie in the box."""
    lo_c, hi_c = _coordinate_ranges(K, offset, box)
    if np.any(hi_c < lo_c):
        return
    ranges = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo_c, hi_c)]
    inner = ranges[1:]
    inner_size = int(np.prod([len(r) for r in inner])) if inner else 1
    if inner:
        inner_grid = np.stack(np.meshgrid(*inner, indexing="ij"), axis=-1).reshape(-1, len(inner))
    else:
        inner_grid = np.zeros((1, 0), dtype=np.int64)
    step = max(1, _CHUNK // max(inner_size, 1))
    first = ranges[0]
    for s in range(0, len(first), step):
        block = first[s:s + step]
        a = np.repeat(block, inner_size)[:, None]
        yield np.hstack([a, np.tile(inner_grid, (len(block), 1))])


def _screen(K: NumberField, offset: np.ndarray, vecs: np.ndarray, box: BoxRegion):
    """Split candidate vectors into (inside, band) by a float test with slack."""
    pts = offset[None, :] + vecs
    z = pts @ K.embedding_matrix.T
    dist = _place_distances(z, box, K.r1)
    radii = np.asarray(box.radii)
    centers = np.array([abs(c) for c in box.centers])
    margin = _SLACK * (1 + centers + radii + _place_scale(K, np.abs(pts)))
    inside = np.all(dist <= radii - margin, axis=1)
    outside = np.any(dist > radii + margin, axis=1)
    band = ~inside & ~outside
    return vecs[inside], vecs[band], z[inside | band], inside | band


def _certainly_outside(values, box: BoxRegion, prec: int) -> bool:
    ctx = ivl.context(prec)
    for i, (v, c, r) in enumerate(zip(values, box.centers, box.radii)):
        if ivl.is_complex(v):
            c = complex(c)
            dz = v - ctx.mpc(ctx.mpf(c.real), ctx.mpf(c.imag))
        else:
            dz = v - ctx.mpf(float(c))
        if ivl.lower(ivl.modulus(ctx, dz)) > Fraction(r):
            return True
    return False


def _coset_vectors(x: FieldElement, box: BoxRegion) -> tuple[np.ndarray, int]:
    """Integer vectors a with x + a (basis coordinates) in the inflated box."""
    K = x.field
    offset = np.array([float(c) for c in x.coords])
    keep, scanned = [], 0
    for chunk in _candidate_chunks(K, offset, box):
        scanned += len(chunk)
        inside, band, _, _ = _screen(K, offset, chunk, box)
        keep.append(inside)
        for a in band:
            y = x + K.element([int(v) for v in a])
            if not _certainly_outside(embed(y).values, box, embed(y).prec):
                keep.append(a[None, :])
    if not keep:
        return np.zeros((0, K.degree), dtype=np.int64), scanned
    return np.concatenate(keep), scanned


def enumerate_coset_in_box(x: FieldElement, box: BoxRegion) -> list[FieldElement]:
    """All points of x + O_K in the box; a point is dropped only when its
    certified enclosure misses the box."""
    K = x.field
    vecs, _ = _coset_vectors(x, box)
    pts = [x + K.element([int(v) for v in a]) for a in vecs]
    pts.sort(key=lambda y: y.coords)
    return pts


def _exact_norm_abs(K: NumberField, nums: Sequence[int], q: int) -> Fraction:
    return Fraction(abs(exact.det_int(K.mult_matrix_int(list(nums)))), q ** K.degree)


def _witness_key(y: FieldElement):
    return tuple((abs(c), c < 0) for c in y.coords)


def _unit_matrices(lattice: UnitLattice) -> list[tuple[list[list[int]], tuple[int, ...]]]:
    """Integer multiplication matrices of the generators u_l^(+-1), with exponent steps."""
    cache = lattice.__dict__.get("_unit_matrices")
    if cache is None:
        K = lattice.field
        cache = []
        for l, u in enumerate(lattice.units):
            for sign, v in ((1, u), (-1, u.inverse())):
                step = tuple(sign if k == l else 0 for k in range(lattice.rank))
                cache.append((K.mult_matrix_int(v.numerators), step))
        object.__setattr__(lattice, "_unit_matrices", cache)
    return cache


def _orbit_numerators(nums: tuple[int, ...], q: int, lattice: UnitLattice):
    """BFS over classes (numerators mod q) reachable by the unit generators."""
    gens = _unit_matrices(lattice)
    d = len(nums)
    start = tuple(n % q for n in nums)
    seen = {start: (0,) * lattice.rank}
    queue = [start]
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        e = seen[v]
        for M, step in gens:
            w = tuple(sum(M[k][j] * v[j] for j in range(d)) % q for k in range(d))
            if w not in seen:
                seen[w] = tuple(a + b for a, b in zip(e, step))
                queue.append(w)
    return seen


def class_orbit(x: FieldElement, lattice: UnitLattice) -> list[tuple[FieldElement, tuple[int, ...]]]:
    """Distinct classes g.x mod O_K for g in G, as (representative in [0,1)^d, exponents of g)."""
    K = x.field
    q = x.denominator
    orbit = _orbit_numerators(x.numerators, q, lattice)
    return [(K.element([Fraction(n, q) for n in v]), e) for v, e in orbit.items()]


def m_rational(x: FieldElement, lattice: UnitLattice) -> MinimumResult:
    """Exact m_K(x) = min over y in x + O_K of |N_K(y)|, with a witness y.

    All classes of the orbit G.x are scanned at once: the points a/q of
    q^-1 O_K inside B_R whose numerators reduce into the orbit mod q.
    """
    K = x.field
    if x.is_integral:
        return MinimumResult(Fraction(0), K.zero, 0, 0.0, 1)
    q = x.denominator
    d = K.degree
    orbit = _orbit_numerators(x.numerators, q, lattice)
    weights_q = np.array([q ** j for j in range(d)], dtype=np.int64)
    orbit_keys = np.array(sorted(sum(v[j] * q ** j for j in range(d)) for v in orbit), dtype=np.int64)

    centred = FieldElement(K, tuple(c - 1 if c > Fraction(1, 2) else c for c in x.reduce_mod_ok().coords))
    ub = min(Fraction(K.abs_discriminant), abs(centred.norm()))
    C = ivl.upper_float(lattice.reduction_constant())
    R = ivl.float_up(C * float(ub) ** (1.0 / d) * (1 + 1e-12))
    vecs, scanned = _coset_vectors(K.zero, BoxRegion.canonical(K, q * R))
    keys = np.mod(vecs, q) @ weights_q if len(vecs) else np.zeros(0, dtype=np.int64)
    vecs = vecs[np.isin(keys, orbit_keys)]
    if len(vecs) == 0:  # impossible: reduce_point always lands some orbit point in B_R
        raise RuntimeError("no orbit point found in the reduction box")

    pts = vecs.astype(float) / q
    z = pts @ K.embedding_matrix.T
    mods = _place_moduli(z, K.r1, K.n_places)
    err = _NORM_SLACK * (1 + _place_scale(K, np.abs(pts)))
    w = np.asarray(K.weights)
    lo = np.prod(np.maximum(mods - err, 0.0) ** w, axis=1)
    hi = np.prod((mods + err) ** w, axis=1)
    cut = float(np.min(hi))
    best, winners = None, []
    for idx in np.nonzero(lo <= cut)[0]:
        nums = [int(v) for v in vecs[idx]]
        val = _exact_norm_abs(K, nums, q)
        if best is None or val < best:
            best, winners = val, [nums]
        elif val == best:
            winners.append(nums)
    # y' lies in g.x + O_K, so g^-1 y' lies in x + O_K with the same |N|
    witnesses = []
    for nums in winners:
        e = orbit[tuple(n % q for n in nums)]
        y = K.element([Fraction(n, q) for n in nums])
        witnesses.append(lattice.unit(tuple(-v for v in e)) * y)
    witness = min(witnesses, key=_witness_key)
    return MinimumResult(best, witness, scanned, R, len(orbit))


def m_point_bounds(p: EmbeddingPoint, lattice: UnitLattice, effort: int = 2):
    """Interval [0, u] with u a certified upper bound for m at the real point p.

    The candidate set grows with ``effort`` (unit exponents in [-(effort-1),
    effort-1]^r and a box radius proportional to effort), so u never
    increases with effort.  u is also capped by the global bound 2^-d |D_K|.
    """
    if effort < 1:
        raise ValueError("effort must be at least 1")
    K = lattice.field
    ctx = ivl.context(p.prec)
    bayer = Fraction(K.abs_discriminant, 2 ** K.degree)
    C = ivl.upper_float(lattice.reduction_constant())
    R = C * float(bayer) ** (1.0 / K.degree) * (1 + (effort - 1) / 2)
    box = BoxRegion.canonical(K, R)
    emb_basis = K.basis_embeddings(p.prec)
    best = ivl.from_fraction(ctx, bayer)
    window = range(-(effort - 1), effort)
    Ainv = K.embedding_matrix_inv
    for e in itertools.product(window, repeat=lattice.rank):
        g = lattice.unit(e)
        gp = embed(g).times(p) if any(e) else p
        offset = Ainv @ gp.real_coords_float()
        for chunk in _candidate_chunks(K, offset, box):
            inside, band, _, _ = _screen(K, offset, chunk, box)
            for a in itertools.chain(inside, band):
                vals = []
                for i, row in enumerate(emb_basis):
                    acc = gp.values[i]
                    for aj, wj in zip(a, row):
                        if aj:
                            acc = acc + wj * int(aj)
                    vals.append(acc)
                n = abs(norm_kbar(EmbeddingPoint(tuple(vals), K.r1, p.prec)))
                if ivl.upper(n) < ivl.upper(best):
                    best = n
    return ctx.mpf([0, best.b])
