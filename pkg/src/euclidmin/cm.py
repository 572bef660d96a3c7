"""CM fields K = F + eta F and the minima of N_* on slope lines.

With x = y1 + eta*y2 (y1, y2 in F) the norm factors as
N_K(x) = prod_i ((y1_i + Re(eta_i) y2_i)^2 + Im(eta_i)^2 y2_i^2),
a product over the real places of F of positive definite binary quadratics.
On a line the minimum is attained at an F-rational point and has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from . import exact
from . import intervals as ivl
from .field_core import FieldElement, FieldError, NumberField, embed


@dataclass(frozen=True)
class CMData:
    K: NumberField
    F: NumberField
    gen_image: FieldElement          # image in K of the generator of F
    eta: FieldElement
    t: FieldElement                  # Tr_{K/F}(eta) in F
    n: FieldElement                  # N_{K/F}(eta) in F
    rho_matrix: tuple                # columns: iota(f_k), eta*iota(f_k) in K coordinates
    rho_inverse: tuple
    place_map: tuple[int, ...]       # F place k -> K place index
    re_eta: tuple
    im_eta: tuple
    abs2_eta: tuple

    @property
    def s(self) -> int:
        return self.F.degree

    def iota(self, f: FieldElement) -> FieldElement:
        """The embedding F -> K determined by ``gen_image``."""
        power = self.F.to_power(f.coords)
        acc = self.K.zero
        p = self.K.one
        for c in power:
            if c:
                acc = acc + p * c
            p = p * self.gen_image
        return acc


@lru_cache(maxsize=None)
def rational_field() -> NumberField:
    """Q as a degree-1 field (generator 0); one shared instance."""
    return NumberField([0, 1], label="Q", allow_rational=True)


def _f_embeddings(F: NumberField, y: FieldElement, prec: int) -> tuple:
    if F.degree == 1:
        ctx = ivl.context(prec)
        return (ivl.from_fraction(ctx, y.coords[0] * F.basis[0][0]),)
    return embed(y, 2.0 ** (-prec // 2)).values


def build_cm(K: NumberField, F: NumberField | None, eta: FieldElement, gen_image: FieldElement | None = None) -> CMData:
    """Assemble the CM decomposition of K over its totally real subfield F.

    ``gen_image`` is the image in K of F's generator.  With ``F=None`` the
    maximal real subfield is detected (degree <= 4).
    """
    if eta.field is not K:
        raise FieldError("eta must be an element of K")
    if K.r1 != 0:
        raise FieldError("K must be totally complex")
    if F is None:
        F, gen_image = maximal_real_subfield(K)
    if F.r2 != 0:
        raise FieldError("F must be totally real")
    if 2 * F.degree != K.degree:
        raise FieldError("[K:F] must be 2")
    if gen_image is None:
        if F.degree != 1:
            raise FieldError("the image of F's generator in K is required")
        gen_image = K.scalar(-F.min_poly[0])
    # gen_image must be a root of F's polynomial
    acc = K.zero
    for c in reversed(F.min_poly):
        acc = acc * gen_image + c
    if not acc.is_zero:
        raise FieldError("gen_image is not a root of F's minimal polynomial")
    if not eta.is_integral:
        raise FieldError("eta must lie in O_K")

    partial = CMData(K, F, gen_image, eta, F.zero, F.zero, (), (), (), (), (), ())
    images = [partial.iota(F.element([int(i == k) for i in range(F.degree)])) for k in range(F.degree)]
    cols = [img.coords for img in images] + [(eta * img).coords for img in images]
    P = [[cols[j][i] for j in range(K.degree)] for i in range(K.degree)]
    if exact.det(P) == 0:
        if _in_subfield(eta, images):
            raise FieldError("eta lies in O_F")
        raise FieldError("rho matrix is singular")
    Pinv = exact.inverse(P)
    s = F.degree
    rho_eta2 = exact.matvec(Pinv, (eta * eta).coords)
    n = F.element([-v for v in rho_eta2[:s]])
    t = F.element(rho_eta2[s:])

    prec = ivl.default_precision()
    ctx = ivl.context(prec)
    k_emb = embed(gen_image, 2.0 ** (-prec // 2)).values
    f_roots = F.root_enclosures(prec).real if F.degree > 1 else (ctx.mpf(0),)
    if F.degree == 1:
        place_map = (0,)
    else:
        place_map = []
        for root in f_roots:
            hits = [i for i, v in enumerate(k_emb)
                    if ivl.intersects(v.real, root) and ivl.lower(abs(v.imag)) <= 0]
            if len(hits) != 1:
                raise FieldError("could not match the places of K and F")
            place_map.append(hits[0])
        place_map = tuple(place_map)
        if len(set(place_map)) != s:
            raise FieldError("could not match the places of K and F")
    eta_emb = embed(eta, 2.0 ** (-prec // 2)).values
    t_emb = _f_embeddings(F, t, prec)
    n_emb = _f_embeddings(F, n, prec)
    re, im, a2 = [], [], []
    for k, i in enumerate(place_map):
        v = eta_emb[i]
        if not ivl.certainly_nonzero(v.imag):
            raise FieldError("Im eta is not separated from 0")
        if not ivl.intersects(v.real, t_emb[k] / 2) or not ivl.intersects(ivl.abs2(ctx, v), n_emb[k]):
            raise FieldError("embedding identities for eta failed")
        re.append(v.real)
        im.append(abs(v.imag))
        a2.append(ivl.abs2(ctx, v))
    return CMData(K, F, gen_image, eta, t, n, tuple(map(tuple, P)), tuple(map(tuple, Pinv)),
                  place_map, tuple(re), tuple(im), tuple(a2))


def _in_subfield(eta: FieldElement, images: list[FieldElement]) -> bool:
    K = eta.field
    M = [[img.coords[i] for img in images] for i in range(K.degree)]
    rows = [list(r) + [c] for r, c in zip(M, eta.coords)]
    from .unit_lattice import _rank
    return _rank(rows) == _rank(M)


def complex_conjugate(x: FieldElement) -> FieldElement:
    """x-bar for a CM field, via rounding of the conjugated embeddings and exact checks."""
    K = x.field
    gen = K.gen
    pt = embed(gen)
    conj = []
    for v in pt.values:
        conj += [ivl.mid_float(v.real), -ivl.mid_float(v.imag)]
    # basis coordinates of gen-bar; integral since gen is integral
    raw = K.embedding_matrix_inv @ np.array(conj)
    gbar = K.element([round(float(c)) for c in raw])
    acc = K.zero
    for c in reversed(K.min_poly):
        acc = acc * gbar + c
    if not acc.is_zero or gbar == gen:
        raise FieldError("complex conjugation is not an automorphism of K (not a CM field?)")
    power = K.to_power(x.coords)
    out, p = K.zero, K.one
    for c in power:
        if c:
            out = out + p * c
        p = p * gbar
    return out


def maximal_real_subfield(K: NumberField) -> tuple[NumberField, FieldElement]:
    """Totally real subfield of index 2 for CM fields of degree <= 4."""
    if K.degree > 4:
        raise FieldError("automatic subfield detection is limited to degree <= 4; supply F")
    if K.degree == 2:
        return rational_field(), K.zero
    x = sympy.Symbol("x")
    for j in range(K.degree):
        w = K.element([int(i == j) for i in range(K.degree)])
        wb = complex_conjugate(w)
        for alpha in (w + wb, w * wb):
            if alpha.is_rational():
                continue
            charpoly = _charpoly(alpha)
            factors = sympy.factor_list(sympy.Poly(list(reversed(charpoly)), x))[1]
            poly = factors[0][0]
            if poly.degree() != K.degree // 2:
                continue
            coeffs = [int(c) for c in reversed(poly.all_coeffs())]
            if coeffs[-1] != 1:
                continue
            F = NumberField(coeffs)
            if F.r2 == 0:
                return F, alpha
    raise FieldError("no real subfield of index 2 found")


def _charpoly(x: FieldElement) -> list[int]:
    K = x.field
    M = sympy.Matrix([[int(v) for v in row] for row in K.mult_matrix_int(x.numerators)])
    lam = sympy.Symbol("lam")
    poly = sympy.Poly(M.charpoly(lam).as_expr(), lam)
    return [int(c) for c in reversed(poly.all_coeffs())]


def rho(x: FieldElement, cm: CMData) -> tuple[FieldElement, FieldElement]:
    """(y1, y2) in F x F with x = y1 + eta*y2."""
    if x.field is not cm.K:
        raise FieldError("x must be an element of K")
    v = exact.matvec(cm.rho_inverse, x.coords)
    s = cm.s
    return cm.F.element(v[:s]), cm.F.element(v[s:])


def embed_f(y: FieldElement, cm: CMData, prec: int | None = None) -> tuple:
    """Real embeddings of an F-element, in F's place order."""
    return _f_embeddings(cm.F, y, prec or ivl.default_precision())


def n_star(y1: Sequence, y2: Sequence, cm: CMData, prec: int | None = None):
    """prod_i ((y1_i + Re eta_i y2_i)^2 + (Im eta_i)^2 y2_i^2) as an interval."""
    ctx = ivl.context(prec or ivl.default_precision())

    def conv(v):
        if hasattr(v, "_mpi_"):
            return v
        return ivl.from_fraction(ctx, Fraction(v))

    acc = ctx.mpf(1)
    for a, b, re, im in zip(y1, y2, cm.re_eta, cm.im_eta):
        a, b = conv(a), conv(b)
        acc = acc * ((a + re * b) ** 2 + (im * b) ** 2)
    return acc


def n_star_of(x: FieldElement, cm: CMData):
    y1, y2 = rho(x, cm)
    return n_star(embed_f(y1, cm), embed_f(y2, cm), cm)


@dataclass(frozen=True)
class SlopeLine:
    """V^phi + (beta, 0) for finite phi, or V^inf + (0, beta) when phi is None."""

    phi: FieldElement | None
    beta: FieldElement

    @classmethod
    def through(cls, phi: FieldElement | None, omega1: FieldElement, omega2: FieldElement) -> SlopeLine:
        """Normalize the offset (omega1, omega2) to the one-parameter form."""
        if phi is None:
            return cls(None, omega2)
        return cls(phi, omega1 - phi * omega2)

    def point(self, theta: FieldElement) -> tuple[FieldElement, FieldElement]:
        if self.phi is None:
            return theta, self.beta
        return self.phi * theta + self.beta, theta


@dataclass(frozen=True)
class SlopeMinimum:
    xi: FieldElement
    value: Fraction
    factors: tuple[float, ...]
    point: tuple[FieldElement, FieldElement]


def _abs_norm_f(y: FieldElement) -> Fraction:
    return abs(y.norm()) if y.field.degree > 1 else abs(y.coords[0] * y.field.basis[0][0])


def _as_f(v, F: NumberField) -> FieldElement:
    if isinstance(v, FieldElement):
        if v.field is F:
            return v
        if v.field.min_poly == F.min_poly and v.field.basis == F.basis:
            return F.element(v.coords)
        raise FieldError("slope data must lie in F")
    return F.scalar(Fraction(v))


def slope_minimum(line: SlopeLine, cm: CMData) -> SlopeMinimum:
    """Exact minimizer xi and minimum of N_* along the line."""
    F = cm.F
    line = SlopeLine(None if line.phi is None else _as_f(line.phi, F), _as_f(line.beta, F))
    t, n, beta = cm.t, cm.n, line.beta
    half_t = t / 2
    disc = n - half_t * half_t               # embeds to (Im eta_i)^2
    if line.phi is None:
        xi = -(half_t * beta)
        q = disc * beta * beta
    else:
        phi = line.phi
        A = phi * phi + phi * t + n          # embeds to |phi_i + eta_i|^2 > 0
        xi = -((phi + half_t) * beta) / A
        q = disc * beta * beta / A
    value = _abs_norm_f(q)
    factors = tuple(ivl.mid_float(v) for v in embed_f(q, cm))
    return SlopeMinimum(xi, value, factors, line.point(xi))


def nu_floor(lines: Sequence[SlopeLine], cm: CMData) -> tuple[Fraction, SlopeLine, FieldElement]:
    """Smallest slope minimum over a finite family of lines."""
    if not lines:
        raise ValueError("at least one line is required")
    best = None
    for line in lines:
        m = slope_minimum(line, cm)
        if best is None or m.value < best[0]:
            best = (m.value, line, m.xi)
    return best
