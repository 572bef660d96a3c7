"""Certified isolation of the complex roots of an integer polynomial.

Approximations come from mpmath's Durand-Kerner solver.  Each approximation c
is then certified by the classical inclusion disc: p'/p(z) = sum 1/(z - z_k)
implies some root lies within deg(p) * |p(c)| / |p'(c)| of c.  When the d discs
(conjugates included) are pairwise disjoint each holds exactly one root, and a
disc centred on the real axis holds a real root because it is closed under
conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath.ctx_mp import MPContext

from . import intervals as ivl
from .intervals import PrecisionError


@dataclass(frozen=True)
class RootEnclosures:
    """Disjoint root enclosures at one working precision.

    ``real`` holds real intervals in ascending order; ``complex`` holds one
    complex rectangle per conjugate pair (positive imaginary part), ordered by
    real part.
    """

    prec: int
    real: tuple
    complex: tuple

    @property
    def all(self) -> tuple:
        return self.real + self.complex


def _eval_iv(ctx, coeffs, z):
    acc = ctx.mpf(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _derivative(coeffs):
    return [k * c for k, c in enumerate(coeffs)][1:]


def _inclusion_radius(ctx, coeffs, center):
    """Certified upper bound on the distance from ``center`` to the nearest root."""
    d = len(coeffs) - 1
    val = _eval_iv(ctx, coeffs, center)
    if ivl.upper(ivl.modulus(ctx, val)) == 0:
        return ctx.mpf(0)
    dval = ivl.modulus(ctx, _eval_iv(ctx, _derivative(coeffs), center))
    if ivl.lower(dval) <= 0:
        return None
    return (ivl.modulus(ctx, val) * d / dval).b


def _approximate(coeffs, prec):
    mp = MPContext()
    mp.prec = prec + 20
    highest_first = [mp.mpf(c) for c in reversed(coeffs)]
    if len(coeffs) == 2:
        return [mp.mpc(-mp.mpf(coeffs[0]) / coeffs[1])]
    return mp.polyroots(highest_first, maxsteps=400, extraprec=2 * prec)


def isolate(coeffs: list[int], prec: int) -> RootEnclosures:
    """Isolate all roots of the squarefree integer polynomial ``coeffs``.

    ``coeffs`` lists coefficients constant term first.  Raises PrecisionError
    when the discs still overlap at ``MAX_PRECISION``.
    """
    d = len(coeffs) - 1
    p = prec
    while p <= ivl.MAX_PRECISION:
        found = _try_isolate(coeffs, d, p)
        if found is not None:
            return found
        p *= 2
    raise PrecisionError(f"could not isolate roots of {coeffs} within {ivl.MAX_PRECISION} bits")


def _try_isolate(coeffs, d, prec):
    ctx = ivl.context(prec)
    try:
        approx = _approximate(coeffs, prec)
    except Exception:  # mpmath raises NoConvergence, a bare Exception subclass
        return None
    eps = ctx.mpf(2) ** (-(prec // 2))
    reals, cplx = [], []
    for z in approx:
        re = ctx.mpf(z.real)
        im = ctx.mpf(z.imag)
        if ivl.upper(abs(im)) < ivl.lower(eps):
            rad = _inclusion_radius(ctx, coeffs, re)
            if rad is None:
                return None
            reals.append((re, rad))
        elif ivl.lower(im) > 0:
            center = ctx.mpc(re, im)
            rad = _inclusion_radius(ctx, coeffs, center)
            if rad is None:
                return None
            cplx.append((re, im, rad))
    if len(reals) + 2 * len(cplx) != d:
        return None

    discs = [(re, ctx.mpf(0), rad) for re, rad in reals]
    for re, im, rad in cplx:
        discs.append((re, im, rad))
        discs.append((re, -im, rad))
    for a in range(len(discs)):
        for b in range(a + 1, len(discs)):
            ra, ia, rada = discs[a]
            rb, ib, radb = discs[b]
            dist2 = (ra - rb) ** 2 + (ia - ib) ** 2
            if not ivl.lower(dist2) > ivl.upper((rada + radb) ** 2):
                return None

    real_iv = sorted(
        (ctx.mpf([(re - rad).a, (re + rad).b]) for re, rad in reals),
        key=ivl.lower,
    )
    cplx.sort(key=lambda t: (ivl.lower(t[0]), ivl.lower(t[1])))
    complex_iv = tuple(
        ctx.mpc(ctx.mpf([(re - rad).a, (re + rad).b]), ctx.mpf([(im - rad).a, (im + rad).b]))
        for re, im, rad in cplx
    )
    return RootEnclosures(prec=prec, real=tuple(real_iv), complex=complex_iv)
