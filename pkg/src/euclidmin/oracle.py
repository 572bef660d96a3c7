"""Slow reference computations used to cross-check the engines.

These use exact field arithmetic and plain loops over truncated search
regions, sharing nothing with the box enumeration or the closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cm import CMData, SlopeLine, embed_f, _as_f
from .field_core import FieldElement, norm_exact
from . import intervals as ivl


@dataclass(frozen=True)
class OracleConfig:
    radius: int = 20
    resolution: float = 1e-3
    window: float = 2.0
    samples: int = 1000

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be at least 1")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")


def brute_force_m(x: FieldElement, radius: int = 20) -> Fraction:
    """min of |N_K(x + sum c_j omega_j)| over |c_j| <= radius."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    K = x.field
    best = None
    for c in itertools.product(range(-radius, radius + 1), repeat=K.degree):
        y = x + K.element(list(c))
        v = abs(norm_exact(y))
        if best is None or v < best:
            best = v
            if best == 0:
                break
    return best


def grid_min_nstar(line: SlopeLine, cm: CMData, window: float = 2.0, resolution: float = 1e-3):
    """Grid minimum of N_* on the line, returning (value, argmin per place).

    Each factor of N_* depends on its own coordinate theta_i, so the minimum
    over the product grid is the product of per-coordinate grid minima.  The
    grid is uniform in Euclidean arc length along each planar line, so the
    gap to the true minimum stays O(resolution^2) whatever the slope.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    F = cm.F
    beta = [ivl.mid_float(v) for v in embed_f(_as_f(line.beta, F), cm)]
    phi = None if line.phi is None else [ivl.mid_float(v) for v in embed_f(_as_f(line.phi, F), cm)]
    re = [ivl.mid_float(v) for v in cm.re_eta]
    im = [ivl.mid_float(v) for v in cm.im_eta]
    k = math.floor(window / resolution)
    arc = np.arange(-k, k + 1, dtype=float) * resolution
    value, argmin = 1.0, []
    for i in range(cm.s):
        if phi is None:
            theta = arc
            y1, y2 = theta, np.full_like(theta, beta[i])
        else:
            theta = arc / math.hypot(1.0, phi[i])
            y1, y2 = phi[i] * theta + beta[i], theta
        f = (y1 + re[i] * y2) ** 2 + (im[i] * y2) ** 2
        j = int(np.argmin(f))
        value *= float(f[j])
        argmin.append(float(theta[j]))
    return value, tuple(argmin)
