"""Exact arithmetic in a number field K and certified embeddings into K (x) R.

Elements are stored by their rational coordinates over a fixed integral basis
of the ring of integers, so membership in O_K and denominators are read off
coordinate-wise.  Embeddings are interval enclosures; the exact norm and trace
(determinant and trace of the multiplication matrix) are the ground truth.

Embedding order: real embeddings by ascending root, then one embedding per
complex-conjugate pair, taking the root with positive imaginary part and
ordering pairs by ascending real part.  All norms are invariant under the
choice of representative within a pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

import numpy as np
import sympy

from . import exact
from . import intervals as ivl
from .intervals import PrecisionError
from .roots import RootEnclosures, isolate


class FieldError(ValueError):
    """Invalid field data: reducible polynomial, bad basis, bad units."""


class FieldMismatchError(ValueError):
    pass


def parse_rational(text) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, str):
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {text!r}") from exc
    raise ValueError(f"not a rational number: {text!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _polymulmod(a, b, f):
    """Product of power-basis vectors ``a`` and ``b`` reduced modulo monic ``f``."""
    d = len(f) - 1
    prod = [Fraction(0)] * (2 * d - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += x * y
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            for m in range(d):
                prod[k - d + m] -= c * f[m]
    return prod[:d]


class NumberField:
    """A number field given by a monic integer polynomial and an integral basis.

    ``integral_basis`` lists the basis elements, each as its coordinates in the
    power basis 1, theta, ..., theta^(d-1).  It is trusted to span O_K; the
    constructor only checks that it spans an order.
    """

    def __init__(
        self,
        min_poly: Sequence[int],
        integral_basis: Sequence[Sequence] | None = None,
        label: str | None = None,
        fundamental_units: Iterable[Sequence] = (),
        torsion: int | None = None,
        allow_rational: bool = False,
    ):
        coeffs = []
        for c in min_poly:
            q = parse_rational(c)
            if q.denominator != 1:
                raise FieldError("minimal polynomial must have integer coefficients")
            coeffs.append(int(q))
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        d = len(coeffs) - 1
        if d < (1 if allow_rational else 2):
            raise FieldError(f"degree must be at least {1 if allow_rational else 2}, got {d}")
        if coeffs[-1] != 1:
            raise FieldError("minimal polynomial must be monic")
        self.min_poly = tuple(coeffs)
        self.degree = d
        self.label = label or self._default_label()
        self._check_irreducible()

        if integral_basis is None:
            basis = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        else:
            basis = [[parse_rational(v) for v in row] for row in integral_basis]
            if len(basis) != d or any(len(row) != d for row in basis):
                raise FieldError(f"integral basis must be {d}x{d}")
        self.basis = tuple(tuple(row) for row in basis)
        # columns of ``cols`` are the basis elements in power coordinates
        cols = [[basis[j][i] for j in range(d)] for i in range(d)]
        try:
            self._to_basis = exact.inverse(cols)
        except exact.SingularMatrixError as exc:
            raise FieldError("integral basis matrix is not invertible") from exc
        self._basis_matrix = cols

        self._build_structure_constants()
        self.discriminant = int(exact.det(
            [[self._trace_coords(self.structure[i][j]) for j in range(d)] for i in range(d)]
        ))

        enc = self.root_enclosures(ivl.default_precision())
        self.r1 = len(enc.real)
        self.r2 = len(enc.complex)
        self.torsion = torsion

        units = []
        for u in fundamental_units:
            if len(u) != d:
                raise FieldError(f"unit {list(u)} must have {d} coordinates")
            elem = FieldElement(self, tuple(parse_rational(v) for v in u))
            if not elem.is_integral:
                raise FieldError(f"unit {list(u)} is not in O_K")
            if abs(elem.norm()) != 1:
                raise FieldError(f"unit {list(u)} has norm {elem.norm()}, not +-1")
            units.append(elem)
        self.fundamental_units = tuple(units)

    # -- construction helpers ------------------------------------------------

    def _default_label(self) -> str:
        x = sympy.Symbol("x")
        return str(sympy.Poly(list(reversed(self.min_poly)), x).as_expr()).replace(" ", "")

    def _check_irreducible(self) -> None:
        x = sympy.Symbol("x")
        poly = sympy.Poly(list(reversed(self.min_poly)), x, domain="QQ")
        if sympy.gcd(poly, poly.diff(x)).degree() > 0:
            raise FieldError(f"polynomial {self.label} is not squarefree (reducible)")
        if not poly.is_irreducible:
            raise FieldError(f"polynomial {self.label} is reducible over Q")

    def _build_structure_constants(self) -> None:
        d = self.degree
        table = []
        for i in range(d):
            row = []
            for j in range(d):
                prod = _polymulmod(self.basis[i], self.basis[j], self.min_poly)
                coords = exact.matvec(self._to_basis, prod)
                if any(c.denominator != 1 for c in coords):
                    raise FieldError("integral basis does not span an order (structure constants not integral)")
                row.append(tuple(int(c) for c in coords))
            table.append(tuple(row))
        self.structure = tuple(table)
        one = exact.matvec(self._to_basis, [Fraction(int(k == 0)) for k in range(d)])
        if any(c.denominator != 1 for c in one):
            raise FieldError("integral basis does not contain 1 in its integer span")
        self._one = tuple(Fraction(c) for c in one)
        self._basis_traces = tuple(sum(self.structure[k][m][m] for m in range(d)) for k in range(d))

    def _trace_coords(self, coords) -> Fraction:
        return sum((Fraction(c) * t for c, t in zip(coords, self._basis_traces)), Fraction(0))

    # -- basic data ----------------------------------------------------------

    @property
    def signature(self) -> tuple[int, int]:
        return (self.r1, self.r2)

    @property
    def n_places(self) -> int:
        """|I| = r1 + r2, the number of archimedean places."""
        return self.r1 + self.r2

    @property
    def weights(self) -> tuple[int, ...]:
        """d_i: 1 at real places, 2 at complex places."""
        return (1,) * self.r1 + (2,) * self.r2

    @property
    def unit_rank(self) -> int:
        return self.r1 + self.r2 - 1

    @property
    def abs_discriminant(self) -> int:
        return abs(self.discriminant)

    def __repr__(self) -> str:
        return f"NumberField({self.label!r}, d={self.degree}, sig={self.signature}, D={self.discriminant})"

    # -- elements ------------------------------------------------------------

    def element(self, coords: Sequence) -> FieldElement:
        if len(coords) != self.degree:
            raise ValueError(f"expected {self.degree} coordinates, got {len(coords)}")
        return FieldElement(self, tuple(parse_rational(c) for c in coords))

    def from_power(self, coeffs: Sequence) -> FieldElement:
        """Element sum coeffs[k] * theta^k given in the power basis."""
        v = [parse_rational(c) for c in coeffs] + [Fraction(0)] * (self.degree - len(coeffs))
        if len(v) > self.degree:
            v = _reduce_power(v, self.min_poly)
        return FieldElement(self, tuple(exact.matvec(self._to_basis, v)))

    def scalar(self, q) -> FieldElement:
        q = Fraction(q)
        return FieldElement(self, tuple(q * c for c in self._one))

    @cached_property
    def one(self) -> FieldElement:
        return FieldElement(self, self._one)

    @cached_property
    def zero(self) -> FieldElement:
        return FieldElement(self, (Fraction(0),) * self.degree)

    @cached_property
    def gen(self) -> FieldElement:
        return self.from_power([0, 1])

    def to_power(self, coords: Sequence) -> list[Fraction]:
        return exact.matvec(self._basis_matrix, coords)

    def mult_matrix_int(self, ints: Sequence[int]) -> list[list[int]]:
        """Matrix of multiplication by sum ints[i]*omega_i; column j is x*omega_j."""
        d = self.degree
        T = self.structure
        return [
            [sum(ints[i] * T[i][j][k] for i in range(d) if ints[i]) for j in range(d)]
            for k in range(d)
        ]

    # -- embeddings ----------------------------------------------------------

    def root_enclosures(self, prec: int) -> RootEnclosures:
        cache = self.__dict__.setdefault("_roots", {})
        if prec not in cache:
            cache[prec] = isolate(list(self.min_poly), prec)
        return cache[prec]

    def basis_embeddings(self, prec: int) -> tuple[tuple, ...]:
        """sigma_i(omega_j) as intervals, indexed [i][j] for i in I."""
        cache = self.__dict__.setdefault("_basis_emb", {})
        if prec not in cache:
            ctx = ivl.context(prec)
            roots = self.root_enclosures(prec).all
            table = []
            for r in roots:
                powers = [ctx.mpf(1)]
                for _ in range(self.degree - 1):
                    powers.append(powers[-1] * r)
                row = []
                for j in range(self.degree):
                    acc = ctx.mpf(0)
                    for k, c in enumerate(self.basis[j]):
                        if c:
                            acc = acc + ivl.from_fraction(ctx, c) * powers[k]
                    row.append(acc)
                table.append(tuple(row))
            cache[prec] = tuple(table)
        return cache[prec]

    @cached_property
    def embedding_matrix(self) -> np.ndarray:
        """Float matrix mapping basis coordinates to real embedding coordinates.

        Rows: sigma_i for real places, then (Re, Im) of sigma_i for complex places.
        """
        emb = self.basis_embeddings(ivl.default_precision())
        rows = []
        for i, row in enumerate(emb):
            if i < self.r1:
                rows.append([ivl.mid_float(v) for v in row])
            else:
                rows.append([ivl.mid_float(v.real) for v in row])
                rows.append([ivl.mid_float(v.imag) for v in row])
        return np.array(rows, dtype=float)

    @cached_property
    def embedding_matrix_inv(self) -> np.ndarray:
        return np.linalg.inv(self.embedding_matrix)

    @cached_property
    def basis_moduli(self) -> np.ndarray:
        """Certified float upper bounds of |sigma_i(omega_j)|, shape (|I|, d)."""
        prec = ivl.default_precision()
        ctx = ivl.context(prec)
        emb = self.basis_embeddings(prec)
        return np.array(
            [[ivl.float_up(ivl.upper_float(ivl.modulus(ctx, v))) for v in row] for row in emb]
        )

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "min_poly": [str(c) for c in self.min_poly],
            "integral_basis": [[format_rational(v) for v in row] for row in self.basis],
            "fundamental_units": [[format_rational(v) for v in u.coords] for u in self.fundamental_units],
        }


def _reduce_power(v, f):
    d = len(f) - 1
    v = list(v)
    for k in range(len(v) - 1, d - 1, -1):
        c = v[k]
        if c:
            for m in range(d):
                v[k - d + m] -= c * f[m]
    return v[:d]


@dataclass(frozen=True, eq=False)
class FieldElement:
    """An element of K by exact rational coordinates over the integral basis."""

    field: NumberField
    coords: tuple[Fraction, ...]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field.scalar(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field is other.field and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return f"FieldElement([{', '.join(format_rational(c) for c in self.coords)}])"

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise FieldMismatchError("elements belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.scalar(other)
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coords))
        return mul(self, self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a / other for a in self.coords))
        return self * self._coerce(other).inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.field.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    @cached_property
    def denominator(self) -> int:
        """Smallest q > 0 with q*x in O_K."""
        return lcm(*(c.denominator for c in self.coords))

    @property
    def numerators(self) -> tuple[int, ...]:
        q = self.denominator
        return tuple(int(c * q) for c in self.coords)

    @property
    def is_integral(self) -> bool:
        return self.denominator == 1

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        power = self.field.to_power(self.coords)
        return not any(power[1:])

    def norm(self) -> Fraction:
        return norm_exact(self)

    def trace(self) -> Fraction:
        return trace_exact(self)

    def inverse(self) -> FieldElement:
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero")
        m = mult_matrix(self)
        return FieldElement(self.field, tuple(exact.solve(m, self.field._one)))

    def embed(self, tol: float = 1e-30) -> EmbeddingPoint:
        return embed(self, tol)

    def reduce_mod_ok(self) -> FieldElement:
        """Representative of x + O_K with coordinates in [0, 1)."""
        return FieldElement(self.field, tuple(c - (c.numerator // c.denominator) for c in self.coords))


def _check_same(x: FieldElement, y: FieldElement) -> None:
    if x.field is not y.field:
        raise FieldMismatchError("elements belong to different fields")


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    """Exact product through the structure constants."""
    _check_same(x, y)
    K = x.field
    d = K.degree
    qx, qy = x.denominator, y.denominator
    a, b = x.numerators, y.numerators
    T = K.structure
    out = [0] * d
    for i in range(d):
        ai = a[i]
        if not ai:
            continue
        for j in range(d):
            bj = b[j]
            if not bj:
                continue
            p = ai * bj
            for k, t in enumerate(T[i][j]):
                if t:
                    out[k] += p * t
    q = qx * qy
    return FieldElement(K, tuple(Fraction(v, q) for v in out))


def mult_matrix(x: FieldElement) -> list[list[Fraction]]:
    q = x.denominator
    m = x.field.mult_matrix_int(x.numerators)
    return [[Fraction(v, q) for v in row] for row in m]


def norm_exact(x: FieldElement) -> Fraction:
    """Signed norm N_K(x): determinant of multiplication by x."""
    if x.is_zero:
        return Fraction(0)
    q = x.denominator
    return Fraction(exact.det_int(x.field.mult_matrix_int(x.numerators)), q ** x.field.degree)


def trace_exact(x: FieldElement) -> Fraction:
    return x.field._trace_coords(x.coords)


# -- embeddings ----------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingPoint:
    """A point of K (x) R as enclosures (x_i) for i in I.

    Real places carry real intervals, complex places complex rectangles.
    """

    values: tuple
    r1: int
    prec: int

    @property
    def n_places(self) -> int:
        return len(self.values)

    def max_width(self) -> Fraction:
        return max((ivl.width(v) for v in self.values), default=Fraction(0))

    def scale(self, s) -> EmbeddingPoint:
        ctx = ivl.context(self.prec)
        f = ivl.from_fraction(ctx, s) if isinstance(s, (int, Fraction)) else ctx.mpf(s)
        return EmbeddingPoint(tuple(v * f for v in self.values), self.r1, self.prec)

    def times(self, other: EmbeddingPoint) -> EmbeddingPoint:
        """Coordinatewise product, the action of K on K (x) R."""
        return EmbeddingPoint(
            tuple(a * b for a, b in zip(self.values, other.values)),
            self.r1,
            max(self.prec, other.prec),
        )

    def minus(self, other: EmbeddingPoint) -> EmbeddingPoint:
        return EmbeddingPoint(
            tuple(a - b for a, b in zip(self.values, other.values)),
            self.r1,
            max(self.prec, other.prec),
        )

    def moduli(self) -> tuple:
        ctx = ivl.context(self.prec)
        return tuple(ivl.modulus(ctx, v) for v in self.values)

    def real_coords_float(self) -> np.ndarray:
        out = []
        for i, v in enumerate(self.values):
            if i < self.r1:
                out.append(ivl.mid_float(v))
            else:
                out.extend([ivl.mid_float(v.real), ivl.mid_float(v.imag)])
        return np.array(out)

    @classmethod
    def from_real_coords(cls, field: NumberField, coords: Sequence[float], prec: int | None = None):
        """Build a point from exact-valued floats (Re, Im split for complex places)."""
        prec = prec or ivl.default_precision()
        ctx = ivl.context(prec)
        vals, k = [], 0
        for i in range(field.n_places):
            if i < field.r1:
                vals.append(ctx.mpf(coords[k]))
                k += 1
            else:
                vals.append(ctx.mpc(ctx.mpf(coords[k]), ctx.mpf(coords[k + 1])))
                k += 2
        return cls(tuple(vals), field.r1, prec)


def _embed_at(x: FieldElement, prec: int) -> tuple:
    K = x.field
    ctx = ivl.context(prec)
    if x.is_rational():
        q = K.to_power(x.coords)[0]
        v = ivl.from_fraction(ctx, q)
        return tuple(v if i < K.r1 else ctx.mpc(v, 0) for i in range(K.n_places))
    emb = K.basis_embeddings(prec)
    coeffs = [ivl.from_fraction(ctx, c) if c else None for c in x.coords]
    out = []
    for row in emb:
        acc = ctx.mpf(0)
        for c, e in zip(coeffs, row):
            if c is not None:
                acc = acc + c * e
        out.append(acc)
    return tuple(out)


def embed(x: FieldElement, tol: float = 1e-30) -> EmbeddingPoint:
    """Enclosures of sigma_i(x), i in I, each of width at most ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    tol_q = Fraction(tol)
    prec = ivl.default_precision()
    while prec <= ivl.MAX_PRECISION:
        vals = _embed_at(x, prec)
        if all(ivl.width(v) <= tol_q for v in vals):
            return EmbeddingPoint(vals, x.field.r1, prec)
        prec *= 2
    raise PrecisionError(f"embedding of {x} did not reach width {tol} within {ivl.MAX_PRECISION} bits")


def norm_kbar(p: EmbeddingPoint):
    """N(x) = prod_{real} x_i * prod_{complex} |x_i|^2 as a real interval."""
    ctx = ivl.context(p.prec)
    acc = ctx.mpf(1)
    for i, v in enumerate(p.values):
        acc = acc * (v if i < p.r1 else ivl.abs2(ctx, v))
    return acc


def parse_field(
    min_poly: Sequence,
    integral_basis: Sequence[Sequence] | None = None,
    units: Iterable[Sequence] = (),
    label: str | None = None,
    torsion: int | None = None,
) -> NumberField:
    return NumberField(min_poly, integral_basis, label=label, fundamental_units=units, torsion=torsion)
