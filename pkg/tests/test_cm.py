import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from euclidmin import NumberField, SlopeLine, build_cm, embed, n_star, norm_exact, nu_floor, rho, slope_minimum
from euclidmin import intervals as ivl
from euclidmin.cm import complex_conjugate, embed_f, maximal_real_subfield, n_star_of, rational_field
from euclidmin.field_core import FieldError
from euclidmin.oracle import grid_min_nstar

from conftest import make_field

Q = rational_field()


def q(v):
    return Q.scalar(Fraction(v))


def test_build_cm_examples(gauss_cm, eisenstein_cm):
    assert gauss_cm.t == q(0) and gauss_cm.n == q(1)
    assert eisenstein_cm.t == q(-1) and eisenstein_cm.n == q(1)


def test_build_cm_errors():
    K = make_field("gauss")
    with pytest.raises(FieldError, match="O_F"):
        build_cm(K, Q, K.scalar(2))
    with pytest.raises(FieldError, match="totally complex"):
        R = make_field("sqrt2")
        build_cm(R, Q, R.gen)
    with pytest.raises(FieldError, match="totally real"):
        Z = make_field("zeta8")
        build_cm(Z, make_field("gauss"), Z.gen, Z.element([0, 0, 1, 0]))
    with pytest.raises(FieldError):
        build_cm(K, Q, K.element([Fraction(1, 2), Fraction(1, 2)]))


def test_embedding_identities(eisenstein_cm):
    cm = eisenstein_cm
    assert ivl.contains(cm.re_eta[0], Fraction(-1, 2))
    assert ivl.contains(cm.abs2_eta[0], 1)
    assert ivl.certainly_positive(cm.im_eta[0])


def test_rho_examples(gauss_cm, eisenstein_cm):
    K = gauss_cm.K
    assert rho(K.element([3, 4]), gauss_cm) == (q(3), q(4))
    assert rho(K.scalar(Fraction(5, 3)), gauss_cm) == (q(Fraction(5, 3)), q(0))
    E = eisenstein_cm.K
    assert rho(E.element([1, 2]), eisenstein_cm) == (q(1), q(2))


def test_n_star_examples(gauss_cm, eisenstein_cm):
    assert ivl.contains(n_star([3], [4], gauss_cm), 25)
    assert ivl.contains(n_star([0], [0], gauss_cm), 0)
    assert ivl.contains(n_star([0], [1], eisenstein_cm), 1)


def test_slope_minimum_examples(gauss_cm, eisenstein_cm):
    m = slope_minimum(SlopeLine(q(0), q(1)), eisenstein_cm)
    assert m.xi == q(Fraction(1, 2))
    assert m.value == Fraction(3, 4)
    m = slope_minimum(SlopeLine(q(0), q(0)), eisenstein_cm)
    assert m.value == 0 and m.xi == q(0)
    m = slope_minimum(SlopeLine(None, q(1)), gauss_cm)
    assert m.xi == q(0) and m.value == 1


def test_slope_infinity_vertex(eisenstein_cm):
    # f(theta) = theta^2 - theta + 1 along y2 = 1: vertex at 1/2, value 3/4
    m = slope_minimum(SlopeLine(None, q(1)), eisenstein_cm)
    assert m.xi == q(Fraction(1, 2))
    assert m.value == Fraction(3, 4)
    value, (theta,) = grid_min_nstar(SlopeLine(None, q(1)), eisenstein_cm, 2.0, 1e-4)
    assert value == pytest.approx(0.75, abs=1e-7)
    assert theta == pytest.approx(0.5, abs=1e-4)


def test_line_normalization(eisenstein_cm):
    line = SlopeLine.through(q(2), q(3), q(1))
    assert line.beta == q(1)
    y1, y2 = line.point(q(5))
    assert y1 == q(11) and y2 == q(5)
    assert SlopeLine.through(None, q(3), q(7)).beta == q(7)


def test_nu_floor_examples(eisenstein_cm):
    lines = [SlopeLine(q(0), q(1)), SlopeLine(q(0), q(2))]
    nu, line, xi = nu_floor(lines, eisenstein_cm)
    assert nu == Fraction(3, 4) and line.beta == q(1) and xi == q(Fraction(1, 2))
    assert nu_floor(lines + [SlopeLine(q(3), q(0))], eisenstein_cm)[0] == 0
    assert nu_floor(lines[1:], eisenstein_cm)[0] == slope_minimum(lines[1], eisenstein_cm).value
    with pytest.raises(ValueError):
        nu_floor([], eisenstein_cm)


def test_value_scales_with_beta_squared(eisenstein_cm):
    a = slope_minimum(SlopeLine(q(Fraction(1, 3)), q(1)), eisenstein_cm).value
    b = slope_minimum(SlopeLine(q(Fraction(1, 3)), q(3)), eisenstein_cm).value
    assert b == 9 * a


@pytest.fixture(scope="module")
def zeta8_cm():
    K = make_field("zeta8")
    return build_cm(K, None, K.gen)


def test_maximal_real_subfield_zeta8(zeta8_cm):
    cm = zeta8_cm
    assert cm.F.degree == 2 and cm.F.discriminant == 8
    a = cm.gen_image
    assert a * a == cm.K.scalar(2)
    assert complex_conjugate(a) == a
    assert complex_conjugate(cm.K.gen) != cm.K.gen


def test_maximal_real_subfield_rejects_large_degree():
    K = NumberField([1, 0, 0, 1, 0, 0, 1])   # ninth cyclotomic
    with pytest.raises(FieldError):
        maximal_real_subfield(K)


def test_zeta8_slope_minimum_against_grid(zeta8_cm):
    cm = zeta8_cm
    F = cm.F
    line = SlopeLine(F.element([1, 1]), F.element([2, -1]))
    m = slope_minimum(line, cm)
    value, _ = grid_min_nstar(line, cm, 4.0, 1e-4)
    assert float(m.value) == pytest.approx(value, abs=1e-6)
    y1, y2 = m.point
    assert ivl.contains(n_star(embed_f(y1, cm), embed_f(y2, cm), cm), m.value)


def rand_element(rng, K, h=6, qmax=4):
    return K.element([Fraction(rng.randint(-h, h), rng.randint(1, qmax)) for _ in range(K.degree)])


@pytest.mark.parametrize("which", ["gauss", "eisenstein", "zeta8"])
def test_factorization_identity(which, gauss_cm, eisenstein_cm, zeta8_cm):
    cm = {"gauss": gauss_cm, "eisenstein": eisenstein_cm, "zeta8": zeta8_cm}[which]
    rng = random.Random(11)
    for _ in range(100):
        x = rand_element(rng, cm.K)
        y1, y2 = rho(x, cm)
        assert y1 * 1 == y1 and x == cm.iota(y1) + cm.eta * cm.iota(y2)
        assert ivl.contains(n_star_of(x, cm), abs(norm_exact(x)))


def test_gamma_membership(eisenstein_cm):
    cm = eisenstein_cm
    x = cm.K.element([2, -3])
    assert all(y.is_integral for y in rho(x, cm))
    assert not all(y.is_integral for y in rho(cm.K.element([Fraction(1, 2), 0]), cm))


small = st.fractions(min_value=-5, max_value=5, max_denominator=5)


@settings(max_examples=60, deadline=None)
@given(phi=small, beta=small.filter(lambda b: b != 0), infinite=st.booleans())
def test_minimizer_is_local_minimum(phi, beta, infinite, eisenstein_cm):
    cm = eisenstein_cm
    line = SlopeLine(None if infinite else q(phi), q(beta))
    m = slope_minimum(line, cm)
    assert m.value > 0
    eps = q(Fraction(1, 1000))

    def value_at(theta):
        y1, y2 = line.point(theta)
        return n_star(embed_f(y1, cm), embed_f(y2, cm), cm)

    at = value_at(m.xi)
    assert ivl.contains(at, m.value)
    for side in (m.xi + eps, m.xi - eps):
        assert ivl.lower(value_at(side)) > ivl.upper(at)


@settings(max_examples=60, deadline=None)
@given(a=small, b=small)
def test_factor_positive_definite(a, b, gauss_cm, eisenstein_cm):
    for cm in (gauss_cm, eisenstein_cm):
        v = n_star([a], [b], cm)
        if a == 0 and b == 0:
            assert ivl.contains(v, 0)
        else:
            assert ivl.certainly_positive(v)
