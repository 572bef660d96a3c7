"""Shared small fields and their unit lattices."""

from __future__ import annotations

import pytest

from euclidmin import NumberField, build_unit_lattice
from euclidmin.cm import build_cm, rational_field

CUBIC_UNITS = [[0, 1, 0], [-1, 1, 0]]


def make_field(name: str) -> NumberField:
    if name == "sqrt2":
        return NumberField([-2, 0, 1], label="Q(sqrt2)")
    if name == "sqrt3":
        return NumberField([-3, 0, 1], label="Q(sqrt3)")
    if name == "sqrt5":
        return NumberField([-1, -1, 1], label="Q(sqrt5)")
    if name == "gauss":
        return NumberField([1, 0, 1], label="Q(i)")
    if name == "eisenstein":
        return NumberField([1, 1, 1], label="Q(sqrt-3)")
    if name == "cubic":
        return NumberField([1, -2, -1, 1], label="x^3-x^2-2x+1", fundamental_units=CUBIC_UNITS)
    if name == "zeta8":
        # 1 + sqrt2 = 1 + zeta + zeta^7 generates the units modulo torsion
        return NumberField([1, 0, 0, 0, 1], label="Q(zeta8)", fundamental_units=[[1, 1, 0, -1]], torsion=8)
    raise KeyError(name)


_LATTICES: dict = {}


def field_and_lattice(name: str):
    if name not in _LATTICES:
        K = make_field(name)
        _LATTICES[name] = (K, build_unit_lattice(K))
    return _LATTICES[name]


@pytest.fixture(scope="session")
def sqrt2():
    return field_and_lattice("sqrt2")


@pytest.fixture(scope="session")
def sqrt3():
    return field_and_lattice("sqrt3")


@pytest.fixture(scope="session")
def sqrt5():
    return field_and_lattice("sqrt5")


@pytest.fixture(scope="session")
def gauss():
    return field_and_lattice("gauss")


@pytest.fixture(scope="session")
def eisenstein():
    return field_and_lattice("eisenstein")


@pytest.fixture(scope="session")
def cubic():
    return field_and_lattice("cubic")


@pytest.fixture(scope="session")
def gauss_cm(gauss):
    K, _ = gauss
    return build_cm(K, rational_field(), K.element([0, 1]))


@pytest.fixture(scope="session")
def eisenstein_cm(eisenstein):
    K, _ = eisenstein
    return build_cm(K, rational_field(), K.element([0, 1]))


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
