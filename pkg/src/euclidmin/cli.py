"""Command-line interface: ``em <command> <field.json> [options]``.

Every command prints one JSON report.  Exit codes: 0 success, 1 precision
failure, 2 input error, 3 search finished without converging.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction
from importlib import metadata

from . import intervals as ivl
from .cm import SlopeLine, build_cm, rational_field, slope_minimum
from .field_core import FieldError, NumberField, format_rational, parse_rational
from .intervals import PrecisionError
from .minima import m_rational
from .oracle import brute_force_m, grid_min_nstar
from .spectrum import (
    bayer_bound,
    branch_and_bound_M,
    complexity_q,
    enumeration_count_bound,
    finiteness_radius,
)
from .unit_lattice import build_unit_lattice

EXIT_OK, EXIT_PRECISION, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunReport:
    command: str
    label: str
    inputs: dict
    results: dict
    timing: dict = dc_field(default_factory=dict)
    version: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.1.0"


def load_field(path: str) -> NumberField:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read field file {path}: {exc}") from exc
    if not isinstance(data, dict) or "min_poly" not in data:
        raise InputError(f"field file {path} must be an object with a 'min_poly' entry")
    return NumberField(
        data["min_poly"],
        data.get("integral_basis"),
        label=data.get("label"),
        fundamental_units=data.get("fundamental_units") or (),
        torsion=data.get("torsion"),
        allow_rational=bool(data.get("allow_rational", False)),
    )


def parse_coords(text: str, n: int) -> list[Fraction]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != n:
        raise InputError(f"expected {n} comma-separated rationals, got {text!r}")
    try:
        return [parse_rational(p) for p in parts]
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _coords_json(coords) -> list[str]:
    return [format_rational(c) for c in coords]


# -- commands ------------------------------------------------------------------


def cmd_units(args, K: NumberField) -> tuple[dict, int]:
    lattice = build_unit_lattice(K)
    return lattice.to_json(), EXIT_OK


def cmd_mk(args, K: NumberField) -> tuple[dict, int]:
    lattice = build_unit_lattice(K)
    x = K.element(parse_coords(args.point, K.degree))
    res = m_rational(x, lattice)
    return {
        "value": format_rational(res.value),
        "witness": _coords_json(res.witness.coords),
        "scanned": res.scanned,
        "radius": res.radius,
        "orbit_size": res.orbit_size,
    }, EXIT_OK


def cmd_search(args, K: NumberField) -> tuple[dict, int]:
    lattice = build_unit_lattice(K)
    res = branch_and_bound_M(K, lattice, tol=args.tol, max_depth=args.depth, qmax=args.qmax,
                             threads=args.threads)
    out = {
        "lower": format_rational(res.lower),
        "upper": float(res.upper),
        "upper_exact": format_rational(res.upper),
        "witnesses": [_coords_json(w.coords) for w in res.witnesses],
        "converged": res.converged,
        "Q_log3": complexity_q(K, lattice, args.C).e3,
        "bayer_bound": format_rational(bayer_bound(K)),
        "counts": res.counts,
    }
    return out, EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _parse_f_element(text: str, F: NumberField):
    return F.element(parse_coords(text, F.degree))


def cmd_cm(args, K: NumberField) -> tuple[dict, int]:
    if args.F:
        F = load_field(args.F)
        gen = K.element(parse_coords(args.F_gen, K.degree)) if args.F_gen else None
    else:
        F, gen = (rational_field(), None) if K.degree == 2 else (None, None)
    eta = K.element(parse_coords(args.eta, K.degree))
    cm = build_cm(K, F, eta, gen)
    phi = None if args.slope.strip().lower() in ("inf", "infinity", "oo") else _parse_f_element(args.slope, cm.F)
    beta = _parse_f_element(args.beta, cm.F)
    m = slope_minimum(SlopeLine(phi, beta), cm)
    return {
        "xi": _coords_json(m.xi.coords),
        "min": format_rational(m.value),
        "factors": list(m.factors),
        "t": _coords_json(cm.t.coords),
        "n": _coords_json(cm.n.coords),
        "point": [_coords_json(m.point[0].coords), _coords_json(m.point[1].coords)],
    }, EXIT_OK


def cmd_bounds(args, K: NumberField) -> tuple[dict, int]:
    lattice = build_unit_lattice(K)
    Q = complexity_q(K, lattice, args.C)
    return {
        "bayer_bound": format_rational(bayer_bound(K)),
        "Q_log3": Q.e3,
        "Q_log4": Q.log_e3,
        "F_UK": ivl.mid_float(lattice.f_uk),
        "F_UK_flagged": lattice.f_uk_flagged,
        "R": finiteness_radius(K, lattice),
        "count_bound": enumeration_count_bound(K, lattice, args.q),
        "q": args.q,
    }, EXIT_OK


def cmd_oracle(args, K: NumberField) -> tuple[dict, int]:
    if args.oracle_command == "mk":
        x = K.element(parse_coords(args.point, K.degree))
        return {"value": format_rational(brute_force_m(x, args.radius)), "radius": args.radius}, EXIT_OK
    if args.F:
        F = load_field(args.F)
        gen = K.element(parse_coords(args.F_gen, K.degree)) if args.F_gen else None
    else:
        F, gen = (rational_field(), None) if K.degree == 2 else (None, None)
    cm = build_cm(K, F, K.element(parse_coords(args.eta, K.degree)), gen)
    phi = None if args.slope.strip().lower() in ("inf", "infinity", "oo") else _parse_f_element(args.slope, cm.F)
    value, argmin = grid_min_nstar(SlopeLine(phi, _parse_f_element(args.beta, cm.F)), cm,
                                   args.window, args.resolution)
    return {"min": value, "argmin": list(argmin), "resolution": args.resolution,
            "window": args.window}, EXIT_OK


COMMANDS = {
    "units": cmd_units,
    "mk": cmd_mk,
    "search": cmd_search,
    "cm": cmd_cm,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
}


def _add_cm_args(p):
    p.add_argument("--F", help="subfield file (default: detected, Q for quadratic K)")
    p.add_argument("--F-gen", dest="F_gen", help="K-coordinates of the image of F's generator")
    p.add_argument("--eta", required=True, help="K-coordinates of eta")
    p.add_argument("--slope", required=True, help="F-coordinates of the slope, or 'inf'")
    p.add_argument("--beta", required=True, help="F-coordinates of the offset beta")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="em", description="Euclidean minima of number fields")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks (recorded)")
    ap.add_argument("--threads", type=int, default=1, help="worker cap for the box search")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("units", help="unit lattice, regulator and F_UK")
    p.add_argument("field")

    p = sub.add_parser("mk", help="exact Euclidean minimum at a rational point")
    p.add_argument("field")
    p.add_argument("--point", required=True, help="basis coordinates, e.g. '1/2,0'")

    p = sub.add_parser("search", help="certified enclosure of M(K)")
    p.add_argument("field")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--qmax", type=int, default=8)
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--C", type=float, default=1.0, help="constant in the tower bound Q")

    p = sub.add_parser("cm", help="closed-form minimum of N_* on a slope line")
    p.add_argument("field")
    _add_cm_args(p)

    p = sub.add_parser("bounds", help="global bound, tower bound and count bound")
    p.add_argument("field")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--q", type=int, default=2)

    p = sub.add_parser("oracle", help="brute-force references")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    o = osub.add_parser("mk", help="brute-force coset scan")
    o.add_argument("field")
    o.add_argument("--point", required=True)
    o.add_argument("--radius", type=int, default=20)
    o = osub.add_parser("cm", help="grid scan of N_* along a line")
    o.add_argument("field")
    _add_cm_args(o)
    o.add_argument("--window", type=float, default=2.0)
    o.add_argument("--resolution", type=float, default=1e-3)
    return ap


def dispatch(argv: list[str] | None = None) -> tuple[RunReport | None, int]:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return None, EXIT_INPUT if exc.code else EXIT_OK
    inputs = {k: v for k, v in sorted(vars(args).items())}
    start = time.perf_counter()
    try:
        K = load_field(args.field)
        results, code = COMMANDS[args.command](args, K)
    except (InputError, FieldError, ValueError, ZeroDivisionError) as exc:
        print(f"em: error: {exc}", file=sys.stderr)
        return None, EXIT_INPUT
    except PrecisionError as exc:
        print(f"em: precision failure: {exc}", file=sys.stderr)
        return None, EXIT_PRECISION
    elapsed = time.perf_counter() - start
    report = RunReport(args.command, K.label, inputs, results, {"seconds": elapsed}, _version())
    return report, code


def main(argv: list[str] | None = None) -> int:
    report, code = dispatch(argv)
    if report is not None:
        print(report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
