"""Euclidean minima of number fields: exact minima at rational points,
certified bounds on M(K), unit reduction, and CM slope minima."""

from .cm import CMData, SlopeLine, build_cm, n_star, nu_floor, rho, slope_minimum
from .field_core import (
    EmbeddingPoint,
    FieldElement,
    FieldError,
    NumberField,
    embed,
    mul,
    norm_exact,
    norm_kbar,
    parse_field,
    trace_exact,
)
from .minima import BoxRegion, MinimumResult, enumerate_coset_in_box, m_point_bounds, m_rational
from .oracle import OracleConfig, brute_force_m, grid_min_nstar
from .spectrum import (
    TowerBound,
    bayer_bound,
    branch_and_bound_M,
    complexity_q,
    denominator_sweep,
    enumeration_count_bound,
)
from .unit_lattice import UnitLattice, build_unit_lattice, f_uk, h0, log_embed, mahler, reduce_point

__version__ = "0.1.0"
