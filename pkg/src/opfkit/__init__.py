"""AC optimal power flow toolkit.

Modules:
    netmodel  network data model, case I/O, admittance, constraint evaluation
    pflow     quadratic power-flow systems and all-solutions enumeration
    localopt  interior-point local OPF solves and multistart search
    sdprelax  semidefinite relaxation, lower bounds, rank-1 recovery
    casegen   random small-case construction
    fspace    discretized feasible-space mapping and connectivity
    pipeline  screening experiments and IEEE-case modification recipes
    cli       command-line entry point
"""

from .netmodel import (
    Branch,
    Bus,
    Case,
    CaseError,
    CostPoly,
    Generator,
    ParseError,
    build_admittance,
    check_feasibility,
    emit_case,
    evaluate_point,
    load_case,
    parse_case,
)

__version__ = "0.1.0"
