"""Generalized Riemann problem solvers and one-step duct-flow schemes."""

from ._grpflow import (
    GrpError,
    GrpSolution,
    case_names,
    invariants,
    nozzle_steady,
    run_case,
    sample_riemann,
    sod_exact,
    solve_grp,
    solve_riemann,
)

__all__ = [
    "GrpError",
    "GrpSolution",
    "case_names",
    "invariants",
    "nozzle_steady",
    "run_case",
    "sample_riemann",
    "sod_exact",
    "solve_grp",
    "solve_riemann",
]
