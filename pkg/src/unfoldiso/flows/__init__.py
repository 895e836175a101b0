"""Flows of v_{eps,theta}, covering regions, transport and monodromy."""
from .asymptotic import AsymptoticReport, asymptotic_limit, exponent_integrals, flat_section_residual, offdiag_ratio
from .field import (
    OUTSIDE,
    FlowField,
    P,
    Q,
    SectorParams,
    default_delta,
    eta_holds,
    find_eta,
    region_contains,
    region_slacks,
    sample_region,
    theta_for,
)
from .integrate import Trajectory, convergence_rate_check, integrate_flow, rate_slope
from .transport import (
    CirclePath,
    ConcatPath,
    SegmentPath,
    TransportResult,
    big_loop,
    big_loop_radius,
    local_loops,
    local_monodromy_report,
    monodromy_invariance_check,
    rank_one_monodromy,
    reversal_defect,
    transport,
)

__all__ = [n for n in dir() if not n.startswith("_")]
