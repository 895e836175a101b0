"""Xi matrices, adjusting data, horizontal lifts and their verification."""
from .adjust import (
    AdjustedXiFamily,
    commutator_kernel,
    fold_commutator,
    joint_commutant_dim,
    solve_adjusting_data,
    stacked_map,
)
from .direction import DirectionLift, channel_lift, direction_curvature, isomonodromy_direction
from .frobenius import (
    DEFAULT_K,
    FrobeniusSolution,
    HorizontalLift,
    annulus_grid,
    b_matrix,
    curvature_check,
    curvature_residuals,
    frobenius_infinity,
    infinity_chart_series,
)
from .irregular import DiagonalGauge, IrregularLift, gauge_diagonalize_eps0, irregular_lift_eps0
from .xi import XiFamily, build_xi

__all__ = [n for n in dir() if not n.startswith("_")]
