"""Isomonodromy directions: A + h sum v_{l,j} Xi~_{l,j} with its B-matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra.dual import Dual
from ..errors import LambdaViolation
from .adjust import AdjustedXiFamily
from .frobenius import DEFAULT_K, HorizontalLift, b_matrix, curvature_check, frobenius_infinity


@dataclass(frozen=True, eq=False)
class DirectionLift:
    v: np.ndarray
    Adual: Dual  # (m, r, r) coefficient arrays
    lift: HorizontalLift
    c_deformed: Dual  # c + h v
    linearity_defect: float  # |B_v - sum v_{l,j} B_{l,j}| on the coefficient level


def channel_lift(adj: AdjustedXiFamily, l: int, j: int, K: int = DEFAULT_K) -> HorizontalLift:
    conn = adj.conn
    X = adj.xitilde[l, j]
    frob = frobenius_infinity(Dual(conn.A, X), conn.m, conn.epsilon, K)
    return b_matrix(frob, conn.A, X)


def isomonodromy_direction(adj: AdjustedXiFamily, v, K: int = DEFAULT_K, check_linearity: bool = True) -> DirectionLift:
    conn = adj.conn
    r, m = conn.r, conn.m
    v = np.asarray(v, complex)
    if v.shape != (r, m):
        raise LambdaViolation("v must have shape (r, m)", shape=v.shape)
    if np.any(v[:, m - 1] != 0):
        raise LambdaViolation("the z^(m-1) column of v moves lambda", column=v[:, m - 1].tolist())
    Xv = adj.xitilde_v(v)
    frob = frobenius_infinity(Dual(conn.A, Xv), m, conn.epsilon, K)
    lift = b_matrix(frob, conn.A, Xv)
    defect = 0.0
    if check_linearity:
        total = np.zeros_like(lift.B)
        for l in range(r):
            for j in range(m - 1):
                if v[l, j] != 0:
                    total += v[l, j] * channel_lift(adj, l, j, K).B
        defect = float(np.max(np.abs(total - lift.B), initial=0.0))
    return DirectionLift(v, Dual(conn.A, Xv), lift, Dual(conn.spec.c, v), defect)


def direction_curvature(d: DirectionLift, grid=None) -> float:
    return curvature_check(d.lift, grid)
