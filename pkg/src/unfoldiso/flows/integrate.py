"""Adaptive RK4 integration of dz/dt = e^{i theta}(z^m - eps^m) and the convergence-rate certificate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NotConverged, PreconditionError
from .field import FlowField

CONVERGED, LEFT, BUDGET = "converged", "left-domain", "budget"
ROUND = 64 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    z: np.ndarray
    status: str
    j: int | None  # index of the root reached (1..m), None unless converged
    target: complex | None
    steps: int

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def z_end(self) -> complex:
        return complex(self.z[-1])

    def distance(self, root: complex | None = None) -> np.ndarray:
        root = self.target if root is None else root
        return np.abs(self.z - root)


def _rk4(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def integrate_flow(
    z0: complex,
    field: FlowField,
    dt: float = 1e-2,
    Tmax: float = np.inf,
    tol: float = 1e-10,
    stop_tol: float = 1e-8,
    max_steps: int = 50000,
    radius: float = 1.0,
) -> Trajectory:
    """RK4 with step doubling; the local error is kept below tol times the step's displacement.

    Stops when the orbit is within stop_tol of a zero, when |z| >= radius, or at Tmax/max_steps.
    """
    z = complex(z0)
    roots = field.zeros
    if np.min(np.abs(roots - z)) <= ROUND * max(1.0, abs(z)):
        raise PreconditionError("starting point is a zero of the field", z0=[z.real, z.imag])
    ts, zs = [0.0], [z]
    t, h = 0.0, float(dt)
    status = BUDGET
    steps = 0
    while steps < max_steps and t < Tmax:
        steps += 1
        full = _rk4(field, z, h)
        half = _rk4(field, _rk4(field, z, h / 2), h / 2)
        err = abs(half - full) / 15
        # relative to the displacement, floored at rounding level so steps never stall next to a zero
        scale = max(tol * abs(half - z), ROUND * abs(z), 1e-300)
        if err <= scale or h < 1e-14 * max(1.0, t):
            t += h
            z = half + (half - full) / 15
            ts.append(t)
            zs.append(z)
            if abs(z) >= radius:
                status = LEFT
                break
            if np.min(np.abs(roots - z)) <= stop_tol:
                status = CONVERGED
                break
            grow = 2.0 if err == 0 else min(2.0, 0.9 * (scale / err) ** 0.2)
            h *= max(grow, 1.0)
        else:
            h *= max(0.2, 0.9 * (scale / err) ** 0.2)
    j = target = None
    if status == CONVERGED:
        k = int(np.argmin(np.abs(roots - z)))
        target = complex(roots[k])
        if field.epsilon == 0:
            j = field.m
        else:
            j = _root_index(field, target)
    return Trajectory(np.array(ts), np.array(zs), status, j, target, steps)


def _root_index(field: FlowField, root: complex) -> int:
    idx = [abs(field.root(j) - root) for j in range(1, field.m + 1)]
    return int(np.argmin(idx)) + 1


def rate_slope(traj: Trajectory, m: int, tail: float = 0.5) -> float:
    """Affine least-squares slope of 1/|z - target|^{2m} against t on the last part of the orbit."""
    if not traj.converged or len(traj.t) < 8:
        raise NotConverged("need a converged trajectory with at least 8 samples", status=traj.status, n=len(traj.t))
    d = traj.distance()
    n = len(d)
    sel = slice(int(n * (1 - tail)), n)
    t = traj.t[sel]
    y = d[sel] ** (-2.0 * m)
    keep = np.isfinite(y)
    t, y = t[keep], y[keep]
    if len(t) < 4:
        raise NotConverged("too few usable tail samples", n=len(t))
    # scale both axes to keep the normal equations well conditioned
    ts, ys = max(np.ptp(t), 1e-300), max(np.max(np.abs(y)), 1e-300)
    slope = np.polyfit((t - t[0]) / ts, y / ys, 1)[0]
    return float(slope * ys / ts)


def convergence_rate_check(traj: Trajectory, field: FlowField, j: int | None = None, factor: float = 0.9) -> bool:
    if not traj.converged:
        raise NotConverged("trajectory did not converge", status=traj.status)
    if j is not None and traj.j != j:
        raise NotConverged("trajectory converged to a different root", expected=j, got=traj.j)
    m = field.m
    return rate_slope(traj, m) >= factor * m / 4**m
