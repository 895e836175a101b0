"""Diagonal-limit diagnostic for fundamental solutions along a converging flow.

Along z(t) with dz/dt = e^{i theta} q(z), flat sections obey dW/dt = -e^{i theta} (D_nu + V) W in the
frame P diagonalizing A(rho), with V(rho) = 0. Writing W = Phi exp(-int e^{i theta} D_nu dt), the
entries of Phi satisfy a Levinson-type integral equation: entries whose kernel decays forward are
integrated from the start of the orbit, the remaining ones (diagonal included) are pinned at its
end. The result is a genuine flat section whose Phi should approach a diagonal matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npp

from ..algebra.poly import matpoly_eval
from ..algebra.series import match_order
from ..errors import NotConverged, OrderingViolated
from .field import FlowField
from .integrate import Trajectory

PROBE_DISTANCE = 1e-4
CONSISTENT_RATIO = 1e-3


@dataclass(frozen=True, eq=False)
class AsymptoticReport:
    order: np.ndarray  # indices k sorted by Re(e^{i theta} nu_k(rho))
    keys: np.ndarray
    Phi: np.ndarray  # (n_samples, r, r)
    limit: np.ndarray  # diagonal estimate at the last sample
    ratio_final: float
    ratio_probe: float
    probe_index: int
    iterations: int
    picard_change: float

    @property
    def consistent(self) -> bool:
        return self.ratio_final < CONSISTENT_RATIO


def offdiag_ratio(X: np.ndarray) -> float:
    d = np.abs(np.diag(X))
    off = np.abs(X - np.diag(np.diag(X)))
    if d.min() == 0:
        return np.inf
    return float(off.max() / d.min())


def exponent_integrals(nu: np.ndarray, m: int, eps: complex, z: np.ndarray) -> np.ndarray:
    """I_k(z_n) = int nu_k/q dz along the polyline through the samples, I_k(z_0) = 0; shape (n, r)."""
    r = nu.shape[0]
    za, zb = z[:-1], z[1:]
    inc = np.zeros((len(za), r), complex)
    if eps == 0:
        for n in range(nu.shape[1]):
            p = n - m + 1
            if p == 0:
                inc += np.log(zb / za)[:, None] * nu[:, n][None, :]
            else:
                inc += ((zb**p - za**p) / p)[:, None] * nu[:, n][None, :]
    else:
        from ..algebra.poly import unfolding_roots

        for rho in unfolding_roots(m, eps):
            c = npp.polyval(rho, nu.T) / (m * rho ** (m - 1))
            inc += np.log((zb - rho) / (za - rho))[:, None] * c[None, :]
    return np.vstack([np.zeros((1, r), complex), np.cumsum(inc, axis=0)])


def _phi1(x):
    """(e^x - 1)/x."""
    x = np.asarray(x, complex)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    return np.where(small, 1 + x / 2 + x**2 / 6, np.expm1(xs) / xs)


def _phi2(x):
    """(e^x - 1 - x)/x^2."""
    x = np.asarray(x, complex)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    return np.where(small, 0.5 + x / 6 + x**2 / 24, (np.expm1(xs) - xs) / xs**2)


def refine_path(z: np.ndarray, nu: np.ndarray, m: int, eps: complex, max_dI: float = 0.25, max_sub: int = 8):
    """Subdivide the polyline so exponent integrals move by at most max_dI per piece.

    Returns the refined points and the indices of the original samples among them.
    """
    I = exponent_integrals(nu, m, eps, z)
    jumps = np.abs(np.diff(I, axis=0)).max(axis=1)
    pieces = np.clip(np.ceil(jumps / max_dI).astype(int), 1, max_sub)
    out, keep = [z[:1]], [0]
    for a, b, k in zip(z[:-1], z[1:], pieces, strict=True):
        out.append(a + (b - a) * np.arange(1, k + 1) / k)
        keep.append(keep[-1] + k)
    return np.concatenate(out), np.array(keep)


def asymptotic_limit(conn, traj: Trajectory, field: FlowField, tol: float = 1e-13, max_iter: int = 200) -> AsymptoticReport:
    if not traj.converged:
        raise NotConverged("trajectory did not converge", status=traj.status)
    rho = traj.target
    m, eps = conn.m, conn.epsilon
    nu = conn.spec.nu_polys()
    nu_rho = npp.polyval(rho, nu.T)
    keys = np.real(np.exp(1j * field.theta) * nu_rho)
    order = np.argsort(keys)
    ks = keys[order]
    if np.min(np.diff(ks), initial=np.inf) < 1e-9 * max(1.0, np.max(np.abs(ks))):
        raise OrderingViolated("Re(e^{i theta} nu_k(rho)) not pairwise distinct", keys=keys.tolist())
    nu = nu[order]
    nu_rho = nu_rho[order]
    ev, vecs = np.linalg.eig(matpoly_eval(conn.A, rho))
    perm, _, _ = match_order(ev, nu_rho)
    P = vecs[:, perm]
    Pinv = np.linalg.inv(P)

    z, keep = refine_path(traj.z, nu, m, eps)
    n, r = len(z), conn.r
    Az = np.array([Pinv @ matpoly_eval(conn.A, zz) @ P for zz in z])
    nuz = np.array([npp.polyval(zz, nu.T) for zz in z])
    V = (Az - np.array([np.diag(x) for x in nuz])) / (z**m - complex(eps) ** m)[:, None, None]
    I = exponent_integrals(nu, m, eps, z)
    D = I[:, None, :] - I[:, :, None]  # D[n, a, b] = I_b - I_a
    dD = np.diff(D, axis=0)
    h = np.diff(z)  # the equation is written in dz; dt = dz / (e^{i theta} q)
    free = keys[order][:, None] > keys[order][None, :]
    pinned = ~free
    # exponential integrator with the forcing linear on each step; forward for free entries,
    # backward for pinned ones, so every kernel contracts
    x = np.where(free, dD, -dD)
    fwd = np.exp(np.where(free, dD, 0))
    bwd = np.exp(np.where(pinned, -dD, 0))
    p1, p2 = _phi1(x), _phi2(x)
    w_near = h[:, None, None] * np.where(free, p1 - p2, p2)
    w_far = h[:, None, None] * np.where(free, p2, p1 - p2)

    Phi = np.broadcast_to(np.eye(r, dtype=complex), (n, r, r)).copy()
    change, it = np.inf, 0
    while change > tol * max(1.0, np.abs(Phi).max()) and it < max_iter:
        it += 1
        g = -np.einsum("nij,njk->nik", V, Phi)
        J = np.zeros((n, r, r), complex)
        for i in range(n - 1):
            J[i + 1] = np.where(free, fwd[i] * J[i] + w_near[i] * g[i] + w_far[i] * g[i + 1], 0)
        for i in range(n - 2, -1, -1):
            J[i] = np.where(pinned, bwd[i] * J[i + 1] - w_far[i] * g[i] - w_near[i] * g[i + 1], J[i])
        new = np.eye(r) + J
        change = float(np.abs(new - Phi).max())
        Phi = new
    Phi = Phi[keep]
    dist = np.abs(traj.z - rho)
    probe = int(np.argmin(np.abs(np.log(np.maximum(dist, 1e-300) / PROBE_DISTANCE))))
    limit = np.diag(np.diag(Phi[-1]))
    return AsymptoticReport(order, keys, Phi, limit, offdiag_ratio(Phi[-1]), offdiag_ratio(Phi[probe]), probe, it, change)


def flat_section_residual(conn, traj: Trajectory, rep: AsymptoticReport, upto: int | None = None,
                          tol: float = 1e-11, spread: float = 8.0) -> dict:
    """Relative mismatch between P Phi_n and the transport of P Phi_0 rescaled by exp(I_n).

    By default the comparison sample is the last one before the probe where the exponential
    factors spread by at most e^spread, so recessive columns are still resolved in double precision.
    """
    from .transport import ConcatPath, SegmentPath, transport

    nu = conn.spec.nu_polys()[rep.order]
    I = exponent_integrals(nu, conn.m, conn.epsilon, traj.z[: rep.probe_index + 1])
    if upto is None:
        spreads = np.ptp(np.real(I), axis=1)
        ok = np.nonzero(spreads <= spread)[0]
        upto = int(ok[-1])
    if upto == 0:
        return {"sample": 0, "residual": 0.0}
    z = traj.z[: upto + 1]
    rho = traj.target
    ev, vecs = np.linalg.eig(matpoly_eval(conn.A, rho))
    perm, _, _ = match_order(ev, npp.polyval(rho, nu.T))
    P = vecs[:, perm]
    path = ConcatPath(tuple(SegmentPath(a, b) for a, b in zip(z[:-1], z[1:], strict=True)))
    margin = 0.5 * float(np.min(np.abs(z - rho)))
    M = transport(conn.A, conn.m, conn.epsilon, path, tol, margin=margin).M
    lhs = M @ P @ rep.Phi[0] @ np.diag(np.exp(I[upto]))
    rhs = P @ rep.Phi[upto]
    res = np.abs(lhs - rhs).max(axis=0) / np.abs(rhs).max(axis=0)
    return {"sample": upto, "residual": float(res.max())}
