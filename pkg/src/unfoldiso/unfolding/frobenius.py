"""Frobenius solution at z = infinity over the dual numbers, the B-matrix, curvature check.

Flat sections satisfy dY/dz = -(A + h Xi~)/q Y. In w = 1/z this becomes
w dY/dw = M(w) Y with M(w) = sum_i A_i w^(m-1-i) / (1 - eps^m w^m), and the
fundamental solution is Y = U(w) w^Lambda with Lambda = M(0) = A_{m-1}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra.dual import Dual
from ..algebra.poly import matpoly_eval
from ..algebra.series import ser_inv, ser_mul
from ..errors import OutsideDomain, PreconditionError, Resonance
from .adjust import ad_matrix

DEFAULT_K = 24


def infinity_chart_series(A: np.ndarray, m: int, eps: complex, K: int) -> np.ndarray:
    """Coefficients M_0..M_K of sum_i A_i w^(m-1-i) / (1 - eps^m w^m)."""
    r = A.shape[1]
    a = np.zeros((K + 1, r, r), complex)
    for i in range(min(m, A.shape[0])):
        n = m - 1 - i
        if n <= K:
            a[n] = A[i]
    out = a.copy()
    e = complex(eps) ** m
    if e != 0:
        p = 1
        while p * m <= K:
            out[p * m :] += e**p * a[: K + 1 - p * m]
            p += 1
    return out


@dataclass(frozen=True, eq=False)
class FrobeniusSolution:
    Lambda: np.ndarray
    U: Dual  # arrays of shape (K+1, r, r)
    M: Dual
    K: int
    m: int
    eps: complex
    branch: str = "principal log, w^Lambda = exp(Lambda log w)"

    def residual(self) -> tuple[float, float]:
        """Coefficient residual of k U_k + U_k Lambda - sum_i M_i U_(k-i), per h-component."""
        worst = [0.0, 0.0]
        for part in (0, 1):
            for k in range(self.K + 1):
                Uk = self.U.re[k] if part == 0 else self.U.eps[k]
                acc = k * Uk + Uk @ self.Lambda
                for i in range(k + 1):
                    if part == 0:
                        acc = acc - self.M.re[i] @ self.U.re[k - i]
                    else:
                        acc = acc - self.M.re[i] @ self.U.eps[k - i] - self.M.eps[i] @ self.U.re[k - i]
                worst[part] = max(worst[part], float(np.max(np.abs(acc))))
        return worst[0], worst[1]


def frobenius_infinity(Adual: Dual, m: int, eps: complex, K: int = DEFAULT_K, htol: float = 1e-10) -> FrobeniusSolution:
    A0 = np.asarray(Adual.re, complex)
    A1 = np.asarray(Adual.eps, complex)
    r = A0.shape[1]
    M = Dual(infinity_chart_series(A0, m, eps, K), infinity_chart_series(A1, m, eps, K))
    Lam = M.re[0]
    if np.max(np.abs(M.eps[0])) > htol * max(1.0, np.max(np.abs(A1))):
        raise PreconditionError("residue at infinity depends on h", defect=float(np.max(np.abs(M.eps[0]))))
    ev = np.linalg.eigvals(Lam)
    for a in range(r):
        for b in range(r):
            d = ev[a] - ev[b]
            k = int(round(d.real))
            if 1 <= k <= K and abs(d - k) < 1e-8:
                raise Resonance("eigenvalue difference of Lambda is a positive integer", k=k, pair=[a, b])
    adL = ad_matrix(Lam)
    Ure = np.zeros((K + 1, r, r), complex)
    Ueps = np.zeros((K + 1, r, r), complex)
    Ure[0] = np.eye(r)
    eye2 = np.eye(r * r)
    for k in range(1, K + 1):
        rhs0 = sum(M.re[i] @ Ure[k - i] for i in range(1, k + 1))
        rhs1 = sum(M.re[i] @ Ueps[k - i] + M.eps[i] @ Ure[k - i] for i in range(1, k + 1))
        op = k * eye2 - adL
        sol = np.linalg.solve(op, np.stack([rhs0.ravel(), rhs1.ravel()], axis=1))
        Ure[k] = sol[:, 0].reshape(r, r)
        Ueps[k] = sol[:, 1].reshape(r, r)
    return FrobeniusSolution(Lam, Dual(Ure, Ueps), M, K, m, complex(eps))


@dataclass(frozen=True, eq=False)
class HorizontalLift:
    """(A + h Xi~) dz/q + B dh with B(z) = sum_k B[k] z^-k on |z| in [rho1, rho2]."""

    A: np.ndarray
    xitilde: np.ndarray
    B: np.ndarray  # (K+1, r, r) coefficients in w = 1/z
    m: int
    eps: complex
    rho1: float
    rho2: float
    gauge: str = "frobenius-infinity: U_0 = I, zero h-part"

    def B_at(self, z) -> np.ndarray:
        return matpoly_eval(self.B, 1.0 / z)

    def dB_at(self, z) -> np.ndarray:
        w = 1.0 / z
        k = np.arange(self.B.shape[0]).reshape(-1, 1, 1)
        # d/dz sum B_k z^-k = -sum k B_k z^-(k+1)
        return -matpoly_eval(k * self.B, w) * w


def b_matrix(frob: FrobeniusSolution, A: np.ndarray, xitilde: np.ndarray, tail_tol: float = 1e-13) -> HorizontalLift:
    """B = -U^1 (U^0)^-1 as a w-series; the w^Lambda factors cancel."""
    K = frob.K
    inv0 = ser_inv(frob.U.re, K + 1)
    B = -ser_mul(frob.U.eps, inv0, K + 1)
    rho1 = validity_radius(B, frob.eps, tail_tol)
    return HorizontalLift(np.asarray(A, complex), np.asarray(xitilde, complex), B, frob.m, frob.eps, rho1, 100.0 * rho1)


def validity_radius(B: np.ndarray, eps: complex, tail_tol: float = 1e-13) -> float:
    """rho1 = max(2 max(|eps|, root-test radius), radius where the last terms are negligible)."""
    K = B.shape[0] - 1
    norms = np.array([np.max(np.abs(Bk)) for Bk in B])
    scale = max(1.0, float(norms.max()))
    ks = np.arange(max(1, K // 2), K + 1)
    est = max([norms[k] ** (1.0 / k) for k in ks if norms[k] > 0] or [0.0])
    rho = 2.0 * max(abs(eps), est, 1e-3)
    tail = ks[-4:] if len(ks) >= 4 else ks
    while True:
        t = sum(norms[k] * (1 + k) * rho ** (-k) for k in tail)
        if t <= tail_tol * scale or rho > 1e6:
            break
        rho *= 1.1
    return float(rho)


def annulus_grid(lift: HorizontalLift, n: int = 32, radii=None) -> np.ndarray:
    radii = radii if radii is not None else (lift.rho1, 2.0 * lift.rho1)
    per = n // len(radii)
    pts = []
    for i, rad in enumerate(radii):
        ang = 2 * np.pi * (np.arange(per) + 0.5 + 0.25 * i) / per
        pts.extend(rad * np.exp(1j * ang))
    return np.array(pts)


def curvature_residuals(lift: HorizontalLift, grid=None) -> dict:
    """Pointwise curvature of (A + h Xi~) dz/q + B dh.

    The dz^dh coefficient is taken in Omega^1 of C[h]/(h^2), where h dh = 0,
    so only its h^0 part d_z B - Xi~/q + [A, B]/q survives.
    """
    grid = annulus_grid(lift) if grid is None else np.asarray(grid, complex)
    worst = 0.0
    scale = 0.0
    for z in grid:
        if abs(z) < lift.rho1 * (1 - 1e-12) or abs(z) > lift.rho2:
            raise OutsideDomain("grid point outside the validity annulus", z=[z.real, z.imag], rho1=lift.rho1)
        q = z**lift.m - lift.eps**lift.m
        A = matpoly_eval(lift.A, z)
        X = matpoly_eval(lift.xitilde, z)
        B = lift.B_at(z)
        res = lift.dB_at(z) - X / q + (A @ B - B @ A) / q
        worst = max(worst, float(np.max(np.abs(res))))
        scale = max(scale, float(np.max(np.abs(X / q))))
    return {"h0": worst, "h1": 0.0, "scale": scale, "points": len(grid)}


def curvature_check(lift: HorizontalLift, grid=None) -> float:
    r = curvature_residuals(lift, grid)
    return max(r["h0"], r["h1"])
