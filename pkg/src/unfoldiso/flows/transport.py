"""Parallel transport of flat sections dY/dz = -(A + h X)/q Y along piecewise smooth paths.

Composition convention: for gamma1 followed by gamma2, M(gamma1 * gamma2) = M(gamma2) M(gamma1),
since M maps the initial value Y(start) = I to Y(end).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra.dual import Dual
from ..algebra.poly import matpoly_eval, unfolding_roots
from ..algebra.series import match_order
from ..errors import PathTooClose, PreconditionError

PATH_MARGIN = 1e-3
PATH_SAMPLES = 4096


@dataclass(frozen=True)
class CirclePath:
    center: complex
    radius: float
    start: float = 0.0  # starting angle
    turns: float = 1.0  # negative: clockwise

    def z(self, s):
        return self.center + self.radius * np.exp(1j * (self.start + 2 * np.pi * self.turns * s))

    def dz(self, s):
        return 2j * np.pi * self.turns * (self.z(s) - self.center)

    def reversed(self) -> "CirclePath":
        return CirclePath(self.center, self.radius, self.start + 2 * np.pi * self.turns, -self.turns)

    def describe(self) -> dict:
        return {"kind": "circle", "center": complex(self.center), "radius": float(self.radius),
                "start_angle": float(self.start), "turns": float(self.turns)}


@dataclass(frozen=True)
class SegmentPath:
    a: complex
    b: complex

    def z(self, s):
        return self.a + (self.b - self.a) * s

    def dz(self, s):
        return (self.b - self.a) + 0 * s

    def reversed(self) -> "SegmentPath":
        return SegmentPath(self.b, self.a)

    def describe(self) -> dict:
        return {"kind": "segment", "a": complex(self.a), "b": complex(self.b)}


@dataclass(frozen=True)
class ConcatPath:
    parts: tuple

    def z(self, s):
        s = np.asarray(s, float)
        k = np.minimum((s * len(self.parts)).astype(int), len(self.parts) - 1)
        out = np.empty(s.shape, complex)
        for i, p in enumerate(self.parts):
            sel = k == i
            out[sel] = p.z(s[sel] * len(self.parts) - i)
        return out

    def reversed(self) -> "ConcatPath":
        return ConcatPath(tuple(p.reversed() for p in reversed(self.parts)))

    def describe(self) -> dict:
        return {"kind": "concat", "parts": [p.describe() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class TransportResult:
    path: object
    M: object  # ndarray or Dual
    error: float
    steps: int

    @property
    def is_dual(self) -> bool:
        return isinstance(self.M, Dual)


def divisor_points(m: int, eps: complex) -> np.ndarray:
    return np.zeros(1, complex) if eps == 0 else unfolding_roots(m, eps)


def path_clearance(path, m: int, eps: complex, n: int = PATH_SAMPLES) -> float:
    pts = path.z(np.linspace(0.0, 1.0, n + 1))
    return float(np.min(np.abs(pts[:, None] - divisor_points(m, eps)[None, :])))


def _generator(A, m, eps, piece):
    """s -> the matrix F(s) with dY/ds = F(s) Y, block lower-triangular for dual coefficients."""
    dual = isinstance(A, Dual)
    A0 = np.asarray(A.re if dual else A, complex)
    A1 = np.asarray(A.eps, complex) if dual else None
    em = complex(eps) ** m
    r = A0.shape[-1]

    def F(s):
        z = piece.z(s)
        c = -piece.dz(s) / (z**m - em)
        F0 = c * matpoly_eval(A0, z)
        if not dual:
            return F0
        out = np.zeros((2 * r, 2 * r), complex)
        out[:r, :r] = out[r:, r:] = F0
        out[r:, :r] = c * matpoly_eval(A1, z)
        return out

    return F


def _rk4_pair(Fs, Y, h):
    """One RK4 step of size h and two of size h/2 from F sampled at s + k h/4, k = 0..4."""
    def step(Fa, Fm, Fb, Y0, hh):
        k1 = Fa @ Y0
        k2 = Fm @ (Y0 + hh / 2 * k1)
        k3 = Fm @ (Y0 + hh / 2 * k2)
        k4 = Fb @ (Y0 + hh * k3)
        return Y0 + hh * (k1 + 2 * k2 + 2 * k3 + k4) / 6

    full = step(Fs[0], Fs[2], Fs[4], Y, h)
    half = step(Fs[2], Fs[3], Fs[4], step(Fs[0], Fs[1], Fs[2], Y, h / 2), h / 2)
    return full, half


def integrate_linear(F, Y0, tol: float = 1e-11, h0: float = 1.0 / 64, max_steps: int = 200000):
    """Y' = F(s) Y on [0, 1]; step doubling with local error <= tol * h * max(1, |Y|)."""
    Y = np.array(Y0, complex)
    s, h = 0.0, h0
    err_sum, steps = 0.0, 0
    Fs0 = F(0.0)
    while s < 1.0 and steps < max_steps:
        h = min(h, 1.0 - s)
        Fs = [Fs0] + [F(s + k * h / 4) for k in range(1, 5)]
        full, half = _rk4_pair(Fs, Y, h)
        err = float(np.max(np.abs(half - full))) / 15
        bound = tol * h * max(1.0, float(np.max(np.abs(half))))
        steps += 1
        if err <= bound or h < 1e-14:
            Y = half + (half - full) / 15
            s += h
            err_sum += err
            Fs0 = Fs[4]
            h *= min(2.0, 0.9 * (bound / err) ** 0.2) if err > 0 else 2.0
        else:
            h *= max(0.2, 0.9 * (bound / err) ** 0.2)
    if s < 1.0:
        raise PreconditionError("transport step budget exhausted", s=s)
    return Y, err_sum, steps


def transport(A, m: int, eps: complex, path, tol: float = 1e-11, margin: float = PATH_MARGIN) -> TransportResult:
    """Transport matrix along path for coefficients A (ndarray (d, r, r) or Dual of such arrays)."""
    clearance = path_clearance(path, m, eps)
    if clearance < margin:
        raise PathTooClose("path passes too close to the divisor", clearance=clearance, margin=margin)
    dual = isinstance(A, Dual)
    r = (A.re if dual else A).shape[-1]
    pieces = path.parts if isinstance(path, ConcatPath) else (path,)
    Y = np.vstack([np.eye(r), np.zeros((r, r))]) if dual else np.eye(r, dtype=complex)
    err, steps = 0.0, 0
    for piece in pieces:
        Y, e, n = integrate_linear(_generator(A, m, eps, piece), Y, tol)
        err += e
        steps += n
    M = Dual(Y[:r], Y[r:]) if dual else Y
    return TransportResult(path, M, err, steps)


def reversal_defect(A, m: int, eps: complex, path, tol: float = 1e-11) -> dict:
    """|M(path) M(reversed) - I| against the composed error estimate."""
    fw = transport(A, m, eps, path, tol)
    bw = transport(A, m, eps, path.reversed(), tol)
    if fw.is_dual:
        P = fw.M @ bw.M
        defect = max(float(np.max(np.abs(P.re - np.eye(P.re.shape[0])))), float(np.max(np.abs(P.eps))))
        n1, n2 = _dual_norm(fw.M), _dual_norm(bw.M)
    else:
        defect = float(np.max(np.abs(fw.M @ bw.M - np.eye(fw.M.shape[0]))))
        n1, n2 = float(np.max(np.abs(fw.M))), float(np.max(np.abs(bw.M)))
    r = fw.M.re.shape[0] if fw.is_dual else fw.M.shape[0]
    estimate = r * (n1 * bw.error + n2 * fw.error)
    return {"defect": defect, "estimate": estimate, "ok": defect <= 2 * estimate + 1e-14}


def _dual_norm(M: Dual) -> float:
    return max(float(np.max(np.abs(M.re))), float(np.max(np.abs(M.eps))))


# loops


def big_loop_radius(m: int, eps: complex, rho1: float = 0.0) -> float:
    return max(2 * abs(eps), 0.5, rho1)


def big_loop(m: int, eps: complex, rho1: float = 0.0) -> CirclePath:
    return CirclePath(0j, big_loop_radius(m, eps, rho1))


def local_loops(m: int, eps: complex) -> list[CirclePath]:
    if eps == 0:
        raise PreconditionError("local loops need eps != 0")
    rad = abs(eps) * np.sin(np.pi / m) / 2 if m > 1 else 0.5 * abs(eps)
    return [CirclePath(complex(p), rad) for p in unfolding_roots(m, eps)]


def rank_one_monodromy(lam: complex) -> complex:
    """Closed form for r = 1, A = lam z^(m-1): (z^m - eps^m)^(-lam/m) winds m times."""
    return complex(np.exp(-2j * np.pi * lam))


def local_monodromy_report(conn, tol: float = 1e-11) -> dict:
    """Eigenvalues of the local monodromies against exp(-2 pi i nu_k(p)/q'(p))."""
    m, eps = conn.m, conn.epsilon
    nu = conn.spec.nu_polys()  # (r, m) ascending coefficients
    worst = 0.0
    points = []
    for loop in local_loops(m, eps):
        p = loop.center
        res = transport(conn.A, m, eps, loop, tol)
        ev = np.linalg.eigvals(res.M)
        expo = np.polynomial.polynomial.polyval(p, nu.T) / (m * p ** (m - 1))
        pred = np.exp(-2j * np.pi * expo)
        perm, _, _ = match_order(ev, pred)
        # relative to the eigenvalue size; tiny eigenvalues are compared absolutely
        w = float(np.max(np.abs(ev[perm] - pred) / np.maximum(1.0, np.abs(pred))))
        worst = max(worst, w)
        points.append({"point": complex(p), "eigenvalues": ev[perm], "predicted": pred,
                       "exponents": expo, "defect": w, "error": res.error})
    return {"max_defect": worst, "points": points}


def monodromy_invariance_check(direction, radius: float | None = None, tol: float = 1e-11) -> dict:
    """Dual transport of A + h Xi~_v around a loop enclosing the divisor.

    The h-parts of Tr(Mon(h)^k), k = 1..r, vanish for an isomonodromy direction. At the base
    point z0 = radius the lift gives M1 = M0 B(z0) - B(z0) M0.
    """
    lift = direction.lift
    m, eps = lift.m, lift.eps
    rad = radius if radius is not None else big_loop_radius(m, eps, lift.rho1)
    loop = CirclePath(0j, rad)
    res = transport(direction.Adual, m, eps, loop, tol)
    M0, M1 = res.M.re, res.M.eps
    r = M0.shape[0]
    hparts = []
    P = np.eye(r, dtype=complex)
    for k in range(1, r + 1):
        # h-part of Tr((M0 + h M1)^k) = k Tr(M0^(k-1) M1)
        hparts.append(complex(k * np.trace(P @ M1)))
        P = P @ M0
    out = {"radius": rad, "M0": M0, "M1": M1, "trace_h_parts": hparts,
           "max_trace_h": float(max(abs(x) for x in hparts)), "error": res.error, "commutator_defect": None}
    n0, n1 = float(np.linalg.norm(M0, 2)), float(np.linalg.norm(M1, 2))
    out["trace_h_scale"] = max(k * n0 ** (k - 1) * n1 for k in range(1, r + 1))
    if lift.rho1 <= rad <= lift.rho2:
        B = lift.B_at(complex(rad))
        out["commutator_defect"] = float(np.max(np.abs(M1 - (M0 @ B - B @ M0))))
    return out
