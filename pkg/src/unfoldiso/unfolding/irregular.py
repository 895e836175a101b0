"""The eps = 0 stratum: formal diagonalizing gauge and the local horizontal lift B'_0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra.poly import matpoly_deriv, pad_to
from ..algebra.series import Laurent, formal_diagonalize, ser_inv, ser_mul
from ..connection import UnfoldedConnection
from ..errors import GaugeUnavailable, InsufficientOrder, LogTerm, PreconditionError, ResonantLeading
from .adjust import AdjustedXiFamily, fold_commutator


@dataclass(frozen=True, eq=False)
class DiagonalGauge:
    P: np.ndarray  # (K, r, r)
    D: np.ndarray  # (K, r) diagonal of P^-1 A P + z^m P^-1 P'
    K: int
    offdiag_residual: float  # relative to the per-order operand magnitude
    exponent_defect: float  # max |D mod z^m - nu(mu_k)|


def gauge_diagonalize_eps0(conn: UnfoldedConnection, K: int) -> DiagonalGauge:
    spec = conn.spec
    m, r = spec.m, spec.r
    if not spec.eps_zero:
        raise PreconditionError("the diagonalizing gauge is built on the eps = 0 fibre only")
    if K < m:
        raise InsufficientOrder("order K must be at least m", K=K, m=m)
    nu = spec.nu_polys()
    P, D = formal_diagonalize(conn.A, m, K, leading=nu[:, 0])
    # verify: P^-1 A P + z^m P^-1 P' is diagonal through z^(K-1)
    Pinv = ser_inv(P, K)
    E = ser_mul(Pinv, ser_mul(pad_to(conn.A, K), P, K), K)
    dP = pad_to(matpoly_deriv(P), K)
    zmdP = np.zeros_like(E)
    zmdP[m:] = ser_mul(Pinv, dP, K)[: K - m]
    E = E + zmdP
    off = E.copy()
    idx = np.arange(r)
    off[:, idx, idx] = 0
    nP = np.array([np.max(np.abs(x)) for x in P])
    nPi = np.array([np.max(np.abs(x)) for x in Pinv])
    nA = np.array([np.max(np.abs(x)) for x in pad_to(conn.A, K)])
    mag = np.maximum(1.0, np.convolve(np.convolve(nPi, nA)[:K], nP)[:K])
    mag = np.maximum(mag, np.concatenate([np.zeros(m), np.convolve(nPi, np.arange(1, K + 1) * np.append(nP[1:], 0))[: K - m]]))
    offn = np.array([np.max(np.abs(x)) for x in off])
    dn = np.max(np.abs(E[:, idx, idx] - D), axis=1)
    resid = float(np.max(np.maximum(offn, dn) / mag))
    defect = float(np.max(np.abs(D[:m].T - nu)))
    return DiagonalGauge(P, D, K, resid, defect)


def _mag(series) -> np.ndarray:
    return np.array([np.max(np.abs(x)) for x in series])


@dataclass(frozen=True, eq=False)
class IrregularLift:
    l: int
    j: int
    K: int
    B0: Laurent
    Bprime: Laurent
    Rprime: np.ndarray  # Taylor coefficients of R'(z)
    report: dict


def _scalar_laurent_monomial(r, coef, power, n):
    C = np.zeros((n, r, r), complex)
    C[0] = coef
    return Laurent(C, power)


def irregular_lift_eps0(conn: UnfoldedConnection, adj: AdjustedXiFamily, l: int, j: int, K: int | None = None) -> IrregularLift:
    """B'_0 = B_0 - R'(z) for the (l, j) direction at eps = 0, with its integrability check.

    B_0 = P diag(mu_k^l z^(j-m+1)/(j-m+1)) P^-1. R' is the power series, computed
    in the diagonal frame, for which A_v - z^m R'' - [A, R'] equals the
    polynomial Xi~_0 (A_v = z^m dB_0/dz + [A, B_0]). The check evaluates
    dB'_0/dz - (Xi~_0 - [A, B'_0])/z^m through z^(K-m).
    """
    spec = conn.spec
    m, r = spec.m, spec.r
    K = 4 * m if K is None else K
    if not spec.eps_zero:
        raise PreconditionError("irregular lift requires eps = 0")
    if j == m - 1:
        raise LogTerm("mu^l z^(m-1) dz/z^m has a residue; no single-valued primitive", l=l, j=j)
    if not (0 <= j < m - 1 and 0 <= l < r):
        raise PreconditionError("index out of range", l=l, j=j)
    Kp = K + m
    try:
        gauge = gauge_diagonalize_eps0(conn, Kp)
    except ResonantLeading as exc:
        raise GaugeUnavailable("diagonalizing gauge unavailable", **exc.detail) from exc
    P, D = gauge.P, gauge.D
    Pinv = ser_inv(P, Kp)
    mul = spec.mu**l
    a = j - m + 1  # exponent of the primitive, negative
    C = ser_mul(P * mul[None, None, :], Pinv, Kp) / a
    B0 = Laurent(C, a)
    A_ser = Laurent(pad_to(conn.A, Kp), 0)
    # A_v two ways: from its definition and from the gauge
    Av_def = (B0.deriv().shift(m) + A_ser.commutator(B0)).truncate(Kp - 1 + a)
    Av_gauge = Laurent(C * a, j)
    nP, nPi = _mag(P), _mag(Pinv)
    magB = np.max(np.abs(mul)) / abs(a) * np.convolve(nP, nPi)[:Kp]
    nC = {a + k: float(v) for k, v in enumerate(magB)}
    av_defect = max(
        float(np.max(np.abs(Av_def.coeff(p) - Av_gauge._get(p))))
        / max(1.0, abs(p) * nC.get(p - m + 1, 0.0), nC.get(p - j + a, 0.0) * abs(a))
        for p in range(Av_def.low, min(Av_def.high, Av_gauge.high) + 1)
    )
    # G = diag(mu^l z^j) - P^-1 Xi~_0 P, all in the diagonal frame
    Xt = adj.xitilde[l, j]
    top = float(np.max(np.abs(Xt[m - 1])))
    Mx = ser_mul(Pinv, ser_mul(pad_to(Xt, Kp), P, Kp), Kp)
    G = -Mx
    G[j] += np.diag(mul)
    S = np.zeros((Kp, r, r), complex)
    off = ~np.eye(r, dtype=bool)
    den = np.subtract.outer(D[0], D[0])
    idx = np.arange(r)
    diag_constraint = 0.0
    for k in range(Kp):
        rhs = G[k].copy()
        for i in range(1, k + 1):
            rhs -= D[i][:, None] * S[k - i] - S[k - i] * D[i][None, :]
        if k - m + 1 >= 1:
            rhs_off = rhs - (k - m + 1) * S[k - m + 1]
            S[k - m + 1, idx, idx] = rhs[idx, idx] / (k - m + 1)
        else:
            rhs_off = rhs
            diag_constraint = max(diag_constraint, float(np.max(np.abs(rhs[idx, idx]))))
        if r > 1:
            S[k][off] = rhs_off[off] / den[off]
    nRp = Kp - m + 1  # S_n complete for n <= Kp - m
    Rp = ser_mul(P[:nRp], ser_mul(S[:nRp], Pinv[:nRp], nRp), nRp)
    Bprime = B0 - Laurent(Rp, 0)
    lhs = Bprime.deriv()
    rhs = (Laurent(pad_to(Xt, Kp), 0) - A_ser.commutator(Bprime)).shift(-m)
    hi = K - m
    # per-order operand magnitude: rounding in B_0 and R' scales with |P_a||P^-1_b|
    nS = _mag(S)
    magR = np.convolve(np.convolve(nP, nS)[:nRp], nPi)[:nRp]
    nB0 = nC
    nR = {k: float(v) for k, v in enumerate(magR)}
    nA = [float(np.max(np.abs(Ak))) for Ak in conn.A]
    resid = 0.0
    for p in range(min(lhs.low, rhs.low), hi + 1):
        mag = max(1.0, abs(p + 1) * max(nB0.get(p + 1, 0.0), nR.get(p + 1, 0.0)))
        for i, a_i in enumerate(nA):
            mag = max(mag, a_i * max(nB0.get(p + m - i, 0.0), nR.get(p + m - i, 0.0)))
        err = float(np.max(np.abs(lhs._get(p) - rhs._get(p))))
        resid = max(resid, err / mag)
    # R'_{<m} agrees with the adjusting data at eps = 0 up to the kernel of the truncated commutator map
    gap = Rp[:m] - adj.R[l, j]
    kernel_gap = float(np.max(np.abs(fold_commutator(conn.A, gap, spec.ring.modulus))))
    report = {
        "gauge_residual": gauge.offdiag_residual,
        "exponent_defect": gauge.exponent_defect,
        "Av_consistency": av_defect,
        "xitilde_top_coefficient": top,
        "diagonal_constraint": diag_constraint,
        "identity_residual": resid,
        "through_order": hi,
        "kernel_gap": kernel_gap,
    }
    return IrregularLift(l, j, K, B0, Bprime, Rp, report)
