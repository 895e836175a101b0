"""The matrices Xi_{l,j}: z^j psi(A)^l folded back to z-degree < m."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra.poly import matpoly_mul, matpoly_scalar_mul, shift_up
from ..algebra.quotient import QuotMatrix, reduce_mod
from ..algebra.residues import residue_at_infinity
from ..connection import UnfoldedConnection, interpolation_psi


@dataclass(frozen=True, eq=False)
class XiFamily:
    conn: UnfoldedConnection
    psi: np.ndarray  # (r, m): T^i coefficient of psi as a z-polynomial of degree < m
    xi: np.ndarray  # (r, m, m, r, r): xi[l, j] is the (m, r, r) coefficient array of Xi_{l,j}
    raw: tuple  # raw[l][j]: unfolded polynomial z^j psi(A)^l before folding

    @property
    def r(self) -> int:
        return self.conn.r

    @property
    def m(self) -> int:
        return self.conn.m

    def reconstruction_defect(self) -> float:
        c = self.conn.spec.c
        total = np.einsum("lj,ljkab->kab", c, self.xi)
        return float(np.max(np.abs(total - self.conn.A)))

    def trace_residues(self) -> np.ndarray:
        """res_inf Tr(Xi_{l,j} dz/q), shape (r, m); zero for j <= m-2."""
        eps = self.conn.epsilon
        out = np.zeros((self.r, self.m), complex)
        for l in range(self.r):
            for j in range(self.m):
                tr = np.trace(self.xi[l, j], axis1=1, axis2=2)
                out[l, j] = residue_at_infinity(tr, self.m, eps)
        return out

    def raw_trace_residues(self) -> np.ndarray:
        """Same residues computed on the unfolded polynomials (independent of the folding)."""
        eps = self.conn.epsilon
        out = np.zeros((self.r, self.m), complex)
        for l in range(self.r):
            for j in range(self.m):
                tr = np.trace(self.raw[l][j], axis1=1, axis2=2)
                out[l, j] = residue_at_infinity(tr, self.m, eps)
        return out

    def ring_defect(self) -> float:
        """max |Xi_{l,j} - z^j N^l| in M_r(C[z]/(q))."""
        N = self.conn.N
        worst = 0.0
        for l in range(self.r):
            Nl = N.power(l)
            for j in range(self.m):
                zj = np.zeros(j + 1, complex)
                zj[j] = 1.0
                target = Nl.scale(zj)
                worst = max(worst, float(np.max(np.abs(target.data - self.xi[l, j]))))
        return worst


def build_xi(conn: UnfoldedConnection) -> XiFamily:
    spec = conn.spec
    r, m = spec.r, spec.m
    psi = interpolation_psi(spec)
    # psi(A) as an honest polynomial matrix: sum_i psi_i(z) A(z)^i
    ident = np.eye(r, dtype=complex)[None]
    psiA = np.zeros((1, r, r), complex)
    power = ident
    for i in range(r):
        term = matpoly_scalar_mul(psi[i], power)
        psiA = _add(psiA, term)
        power = matpoly_mul(power, conn.A)
    raw = []
    xi = np.zeros((r, m, m, r, r), complex)
    pw = ident
    for l in range(r):
        row = []
        for j in range(m):
            P = shift_up(pw, j)
            row.append(P)
            xi[l, j] = reduce_mod(P, spec.ring.modulus)
        raw.append(tuple(row))
        pw = matpoly_mul(pw, psiA)
    return XiFamily(conn, psi, xi, tuple(raw))


def _add(P, Q):
    n = max(P.shape[0], Q.shape[0])
    out = np.zeros((n,) + P.shape[1:], complex)
    out[: P.shape[0]] += P
    out[: Q.shape[0]] += Q
    return out


def as_quot(xi_lj: np.ndarray, conn: UnfoldedConnection) -> QuotMatrix:
    return QuotMatrix(conn.spec.ring, xi_lj)
