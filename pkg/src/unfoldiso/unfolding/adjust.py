"""Adjusting data: constant matrices R_{l'} killing the residue at infinity of Xi_{l,j}."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra.quotient import reduce_mod
from ..algebra.residues import residue_at_infinity
from ..errors import CommutantTooBig, Unsolvable
from .xi import XiFamily

SOLVE_RTOL = 1e-9


def ad_matrix(X: np.ndarray) -> np.ndarray:
    """Row-major matrix of R -> X R - R X."""
    r = X.shape[0]
    eye = np.eye(r)
    return np.kron(X, eye) - np.kron(eye, X.T)


def joint_commutant_dim(A: np.ndarray, tol: float = 1e-9) -> int:
    """dim of the common centralizer of the coefficient matrices A[0..m-1]."""
    stack = np.concatenate([ad_matrix(Ai) for Ai in A], axis=0)
    s = np.linalg.svd(stack, compute_uv=False)
    scale = max(1.0, s[0])
    return int(np.sum(s <= tol * scale)) + max(0, stack.shape[1] - s.shape[0])


def stacked_map(A: np.ndarray) -> np.ndarray:
    """(R_0, ..., R_{m-1}) -> sum_{l'} [A_{m-l'-1}, R_{l'}], row-major, shape (r^2, m r^2)."""
    m = A.shape[0]
    return np.concatenate([ad_matrix(A[m - lp - 1]) for lp in range(m)], axis=1)


def fold_commutator(A: np.ndarray, R: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    """[A(z), R(z)] reduced modulo q, with R(z) = sum_{l'} R[l'] z^{l'}."""
    m = A.shape[0]
    full = np.zeros((2 * m - 1,) + A.shape[1:], complex)
    for a in range(m):
        for b in range(R.shape[0]):
            full[a + b] += A[a] @ R[b] - R[b] @ A[a]
    return reduce_mod(full, modulus)


@dataclass(frozen=True, eq=False)
class AdjustedXiFamily:
    base: XiFamily
    R: np.ndarray  # (r, m, m, r, r): R[l, j, l']
    xitilde: np.ndarray  # (r, m, m, r, r)
    adjusted: np.ndarray  # (r, m) bool; False for j = m-1
    solve_residual: np.ndarray  # (r, m) relative residual of the commutator solve
    commutant_dim: int

    @property
    def conn(self):
        return self.base.conn

    def residues_at_infinity(self) -> np.ndarray:
        """max-abs of res_inf(Xi~_{l,j} dz/q) per (l, j)."""
        conn = self.conn
        out = np.zeros(self.adjusted.shape)
        for l in range(conn.r):
            for j in range(conn.m):
                res = residue_at_infinity(self.xitilde[l, j], conn.m, conn.epsilon)
                out[l, j] = float(np.max(np.abs(res)))
        return out

    def commutator_identity_defect(self) -> np.ndarray:
        A = self.conn.A
        m = self.conn.m
        out = np.zeros(self.adjusted.shape)
        for l in range(self.conn.r):
            for j in range(m):
                if not self.adjusted[l, j]:
                    continue
                lhs = sum(A[m - lp - 1] @ self.R[l, j, lp] - self.R[l, j, lp] @ A[m - lp - 1] for lp in range(m))
                out[l, j] = float(np.max(np.abs(lhs - self.base.xi[l, j, m - 1])))
        return out

    def xitilde_v(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("lj,ljkab->kab", np.asarray(v, complex), self.xitilde)


def solve_adjusting_data(fam: XiFamily, rtol: float = SOLVE_RTOL) -> AdjustedXiFamily:
    conn = fam.conn
    r, m = conn.r, conn.m
    A = conn.A
    dim = joint_commutant_dim(A)
    # with m = 1 no channel needs adjusting, so the criterion is vacuous
    if dim > 1 and m > 1:
        raise CommutantTooBig("joint commutant of the A_i is larger than the scalars", dimension=dim)
    L = stacked_map(A)
    pinv = np.linalg.pinv(L, rcond=1e-12)
    R = np.zeros((r, m, m, r, r), complex)
    xt = fam.xi.copy()
    adjusted = np.zeros((r, m), bool)
    resid = np.zeros((r, m))
    for l in range(r):
        for j in range(m - 1):
            target = fam.xi[l, j, m - 1]
            sol = pinv @ target.ravel()
            err = float(np.linalg.norm(L @ sol - target.ravel()))
            tnorm = float(np.linalg.norm(target))
            resid[l, j] = err / max(1.0, tnorm)
            if err > rtol * max(1.0, tnorm):
                raise Unsolvable("commutator equation for the adjusting data has no solution", l=l, j=j, residual=err)
            Rlj = sol.reshape(m, r, r)
            R[l, j] = Rlj
            xt[l, j] = fam.xi[l, j] - fold_commutator(A, Rlj, conn.spec.ring.modulus)
            adjusted[l, j] = True
    return AdjustedXiFamily(fam, R, xt, adjusted, resid, dim)


def commutator_kernel(A: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Basis of the kernel of the stacked commutator map, each vector reshaped to (m, r, r)."""
    L = stacked_map(A)
    m, r = A.shape[0], A.shape[1]
    _, s, Vh = np.linalg.svd(L)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return Vh[rank:].conj().reshape(-1, m, r, r)
