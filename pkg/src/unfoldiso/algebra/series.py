"""Truncated matrix power series, stored as arrays of shape (K, r, r)."""
from __future__ import annotations

import numpy as np

from ..errors import ResonantLeading
from .poly import pad_to


def ser_mul(P: np.ndarray, Q: np.ndarray, K: int | None = None) -> np.ndarray:
    K = K if K is not None else min(P.shape[0], Q.shape[0])
    out = np.zeros((K,) + (P.shape[1], Q.shape[2]), complex)
    for i in range(min(K, P.shape[0])):
        for j in range(min(K - i, Q.shape[0])):
            out[i + j] += P[i] @ Q[j]
    return out


def ser_inv(P: np.ndarray, K: int | None = None) -> np.ndarray:
    """Inverse of a matrix series with invertible constant term."""
    K = K if K is not None else P.shape[0]
    P = pad_to(P, K)
    inv0 = np.linalg.inv(P[0])
    out = np.zeros_like(P)
    out[0] = inv0
    for k in range(1, K):
        s = np.zeros_like(P[0])
        for i in range(1, k + 1):
            s += P[i] @ out[k - i]
        out[k] = -inv0 @ s
    return out


def ser_commutator(P: np.ndarray, Q: np.ndarray, K: int | None = None) -> np.ndarray:
    return ser_mul(P, Q, K) - ser_mul(Q, P, K)


def match_order(values, targets, tol: float = 1e-8):
    """Permutation perm with values[perm[k]] ~ targets[k] (greedy, bijective)."""
    values = np.asarray(values, complex)
    targets = np.asarray(targets, complex)
    free = list(range(len(values)))
    perm = []
    worst = 0.0
    for t in targets:
        dists = [abs(values[i] - t) for i in free]
        idx = int(np.argmin(dists))
        worst = max(worst, dists[idx])
        perm.append(free.pop(idx))
    scale = max(1.0, float(np.max(np.abs(targets), initial=0.0)))
    return perm, worst <= tol * scale, worst


def formal_diagonalize(A: np.ndarray, m: int, K: int, leading=None):
    """Formal gauge P = P0 (I + T1 z + ...) with P^-1 A P + z^m P^-1 P' = diag(D).

    ``A`` holds Taylor coefficients (padded to K). Off-diagonal parts of T_k
    come from Sylvester equations against the distinct leading eigenvalues;
    diagonal parts of T_k are fixed to zero. ``leading`` optionally prescribes
    the order of the eigenvalues of A(0). Returns (P, D) with P of shape
    (K, r, r) and D of shape (K, r).
    """
    A = pad_to(np.asarray(A, complex), K)
    r = A.shape[1]
    w, V = np.linalg.eig(A[0])
    if leading is not None:
        perm, ok, worst = match_order(w, leading)
        if not ok:
            raise ResonantLeading("leading eigenvalues do not match the prescribed ones", mismatch=worst)
        w, V = w[perm], V[:, perm]
    d0 = np.asarray(leading, complex) if leading is not None else w
    gaps = np.subtract.outer(d0, d0) + np.eye(r)
    if np.min(np.abs(gaps)) < 1e-10 * max(1.0, np.max(np.abs(d0))):
        raise ResonantLeading("leading eigenvalues collide", eigenvalues=d0.tolist())
    V = V / np.linalg.norm(V, axis=0)
    Vinv = np.linalg.inv(V)
    Ah = np.einsum("ij,kjl,lm->kim", Vinv, A, V)
    T = np.zeros((K, r, r), complex)
    T[0] = np.eye(r)
    D = np.zeros((K, r), complex)
    D[0] = d0
    off = ~np.eye(r, dtype=bool)
    for k in range(1, K):
        F = Ah[k].copy()
        for i in range(1, k):
            F += Ah[i] @ T[k - i] - T[k - i] * D[i][None, :]
        den = np.subtract.outer(d0, d0)
        if m >= 2:
            if k - m + 1 >= 1:
                F += (k - m + 1) * T[k - m + 1]
        else:
            den = den + k
        if m == 1 and np.min(np.abs(den[off]) if r > 1 else [1.0]) < 1e-10:
            raise ResonantLeading("integer eigenvalue gap at a simple pole", order=k)
        D[k] = np.diag(F)
        Tk = np.zeros((r, r), complex)
        Tk[off] = -F[off] / den[off]
        T[k] = Tk
    P = np.einsum("ij,kjl->kil", V, T)
    return P, D


class Laurent:
    """Truncated matrix Laurent series sum_k C[k] z^(low + k), valid through z^(low + len - 1)."""

    __slots__ = ("C", "low")

    def __init__(self, C, low: int):
        self.C = np.asarray(C, complex)
        self.low = int(low)

    @property
    def high(self) -> int:
        return self.low + self.C.shape[0] - 1

    def coeff(self, p: int) -> np.ndarray:
        k = p - self.low
        if 0 <= k < self.C.shape[0]:
            return self.C[k]
        if p > self.high:
            raise IndexError(f"power {p} beyond truncation {self.high}")
        return np.zeros(self.C.shape[1:], complex)

    def truncate(self, high: int) -> "Laurent":
        return Laurent(self.C[: max(0, high - self.low + 1)], self.low)

    def __add__(self, o: "Laurent") -> "Laurent":
        low = min(self.low, o.low)
        high = min(self.high, o.high)
        C = np.array([self._get(p) + o._get(p) for p in range(low, high + 1)])
        return Laurent(C, low)

    def __neg__(self):
        return Laurent(-self.C, self.low)

    def __sub__(self, o):
        return self + (-o)

    def _get(self, p):
        if p < self.low:
            return np.zeros(self.C.shape[1:], complex)
        return self.coeff(p)

    def deriv(self) -> "Laurent":
        p = np.arange(self.low, self.high + 1).reshape(-1, 1, 1)
        return Laurent((p * self.C)[:], self.low - 1).drop_zero_power_term()

    def drop_zero_power_term(self) -> "Laurent":
        return self

    def shift(self, s: int) -> "Laurent":
        return Laurent(self.C, self.low + s)

    def matmul(self, o: "Laurent") -> "Laurent":
        n = min(self.C.shape[0], o.C.shape[0])
        return Laurent(ser_mul(self.C[:n], o.C[:n], n), self.low + o.low)

    def commutator(self, o: "Laurent") -> "Laurent":
        return self.matmul(o) - o.matmul(self)

    def __call__(self, z):
        out = np.zeros(self.C.shape[1:], complex)
        for k in range(self.C.shape[0] - 1, -1, -1):
            out = out * z + self.C[k]
        return out * z**self.low
