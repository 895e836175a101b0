"""Dense polynomials with ascending coefficients.

Scalar polynomials are 1-D complex arrays; matrix polynomials are arrays of
shape ``(d, r, r)`` with ``P[k]`` the coefficient of ``z**k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npp

ZERO_DEGREE = -1  # degree of the zero polynomial


def trim(c, tol: float = 0.0) -> np.ndarray:
    """Drop trailing coefficients whose magnitude is <= tol (at least one entry kept)."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    n = c.shape[0]
    while n > 1 and np.max(np.abs(c[n - 1])) <= tol:
        n -= 1
    return c[:n].copy()


def degree(c, tol: float = 0.0) -> int:
    t = trim(c, tol)
    if t.shape[0] == 1 and np.max(np.abs(t[0])) <= tol:
        return ZERO_DEGREE
    return t.shape[0] - 1


@dataclass(frozen=True)
class Poly:
    """Scalar polynomial in one variable (z or T by context)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", trim(self.coeffs))

    @classmethod
    def from_roots(cls, roots) -> "Poly":
        return cls(npp.polyfromroots(np.asarray(roots, complex)))

    @property
    def degree(self) -> int:
        return degree(self.coeffs)

    def __call__(self, x):
        return npp.polyval(x, self.coeffs)

    def __add__(self, o: "Poly") -> "Poly":
        return Poly(npp.polyadd(self.coeffs, o.coeffs))

    def __sub__(self, o: "Poly") -> "Poly":
        return Poly(npp.polysub(self.coeffs, o.coeffs))

    def __mul__(self, o) -> "Poly":
        if isinstance(o, Poly):
            return Poly(npp.polymul(self.coeffs, o.coeffs))
        return Poly(self.coeffs * o)

    __rmul__ = __mul__

    def deriv(self) -> "Poly":
        if self.coeffs.shape[0] == 1:
            return Poly([0.0])
        return Poly(npp.polyder(self.coeffs))

    def eval_matrix(self, M: np.ndarray) -> np.ndarray:
        """Horner evaluation at a square complex matrix."""
        r = M.shape[0]
        out = np.zeros((r, r), complex)
        for a in self.coeffs[::-1]:
            out = out @ M + a * np.eye(r)
        return out


def unfolding_modulus(m: int, eps: complex) -> np.ndarray:
    """Coefficients of q(z) = z^m - eps^m."""
    c = np.zeros(m + 1, complex)
    c[0] = -complex(eps) ** m
    c[m] = 1.0
    return c


def matpoly_eval(P: np.ndarray, z) -> np.ndarray:
    """Evaluate sum_k P[k] z^k (Horner) at a scalar z."""
    out = np.zeros(P.shape[1:], complex)
    for Pk in P[::-1]:
        out = out * z + Pk
    return out


def matpoly_deriv(P: np.ndarray) -> np.ndarray:
    if P.shape[0] == 1:
        return np.zeros_like(P)
    k = np.arange(1, P.shape[0]).reshape((-1,) + (1,) * (P.ndim - 1))
    return P[1:] * k


def matpoly_mul(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Product of matrix polynomials, full length len(P)+len(Q)-1."""
    d = P.shape[0] + Q.shape[0] - 1
    out = np.zeros((d, P.shape[1], Q.shape[2]), complex)
    for i in range(P.shape[0]):
        for j in range(Q.shape[0]):
            out[i + j] += P[i] @ Q[j]
    return out


def matpoly_scalar_mul(c: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Product of a scalar polynomial c(z) with a matrix polynomial P(z)."""
    c = np.asarray(c, complex)
    out = np.zeros((c.shape[0] + P.shape[0] - 1,) + P.shape[1:], complex)
    for i, ci in enumerate(c):
        out[i : i + P.shape[0]] += ci * P
    return out


def shift_up(P: np.ndarray, j: int) -> np.ndarray:
    """Multiply by z^j."""
    pad = np.zeros((j,) + P.shape[1:], complex)
    return np.concatenate([pad, P], axis=0)


def pad_to(P: np.ndarray, n: int) -> np.ndarray:
    """Zero-pad (or check-truncate) the coefficient axis to length n."""
    P = np.asarray(P, complex)
    if P.shape[0] >= n:
        return P[:n].copy()
    pad = np.zeros((n - P.shape[0],) + P.shape[1:], complex)
    return np.concatenate([P, pad], axis=0)


def taylor_shift(c, center: complex) -> np.ndarray:
    """Coefficients of p(center + u) in powers of u."""
    c = np.asarray(c, complex)
    n = c.shape[0]
    out = np.zeros(n, complex)
    cur = c.copy()
    fact = 1.0
    for k in range(n):
        out[k] = npp.polyval(center, cur) / fact
        cur = npp.polyder(cur) if cur.shape[0] > 1 else np.zeros(1, complex)
        fact *= k + 1
    return out


def unfolding_roots(m: int, eps: complex) -> np.ndarray:
    """The roots eps * zeta_m^j, j = 0..m-1, with rounding noise in unit roots snapped to 0."""
    ang = 2 * np.pi * np.arange(m) / m
    c, s = np.cos(ang), np.sin(ang)
    c[np.abs(c) < 1e-15] = 0.0
    s[np.abs(s) < 1e-15] = 0.0
    return complex(eps) * (c + 1j * s)
