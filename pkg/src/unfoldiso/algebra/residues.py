"""Rational one-forms A(z) dz / (z^m - eps^m), partial fractions and residues."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npp

from ..errors import DegenerateOrder, RepeatedRoot
from .poly import matpoly_eval, taylor_shift, unfolding_roots


@dataclass(frozen=True, eq=False)
class RationalForm:
    """A(z) dz / q(z) with q = z^m - eps^m and A of shape (d, r, r) (or (d,) scalar)."""

    numerator: np.ndarray
    m: int
    eps: complex

    @property
    def denominator(self) -> np.ndarray:
        c = np.zeros(self.m + 1, complex)
        c[0] = -complex(self.eps) ** self.m
        c[-1] = 1.0
        return c

    def roots(self) -> np.ndarray:
        return unfolding_roots(self.m, self.eps)

    def __call__(self, z):
        A = np.asarray(self.numerator, complex)
        return matpoly_eval(A, z) / (z**self.m - complex(self.eps) ** self.m)


def partial_fractions(f: RationalForm, distinct_roots=None) -> dict:
    """Coefficients C_j = A(rho_j)/q'(rho_j) in A/q = sum_j C_j/(z - rho_j)."""
    rts = f.roots() if distinct_roots is None else np.asarray(distinct_roots, complex)
    gaps = [abs(a - b) for i, a in enumerate(rts) for b in rts[i + 1 :]]
    if f.eps == 0 or (gaps and min(gaps) == 0):
        raise RepeatedRoot("denominator roots are not distinct; use the Laurent path at eps = 0")
    A = np.asarray(f.numerator, complex)
    if A.shape[0] > f.m:
        raise ValueError("numerator degree must be < m")
    out = {}
    for rho in rts:
        qprime = f.m * rho ** (f.m - 1)
        out[complex(rho)] = matpoly_eval(A, rho) / qprime
    return out


def recombine(coeffs: dict, m: int, eps: complex) -> np.ndarray:
    """Numerator of sum_j C_j/(z - rho_j) over q = prod (z - rho_j); inverse of partial_fractions."""
    rts = list(coeffs.keys())
    shape = np.shape(next(iter(coeffs.values())))
    num = np.zeros((m,) + shape, complex)
    for rho, C in coeffs.items():
        others = npp.polyfromroots([x for x in rts if x != rho]) if len(rts) > 1 else np.ones(1)
        for k, a in enumerate(others):
            num[k] += a * np.asarray(C, complex)
    return num


def residue_sum_check(m: int, points, exponents=None) -> complex:
    """Sum of residues of dz / prod_s (z - p_s)^(1 - l_s) over its finite poles.

    Points may repeat; each distinct point is handled through its Laurent
    expansion, so double roots are covered.
    """
    points = [complex(p) for p in points]
    if exponents is None:
        exponents = [0] * len(points)
    if len(points) != m or len(exponents) != m:
        raise ValueError("need m points and m exponents")
    if any(e not in (0, 1) for e in exponents):
        raise ValueError("exponents must be 0 or 1")
    order = sum(1 - e for e in exponents)
    if m < 2 or order < 2:
        raise DegenerateOrder("total pole degree must be >= 2", order=order)
    mult: dict[complex, int] = {}
    for p, e in zip(points, exponents):
        if e == 0:
            mult[p] = mult.get(p, 0) + 1
    total = 0j
    for p, k in mult.items():
        g = np.ones(1, complex)
        for p2, k2 in mult.items():
            if p2 != p:
                g = npp.polymul(g, npp.polypow([-p2, 1.0], k2))
        # 1/g around p to order k-1; the residue is its (k-1)-th Taylor coefficient
        gs = taylor_shift(g, p)
        inv = _series_inverse(gs, k)
        total += inv[k - 1]
    return total


def _series_inverse(c, n):
    c = np.asarray(c, complex)
    out = np.zeros(n, complex)
    out[0] = 1.0 / c[0]
    for k in range(1, n):
        s = 0j
        for i in range(1, min(k, c.shape[0] - 1) + 1):
            s += c[i] * out[k - i]
        out[k] = -s / c[0]
    return out


def residue_at_infinity(A, m: int, eps: complex) -> np.ndarray:
    """res_{z=inf} A(z) dz/(z^m - eps^m) = -sum_p eps^(pm) A_(pm+m-1)."""
    A = np.asarray(A, complex)
    eps = complex(eps)
    out = np.zeros(A.shape[1:], complex)
    p = 0
    while p * m + m - 1 < A.shape[0]:
        weight = eps ** (p * m) if p > 0 else 1.0
        out = out - weight * A[p * m + m - 1]
        p += 1
    return out


def residues_at_roots(A, m: int, eps: complex) -> dict:
    """Residues of A dz/q at each root for a polynomial A of any degree (eps != 0)."""
    A = np.asarray(A, complex)
    rts = unfolding_roots(m, eps)
    return {complex(rho): matpoly_eval(A, rho) / (m * rho ** (m - 1)) for rho in rts}
