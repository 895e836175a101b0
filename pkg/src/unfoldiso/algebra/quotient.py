"""The quotient ring C[z]/(p) and square matrices over it.

Elements are coefficient arrays of length m = deg p (ascending). For the
unfolding modulus p = z^m - eps^m the ring carries an explicit ``eps_zero``
flag; all branching on the degenerate fibre reads that flag, never a
numerical threshold on |eps|.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonUnit, ShapeMismatch
from .poly import unfolding_modulus, unfolding_roots

UNIT_RTOL = 1e-12


def reduce_mod(c: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    """Reduce coefficients along axis 0 modulo a monic polynomial."""
    m = modulus.shape[0] - 1
    c = np.array(c, dtype=complex, copy=True)
    if c.shape[0] <= m:
        return _pad(c, m)
    low = modulus[:m]
    for k in range(c.shape[0] - 1, m - 1, -1):
        top = c[k]
        if np.any(top != 0):
            # z^k = z^(k-m) * z^m and z^m == -sum_i low[i] z^i
            c[k - m : k] -= np.multiply.outer(low, top)
    return c[:m]


def _pad(c, m):
    if c.shape[0] == m:
        return c
    pad = np.zeros((m - c.shape[0],) + c.shape[1:], complex)
    return np.concatenate([c, pad], axis=0)


@dataclass(frozen=True, eq=False)
class QuotRing:
    modulus: np.ndarray
    eps: complex | None = None
    eps_zero: bool = field(default=False)

    def __post_init__(self):
        mod = np.asarray(self.modulus, complex)
        if mod.ndim != 1 or mod.shape[0] < 2 or mod[-1] != 1:
            raise ValueError("modulus must be monic of degree >= 1")
        object.__setattr__(self, "modulus", mod)

    @classmethod
    def unfolding(cls, m: int, eps: complex) -> "QuotRing":
        eps = complex(eps)
        return cls(unfolding_modulus(m, eps), eps=eps, eps_zero=(eps == 0))

    @classmethod
    def scalars(cls) -> "QuotRing":
        """C itself, realised as C[z]/(z)."""
        return cls.unfolding(1, 0.0)

    @property
    def m(self) -> int:
        return self.modulus.shape[0] - 1

    @property
    def is_unfolding(self) -> bool:
        return self.eps is not None

    def roots(self) -> np.ndarray:
        if self.is_unfolding:
            if self.eps_zero:
                return np.zeros(self.m, complex)
            return unfolding_roots(self.m, self.eps)
        return np.roots(self.modulus[::-1])

    # elements
    def element(self, c) -> np.ndarray:
        return reduce_mod(np.atleast_1d(np.asarray(c, complex)), self.modulus)

    def one(self) -> np.ndarray:
        e = np.zeros(self.m, complex)
        e[0] = 1.0
        return e

    def zero(self) -> np.ndarray:
        return np.zeros(self.m, complex)

    def add(self, a, b):
        return np.asarray(a, complex) + np.asarray(b, complex)

    def mul(self, a, b) -> np.ndarray:
        return reduce_mod(np.convolve(a, b), self.modulus)

    def evaluate(self, a, z) -> complex:
        return complex(np.polynomial.polynomial.polyval(z, a))

    def mult_matrix(self, a) -> np.ndarray:
        """Matrix of x -> a*x on the coefficient basis 1, z, ..., z^(m-1)."""
        m = self.m
        cols = [reduce_mod(np.concatenate([np.zeros(b, complex), a]), self.modulus) for b in range(m)]
        return np.stack(cols, axis=1)

    def unit_margin(self, a) -> float:
        """Smallest modulus of a over the points of the divisor (the residue field value when eps = 0)."""
        a = np.asarray(a, complex)
        if self.is_unfolding:
            if self.eps_zero:
                return float(abs(a[0]))
            return float(np.min(np.abs(np.polynomial.polynomial.polyval(self.roots(), a))))
        return float(np.linalg.svd(self.mult_matrix(a), compute_uv=False)[-1])

    def is_unit(self, a, scale: float | None = None) -> bool:
        a = np.asarray(a, complex)
        if scale is None:
            scale = float(np.max(np.abs(a))) if self.is_unfolding else float(np.linalg.norm(self.mult_matrix(a), 2))
        return bool(self.unit_margin(a) > UNIT_RTOL * max(scale, 1e-300))

    def inv(self, a) -> np.ndarray:
        """Inverse through a linear solve on the multiplication matrix."""
        a = np.asarray(a, complex)
        if not self.is_unit(a):
            raise NonUnit("element is not a unit of the quotient ring", element=a.tolist())
        return np.linalg.solve(self.mult_matrix(a), self.one())

    def from_values(self, values) -> np.ndarray:
        """CRT: the unique element taking the given values at the (distinct) roots."""
        rts = self.roots()
        V = np.vander(rts, self.m, increasing=True)
        return np.linalg.solve(V, np.asarray(values, complex))


class QuotMatrix:
    """r x r matrix over a QuotRing; ``data[a]`` is the z^a coefficient matrix."""

    __slots__ = ("ring", "data")

    def __init__(self, ring: QuotRing, data):
        data = np.asarray(data, complex)
        if data.ndim == 2:
            data = data[None]
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise ShapeMismatch("QuotMatrix data must have shape (d, r, r)", shape=data.shape)
        self.ring = ring
        self.data = reduce_mod(data, ring.modulus)

    # constructors
    @classmethod
    def identity(cls, ring: QuotRing, r: int) -> "QuotMatrix":
        return cls(ring, np.eye(r, dtype=complex))

    @classmethod
    def constant(cls, ring: QuotRing, M) -> "QuotMatrix":
        return cls(ring, np.asarray(M, complex))

    @classmethod
    def from_values(cls, ring: QuotRing, mats) -> "QuotMatrix":
        """CRT interpolation from matrices prescribed at each root."""
        mats = np.asarray(mats, complex)
        rts = ring.roots()
        V = np.vander(rts, ring.m, increasing=True)
        coef = np.linalg.solve(V, mats.reshape(ring.m, -1)).reshape(mats.shape)
        return cls(ring, coef)

    @property
    def r(self) -> int:
        return self.data.shape[1]

    @property
    def m(self) -> int:
        return self.ring.m

    def _wrap(self, data):
        return QuotMatrix(self.ring, data)

    def _check(self, o):
        if not isinstance(o, QuotMatrix) or o.r != self.r or o.ring.m != self.ring.m:
            raise ShapeMismatch("incompatible QuotMatrix operands")

    def __add__(self, o):
        self._check(o)
        return self._wrap(self.data + o.data)

    def __sub__(self, o):
        self._check(o)
        return self._wrap(self.data - o.data)

    def __neg__(self):
        return self._wrap(-self.data)

    def __matmul__(self, o):
        self._check(o)
        m = self.m
        out = np.zeros((2 * m - 1, self.r, self.r), complex)
        for i in range(m):
            for j in range(m):
                out[i + j] += self.data[i] @ o.data[j]
        return self._wrap(out)

    def scale(self, a) -> "QuotMatrix":
        """Multiply by a ring element (coefficient array) or a complex scalar."""
        a = np.atleast_1d(np.asarray(a, complex))
        out = np.zeros((a.shape[0] + self.m - 1, self.r, self.r), complex)
        for i, ai in enumerate(a):
            out[i : i + self.m] += ai * self.data
        return self._wrap(out)

    __rmul__ = scale

    @property
    def T(self) -> "QuotMatrix":
        return self._wrap(np.transpose(self.data, (0, 2, 1)))

    def trace(self) -> np.ndarray:
        return np.trace(self.data, axis1=1, axis2=2)

    def entry(self, i, k) -> np.ndarray:
        return self.data[:, i, k]

    def evaluate(self, z) -> np.ndarray:
        out = np.zeros((self.r, self.r), complex)
        for Pk in self.data[::-1]:
            out = out * z + Pk
        return out

    def power(self, n: int) -> "QuotMatrix":
        out = QuotMatrix.identity(self.ring, self.r)
        for _ in range(n):
            out = out @ self
        return out

    def poly_eval(self, coeffs) -> "QuotMatrix":
        """Evaluate sum_i c_i X^i where each c_i is a complex scalar or ring element."""
        out = QuotMatrix(self.ring, np.zeros((1, self.r, self.r)))
        ident = QuotMatrix.identity(self.ring, self.r)
        for c in list(coeffs)[::-1]:
            out = out @ self + ident.scale(c)
        return out

    def big_matrix(self) -> np.ndarray:
        """Complex (rm x rm) matrix of the action on R^r = C^(rm), index (i, a) -> i*m + a."""
        r, m = self.r, self.m
        L = np.zeros((r * m, r * m), complex)
        for i in range(r):
            for k in range(r):
                L[i * m : (i + 1) * m, k * m : (k + 1) * m] = self.ring.mult_matrix(self.data[:, i, k])
        return L

    def det(self) -> np.ndarray:
        """Ring-valued determinant: sample det on roots of unity, recover the polynomial by FFT, reduce."""
        r, m = self.r, self.m
        n = r * (m - 1) + 1
        z = np.exp(2j * np.pi * np.arange(n) / n)
        powers = z[:, None] ** np.arange(m)[None, :]
        vals = np.linalg.det(np.einsum("nk,kij->nij", powers, self.data))
        return reduce_mod(np.fft.fft(vals) / n, self.ring.modulus)

    def det_leibniz(self) -> np.ndarray:
        """Leibniz expansion in the ring; reference implementation for small r."""
        r = self.r
        ring = self.ring
        total = ring.zero()
        for perm in itertools.permutations(range(r)):
            sign = _perm_sign(perm)
            term = ring.one()
            for i, p in enumerate(perm):
                term = ring.mul(term, self.data[:, i, p])
            total = total + sign * term
        return total

    def unit_margin(self) -> float:
        """Smallest relative singular value of M over the points of the divisor."""
        ring = self.ring
        pts = np.zeros(1, complex) if ring.eps_zero else ring.roots()
        worst = np.inf
        for p in pts:
            s = np.linalg.svd(np.tensordot(p ** np.arange(self.m), self.data, axes=1), compute_uv=False)
            worst = min(worst, s[-1] / max(s[0], 1e-300))
        return float(worst)

    def is_unit(self) -> bool:
        if self.ring.is_unfolding:
            # invertible over the local rings iff invertible at each point of the divisor
            return self.unit_margin() > UNIT_RTOL
        return self.ring.is_unit(self.det(), scale=max(self.norm(), 1e-300) ** self.r)

    def inverse(self) -> "QuotMatrix":
        if not self.is_unit():
            raise NonUnit("determinant is not a unit of the quotient ring")
        r, m = self.r, self.m
        rhs = np.zeros((r * m, r), complex)
        for c in range(r):
            rhs[c * m, c] = 1.0
        X = np.linalg.solve(self.big_matrix(), rhs)
        data = np.zeros((m, r, r), complex)
        for i in range(r):
            data[:, i, :] = X[i * m : (i + 1) * m, :]
        return self._wrap(data)

    def norm(self) -> float:
        return float(np.max(np.abs(self.data), initial=0.0))

    def allclose(self, o: "QuotMatrix", atol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.data - o.data), initial=0.0) <= atol * max(1.0, self.norm(), o.norm()))

    def __repr__(self):
        return f"QuotMatrix(m={self.m}, r={self.r}, eps={self.ring.eps})"


def _perm_sign(perm) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def as_quot(M, ring: QuotRing | None = None) -> QuotMatrix:
    """Promote a plain complex matrix to a QuotMatrix over C (or the given ring)."""
    if isinstance(M, QuotMatrix):
        return M
    return QuotMatrix(ring or QuotRing.scalars(), np.asarray(M, complex))


def quot_inverse(a, ring: QuotRing) -> np.ndarray:
    return ring.inv(a)
