"""Dual numbers C[h]/(h^2) over complex scalars or numpy arrays.

``Dual(re, eps)`` stands for ``re + h*eps``. Both parts may be Python
complex numbers or numpy arrays of matching shape; ``*`` is elementwise
(or scalar) and ``@`` is the matrix product, so the same class serves
scalars, matrices and stacked series coefficients.
"""
from __future__ import annotations

import numpy as np

from ..errors import SingularBase


def _part(x, which):
    if isinstance(x, Dual):
        return x.re if which == 0 else x.eps
    return x if which == 0 else _zero_like(x)


def _zero_like(x):
    if isinstance(x, np.ndarray):
        return np.zeros_like(x, dtype=complex)
    return 0j


class Dual:
    __slots__ = ("re", "eps")
    __array_ufunc__ = None  # ndarray (op) Dual defers to the reflected Dual method

    def __init__(self, re, eps=None):
        if isinstance(re, np.ndarray):
            re = re.astype(complex)
        else:
            re = complex(re)
        if eps is None:
            eps = _zero_like(re)
        elif isinstance(eps, np.ndarray):
            eps = eps.astype(complex)
        else:
            eps = complex(eps)
        self.re = re
        self.eps = eps

    # ring structure
    def __add__(self, o):
        return Dual(self.re + _part(o, 0), self.eps + _part(o, 1))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.re, -self.eps)

    def __sub__(self, o):
        return Dual(self.re - _part(o, 0), self.eps - _part(o, 1))

    def __rsub__(self, o):
        return Dual(_part(o, 0) - self.re, _part(o, 1) - self.eps)

    def __mul__(self, o):
        a, b = _part(o, 0), _part(o, 1)
        return Dual(self.re * a, self.re * b + self.eps * a)

    def __rmul__(self, o):
        a, b = _part(o, 0), _part(o, 1)
        return Dual(a * self.re, a * self.eps + b * self.re)

    def __matmul__(self, o):
        a, b = _part(o, 0), _part(o, 1)
        return Dual(self.re @ a, self.re @ b + self.eps @ a)

    def __rmatmul__(self, o):
        a, b = _part(o, 0), _part(o, 1)
        return Dual(a @ self.re, a @ self.eps + b @ self.re)

    def __truediv__(self, o):
        if isinstance(o, Dual):
            return self * o.inverse()
        return Dual(self.re / o, self.eps / o)

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Dual(1.0)
        base = self
        for _ in range(n):
            out = out * base
        return out

    def __eq__(self, o):
        return bool(np.all(self.re == _part(o, 0)) and np.all(self.eps == _part(o, 1)))

    def __repr__(self):
        return f"Dual({self.re!r}, {self.eps!r})"

    # shape helpers for array-valued duals
    @property
    def shape(self):
        return np.shape(self.re)

    @property
    def T(self):
        return Dual(np.transpose(self.re), np.transpose(self.eps))

    def __getitem__(self, idx):
        return Dual(self.re[idx], self.eps[idx])

    def is_unit(self) -> bool:
        return bool(np.all(self.re != 0))

    def inverse(self) -> "Dual":
        """Scalar (elementwise) inverse: (a + hb)^-1 = 1/a - h b/a^2."""
        if not self.is_unit():
            raise SingularBase("h^0 part vanishes", re=str(self.re))
        inv = 1.0 / self.re
        return Dual(inv, -self.eps * inv * inv)

    def norm(self) -> float:
        return float(max(np.max(np.abs(self.re), initial=0.0), np.max(np.abs(self.eps), initial=0.0)))


def dual_eye(r: int) -> Dual:
    return Dual(np.eye(r, dtype=complex), np.zeros((r, r), complex))


def dual_matinv(M: Dual) -> Dual:
    """(M0 + h M1)^-1 = M0^-1 - h M0^-1 M1 M0^-1."""
    M0 = np.asarray(M.re)
    try:
        if np.linalg.cond(M0) > 1e14:
            raise np.linalg.LinAlgError
        inv = np.linalg.inv(M0)
    except np.linalg.LinAlgError:
        raise SingularBase("h^0 part of the matrix is singular") from None
    return Dual(inv, -inv @ M.eps @ inv)


def adjugate(M0: np.ndarray) -> np.ndarray:
    r = M0.shape[0]
    if r == 1:
        return np.ones((1, 1), complex)
    adj = np.empty((r, r), complex)
    for i in range(r):
        for j in range(r):
            minor = np.delete(np.delete(M0, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def dual_det(M: Dual) -> Dual:
    """det(M0 + h M1) = det M0 + h Tr(adj(M0) M1); no inverse or eigenvectors needed."""
    M0 = np.asarray(M.re)
    return Dual(np.linalg.det(M0), np.trace(adjugate(M0) @ M.eps))


def dual_trace(M: Dual) -> Dual:
    return Dual(np.trace(M.re), np.trace(M.eps))


def dual_commutator(X, Y) -> Dual:
    return X @ Y - Y @ X
