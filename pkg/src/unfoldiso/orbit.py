"""Symmetric factorizations N = theta kappa and the symplectic pairing on their tangent spaces.

Everything here works over C and over the quotient rings C[z]/(p): plain
complex matrices are promoted to QuotMatrix over C = C[z]/(z). V^dual uses the
standard dual basis, so transposition is matrix transposition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra.quotient import QuotMatrix, QuotRing, as_quot, reduce_mod
from .errors import Inequivalent, NotCyclic, NotTangent, PhiNotAnnihilating, ShapeMismatch, Unsolvable

TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Factorization:
    theta: QuotMatrix  # V^dual -> V
    kappa: QuotMatrix  # V -> V^dual
    phi: np.ndarray  # monic minimal polynomial, ascending coefficients

    @property
    def N(self) -> QuotMatrix:
        return self.theta @ self.kappa

    @property
    def ring(self) -> QuotRing:
        return self.theta.ring

    @property
    def r(self) -> int:
        return self.theta.r


@dataclass(frozen=True, eq=False)
class TangentPair:
    tau: QuotMatrix  # deformation of theta
    xi: QuotMatrix  # deformation of kappa

    @classmethod
    def of(cls, tau, xi, ring: QuotRing | None = None) -> "TangentPair":
        return cls(as_quot(tau, ring), as_quot(xi, ring))

    def __add__(self, o: "TangentPair") -> "TangentPair":
        return TangentPair(self.tau + o.tau, self.xi + o.xi)

    def scale(self, a) -> "TangentPair":
        return TangentPair(self.tau.scale(a), self.xi.scale(a))


def _scalar_out(ring: QuotRing, val):
    return complex(val[0]) if ring.m == 1 else val


def _krylov(N: QuotMatrix, v: np.ndarray, n: int):
    """Ring vectors N^i v for i < n, each of shape (m, r)."""
    out = []
    cur = np.zeros((N.m, N.r), complex)
    cur[0] = v
    for _ in range(n):
        out.append(cur)
        nxt = np.zeros((2 * N.m - 1, N.r), complex)
        for a in range(N.m):
            for b in range(N.m):
                nxt[a + b] += N.data[a] @ cur[b]
        cur = reduce_mod(nxt, N.ring.modulus)
    return out


def _pairing(ring: QuotRing, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """u^T w for a constant vector u and a ring vector w."""
    return w @ u


def factorize(N, phi, rng_seed=0, retries: int = 32) -> Factorization:
    """Symmetric factorization built from cyclic vectors of N and of N^T.

    With K = [v, Nv, ...] and the Hankel moments H_ij = u^T N^(i+j) v, the
    module isomorphism sending (N^T)^i u to N^i v is theta = K H^-1 K^T, and
    kappa = K^-T H' K^-1 with H'_ij = u^T N^(i+j+1) v. Both are symmetric by
    construction and theta kappa = N.
    """
    N = as_quot(N)
    phi = np.asarray(phi, complex)
    r, ring = N.r, N.ring
    if phi.shape[0] != r + 1 or phi[-1] != 1:
        raise ShapeMismatch("phi must be monic of degree r", degree=phi.shape[0] - 1, r=r)
    defect = N.poly_eval(phi).norm()
    if defect > TOL * max(1.0, N.norm()) ** r:
        raise PhiNotAnnihilating("phi(N) != 0", defect=defect)
    rng = np.random.default_rng(rng_seed)
    for _ in range(retries):
        v = _disk(rng, r)
        u = _disk(rng, r)
        kry = _krylov(N, v, 2 * r)
        H = np.zeros((ring.m, r, r), complex)
        H1 = np.zeros((ring.m, r, r), complex)
        for i in range(r):
            for j in range(r):
                H[:, i, j] = _pairing(ring, u, kry[i + j])
                H1[:, i, j] = _pairing(ring, u, kry[i + j + 1])
        Hq = QuotMatrix(ring, H)
        if not Hq.is_unit():
            continue
        K = QuotMatrix(ring, np.stack(kry[:r], axis=2))
        Kinv = K.inverse()
        theta = K @ Hq.inverse() @ K.T
        kappa = Kinv.T @ QuotMatrix(ring, H1) @ Kinv
        theta = QuotMatrix(ring, 0.5 * (theta.data + theta.T.data))
        kappa = QuotMatrix(ring, 0.5 * (kappa.data + kappa.T.data))
        return Factorization(theta, kappa, phi)
    raise NotCyclic("no cyclic vector found within the retry budget", retries=retries)


def _disk(rng, n):
    rad = np.sqrt(rng.uniform(0, 1, n))
    ang = rng.uniform(0, 2 * np.pi, n)
    return rad * np.exp(1j * ang)


def _commutant_poly_solve(NT: QuotMatrix, target: QuotMatrix):
    """Least-squares ring coefficients p_i with sum_i p_i NT^i = target; returns (p, residual)."""
    r, m = NT.r, NT.m
    cols = []
    powers = [NT.power(i) for i in range(r)]
    for i in range(r):
        for b in range(m):
            zb = np.zeros(b + 1, complex)
            zb[b] = 1.0
            cols.append(powers[i].scale(zb).data.ravel())
    Amat = np.stack(cols, axis=1)
    rhs = target.data.ravel()
    sol, *_ = np.linalg.lstsq(Amat, rhs, rcond=None)
    resid = float(np.linalg.norm(Amat @ sol - rhs))
    return sol.reshape(r, m), resid


def gauge_compare(f1: Factorization, f2: Factorization):
    """Ring coefficients of P with theta2 = theta1 P(N^T), kappa2 = P(N^T)^-1 kappa1.

    Returns an array of shape (r, m): row i is the coefficient of T^i.
    """
    N = f1.N
    if not N.allclose(f2.N, 1e-8):
        raise Inequivalent("factorizations have different products")
    NT = N.T
    sigma = f1.theta.inverse() @ f2.theta
    comm = (sigma @ NT - NT @ sigma).norm()
    if comm > 1e-8 * max(1.0, sigma.norm() * NT.norm()):
        raise Inequivalent("theta1^-1 theta2 does not commute with N^T", defect=comm)
    P, resid = _commutant_poly_solve(NT, sigma)
    if resid > 1e-8 * max(1.0, sigma.norm()):
        raise Inequivalent("theta1^-1 theta2 is not a polynomial in N^T", residual=resid)
    PNT = NT.poly_eval(list(P))
    if not PNT.is_unit():
        raise Inequivalent("gauge polynomial is not a unit")
    if not f2.kappa.allclose(PNT.inverse() @ f1.kappa, 1e-8):
        raise Inequivalent("kappa does not transform by P(N^T)^-1")
    return P


def d0(fac: Factorization, P) -> TangentPair:
    """Infinitesimal gauge action: P -> (theta P(N^T), -P(N^T) kappa)."""
    PNT = fac.N.T.poly_eval(list(np.atleast_1d(P) if np.ndim(P) == 1 else P))
    return TangentPair(fac.theta @ PNT, -(PNT @ fac.kappa))


def _first_order_product(fac: Factorization, pair: TangentPair) -> QuotMatrix:
    return fac.theta @ pair.xi + pair.tau @ fac.kappa


def d1(fac: Factorization, pair: TangentPair) -> np.ndarray:
    """Traces Tr(N^i (theta xi + tau kappa)), i < r, as ring elements (shape (r, m))."""
    _check_shapes(fac, pair)
    X = _first_order_product(fac, pair)
    N = fac.N
    out = []
    cur = X
    for _ in range(fac.r):
        out.append(cur.trace())
        cur = N @ cur
    return np.array(out)


def _check_shapes(fac, pair):
    for M in (pair.tau, pair.xi):
        if M.r != fac.r or M.m != fac.ring.m:
            raise ShapeMismatch("tangent pair does not match the factorization", r=M.r, m=M.m)


def phi_first_order(fac: Factorization, pair: TangentPair) -> QuotMatrix:
    """h-part of phi((theta + h tau)(kappa + h xi))."""
    N = fac.N
    X = _first_order_product(fac, pair)
    r = fac.r
    powers = [N.power(i) for i in range(r + 1)]
    out = QuotMatrix(fac.ring, np.zeros((1, r, r)))
    for i in range(1, r + 1):
        for a in range(i):
            out = out + (powers[a] @ X @ powers[i - 1 - a]).scale(fac.phi[i])
    return out


def tangent_check(fac: Factorization, pair: TangentPair, tol: float = TOL) -> bool:
    traces = d1(fac, pair)
    scale = max(1.0, fac.N.norm()) ** fac.r * max(1.0, pair.tau.norm(), pair.xi.norm())
    ok = bool(np.max(np.abs(traces)) <= tol * scale)
    if ok:
        defect = phi_first_order(fac, pair).norm()
        if defect > 1e-8 * scale * max(1.0, np.max(np.abs(fac.phi))):
            raise AssertionError(f"trace conditions hold but the phi-locus defect is {defect:.3e}")
    return ok


def orbit_pairing(fac: Factorization, p1: TangentPair, p2: TangentPair, check: bool = True):
    """omega = 1/2 Tr(tau xi' - tau' xi)."""
    if check and not (tangent_check(fac, p1) and tangent_check(fac, p2)):
        raise NotTangent("pairing arguments must lie in ker d1")
    val = 0.5 * ((p1.tau @ p2.xi) - (p2.tau @ p1.xi)).trace()
    return _scalar_out(fac.ring, val)


def _ad_solve(N: QuotMatrix, X: QuotMatrix) -> QuotMatrix:
    """Least-norm g with N g - g N = X."""
    ring, r, m = N.ring, N.r, N.m
    cols = []
    for b in range(m):
        for i in range(r):
            for k in range(r):
                E = np.zeros((m, r, r), complex)
                E[b, i, k] = 1.0
                Eq = QuotMatrix(ring, E)
                cols.append((N @ Eq - Eq @ N).data.ravel())
    L = np.stack(cols, axis=1)
    rhs = X.data.ravel()
    sol, *_ = np.linalg.lstsq(L, rhs, rcond=None)
    resid = float(np.linalg.norm(L @ sol - rhs))
    if resid > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
        raise Unsolvable("ad(N) g = X has no solution", residual=resid)
    return QuotMatrix(ring, sol.reshape(m, r, r))


def kk_pairing(N, p1: TangentPair, p2: TangentPair, fac: Factorization):
    """Tr(N [g, g']) where ad(N) g and ad(N) g' are the first-order variations of N."""
    N = as_quot(N, fac.ring)
    g1 = _ad_solve(N, _first_order_product(fac, p1))
    g2 = _ad_solve(N, _first_order_product(fac, p2))
    val = (N @ (g1 @ g2 - g2 @ g1)).trace()
    return _scalar_out(fac.ring, val)


def random_symmetric(rng, r: int, ring: QuotRing) -> QuotMatrix:
    X = rng.normal(size=(ring.m, r, r)) + 1j * rng.normal(size=(ring.m, r, r))
    return QuotMatrix(ring, X + np.transpose(X, (0, 2, 1)))


def random_tangent(fac: Factorization, rng) -> TangentPair:
    """Random element of ker d1.

    tau is a random symmetric matrix; xi is a random symmetric matrix corrected
    inside a random r-dimensional symmetric family so the r trace conditions hold.
    """
    ring, r, m = fac.ring, fac.r, fac.ring.m
    tau = random_symmetric(rng, r, ring)
    base = random_symmetric(rng, r, ring)
    fam = [random_symmetric(rng, r, ring) for _ in range(r)]
    zero = QuotMatrix(ring, np.zeros((1, r, r)))

    def traces(t, x):
        return d1(fac, TangentPair(t, x)).ravel()

    rhs = -traces(tau, base)
    cols = []
    for F in fam:
        for b in range(m):
            zb = np.zeros(b + 1, complex)
            zb[b] = 1.0
            cols.append(traces(zero, F.scale(zb)))
    coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), rhs, rcond=None)
    xi = base
    idx = 0
    for F in fam:
        for b in range(m):
            zb = np.zeros(b + 1, complex)
            zb[b] = coef[idx]
            xi = xi + F.scale(zb)
            idx += 1
    return TangentPair(tau, xi)
