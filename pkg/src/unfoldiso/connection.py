"""(nu, mu)-connections d + A(z) dz/(z^m - eps^m) on the trivial rank-r bundle.

``ExponentSpec`` packages the exponent data; ``UnfoldedConnection`` holds the
connection matrix A (degree < m in z) together with the endomorphism N over
C[z]/(z^m - eps^m) that it restricts to.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npp

from .algebra.poly import matpoly_eval, unfolding_roots
from .algebra.quotient import QuotMatrix, QuotRing, as_quot
from .algebra.series import formal_diagonalize, match_order
from .errors import (
    DuplicateMu,
    GenericityFailure,
    InterpolationSingular,
    NonUnit,
    NotInjectiveAction,
    PhiNotAnnihilating,
    ResonantLeading,
    ShapeMismatch,
    SpectralMismatch,
)

GENERIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ExponentSpec:
    r: int
    m: int
    mu: np.ndarray
    c: np.ndarray  # c[l, j]: coefficient of z^j T^l in nu
    epsilon: complex
    lam: np.ndarray = field(default=None)

    @property
    def ring(self) -> QuotRing:
        return QuotRing.unfolding(self.m, self.epsilon)

    @property
    def eps_zero(self) -> bool:
        return self.epsilon == 0

    @property
    def phi(self) -> np.ndarray:
        return npp.polyfromroots(self.mu)

    def nu_polys(self) -> np.ndarray:
        """nu(mu_k)(z) as rows of z-coefficients, shape (r, m)."""
        V = np.vander(self.mu, self.r, increasing=True)  # V[k, l] = mu_k^l
        return V @ self.c

    def roots(self) -> np.ndarray:
        return unfolding_roots(self.m, self.epsilon)

    def with_epsilon(self, eps: complex) -> "ExponentSpec":
        return make_spec(self.r, self.m, self.mu, self.c, eps)

    def with_c(self, c) -> "ExponentSpec":
        return make_spec(self.r, self.m, self.mu, c, self.epsilon)


def make_spec(r, m, mu, c, epsilon, tol: float = GENERIC_TOL) -> ExponentSpec:
    mu = np.asarray(mu, complex).reshape(-1)
    c = np.asarray(c, complex)
    if r < 1 or m < 1:
        raise ShapeMismatch("r and m must be positive", r=r, m=m)
    if mu.shape != (r,) or c.shape != (r, m):
        raise ShapeMismatch("mu must have length r and c shape (r, m)", mu=mu.shape, c=c.shape)
    for k in range(r):
        for k2 in range(k + 1, r):
            if abs(mu[k] - mu[k2]) <= tol * max(1.0, abs(mu[k])):
                raise DuplicateMu("mu entries must be distinct", pair=[k, k2])
    eps = complex(epsilon)
    spec = ExponentSpec(r, m, mu, c, eps)
    nu = spec.nu_polys()
    pts = np.zeros(1, complex) if eps == 0 else spec.roots()
    for p_idx, rho in enumerate(pts):
        vals = npp.polyval(rho, nu.T)
        for k in range(r):
            for k2 in range(k + 1, r):
                if abs(vals[k] - vals[k2]) <= tol * max(1.0, abs(vals[k])):
                    raise GenericityFailure(
                        "nu(mu_k) coincide at a divisor point",
                        pair=[k, k2],
                        root_index=p_idx,
                        root=[rho.real, rho.imag],
                    )
    lam = nu[:, m - 1].copy()
    object.__setattr__(spec, "lam", lam)
    return spec


def residue_equality_defect(spec: ExponentSpec) -> float:
    """max_k |lambda_k - sum_p res_p nu(mu_k) dz/q| (eps != 0)."""
    nu = spec.nu_polys()
    rts = spec.roots()
    qp = spec.m * rts ** (spec.m - 1)
    sums = (npp.polyval(rts, nu.T) / qp).sum(axis=1) if spec.m > 1 else npp.polyval(rts, nu.T)[:, 0]
    return float(np.max(np.abs(sums - spec.lam)))


@dataclass(frozen=True, eq=False)
class UnfoldedConnection:
    spec: ExponentSpec
    A: np.ndarray  # (m, r, r): A(z) = sum_j A[j] z^j
    N: QuotMatrix

    @property
    def r(self) -> int:
        return self.spec.r

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def epsilon(self) -> complex:
        return self.spec.epsilon

    def q(self, z):
        return z**self.m - self.epsilon**self.m

    def form(self, z) -> np.ndarray:
        """A(z)/q(z)."""
        return matpoly_eval(self.A, z) / self.q(z)


def injectivity_rank(N: QuotMatrix) -> int:
    """Rank of P -> P(N) on polynomials of T-degree < r with ring coefficients."""
    vecs = []
    for i in range(N.r):
        Ni = N.power(i)
        for b in range(N.m):
            zb = np.zeros(b + 1, complex)
            zb[b] = 1.0
            vecs.append(Ni.scale(zb).data.ravel())
    s = np.linalg.svd(np.stack(vecs, axis=1), compute_uv=False)
    return int(np.sum(s > 1e-10 * s[0]))


def connection_from_N(N, spec: ExponentSpec) -> UnfoldedConnection:
    N = as_quot(N, spec.ring)
    if N.r != spec.r or N.m != spec.m:
        raise ShapeMismatch("N does not match the spec", r=N.r, m=N.m)
    defect = N.poly_eval(spec.phi).norm()
    if defect > 1e-9 * max(1.0, N.norm()) ** spec.r:
        raise PhiNotAnnihilating("phi_mu(N) != 0", defect=defect)
    if injectivity_rank(N) < spec.r * spec.m:
        raise NotInjectiveAction("P(T) -> P(N) is not injective")
    A = N.poly_eval(list(spec.c)).data
    return UnfoldedConnection(spec, A, N)


def spectral_report(A: np.ndarray, spec: ExponentSpec, tol: float = GENERIC_TOL) -> dict:
    """Compare the spectrum of A on the divisor with nu(mu_k)."""
    ring = spec.ring
    Abar = QuotMatrix(ring, A)
    nu = spec.nu_polys()
    prod = QuotMatrix.identity(ring, spec.r)
    for k in range(spec.r):
        prod = prod @ (Abar - QuotMatrix.identity(ring, spec.r).scale(nu[k]))
    scale = max(1.0, Abar.norm(), float(np.max(np.abs(nu))))
    ring_defect = prod.norm() / scale**spec.r
    pts = np.zeros(1, complex) if spec.eps_zero else spec.roots()
    points = []
    ok = ring_defect <= 1e-9
    for rho in pts:
        w = np.linalg.eigvals(matpoly_eval(A, rho))
        target = npp.polyval(rho, nu.T)
        w = w[np.argsort(w.real, kind="stable")]
        perm, good, worst = match_order(w, target, tol)
        ok = ok and good
        points.append({"root": rho, "eigenvalues": w[perm], "expected": target, "ok": good, "mismatch": worst})
    return {"ok": bool(ok), "ring_defect": float(ring_defect), "points": points}


def _ring_poly_mul_linear(poly, a, ring):
    """(T - a) * poly for a T-polynomial with ring coefficients (list of arrays)."""
    out = [ring.zero() for _ in range(len(poly) + 1)]
    for i, ci in enumerate(poly):
        out[i + 1] = out[i + 1] + ci
        out[i] = out[i] - ring.mul(a, ci)
    return out


def interpolation_psi(spec: ExponentSpec) -> np.ndarray:
    """psi with psi(nu(mu_k)) = mu_k in C[z]/(q); shape (r, m), row i is the T^i coefficient."""
    ring = spec.ring
    nu = spec.nu_polys()
    r = spec.r
    psi = [ring.zero() for _ in range(r)]
    for k in range(r):
        basis = [ring.one()]
        for k2 in range(r):
            if k2 == k:
                continue
            diff = nu[k] - nu[k2]
            try:
                inv = ring.inv(diff)
            except NonUnit:
                raise InterpolationSingular("nu(mu_k) - nu(mu_k') is not a unit", pair=[k, k2]) from None
            basis = _ring_poly_mul_linear(basis, nu[k2], ring)
            basis = [ring.mul(inv, b) for b in basis]
        for i in range(r):
            psi[i] = psi[i] + spec.mu[k] * basis[i]
    return np.array(psi)


def N_from_connection(A, spec: ExponentSpec) -> QuotMatrix:
    A = np.asarray(A, complex)
    if A.ndim == 2:
        A = A[None]
    if A.shape[1:] != (spec.r, spec.r) or A.shape[0] > spec.m:
        raise ShapeMismatch("A must have shape (<=m, r, r)", shape=A.shape)
    rep = spectral_report(A, spec)
    if not rep["ok"]:
        raise SpectralMismatch(
            "spectrum of A on the divisor differs from nu(mu_k)",
            ring_defect=rep["ring_defect"],
            mismatch=[p["mismatch"] for p in rep["points"]],
        )
    psi = interpolation_psi(spec)
    return QuotMatrix(spec.ring, A).poly_eval(list(psi))


def connection_from_A(A, spec: ExponentSpec) -> UnfoldedConnection:
    from .algebra.poly import pad_to

    A = pad_to(np.asarray(A, complex), spec.m)
    return UnfoldedConnection(spec, A, N_from_connection(A, spec))


def local_data(conn: UnfoldedConnection) -> dict:
    """Residues and exponents at the divisor, with pass/fail flags."""
    spec = conn.spec
    nu = spec.nu_polys()
    m, r = spec.m, spec.r
    report: dict = {"epsilon": spec.epsilon, "lambda": spec.lam}
    if not spec.eps_zero:
        rows = []
        sums = np.zeros(r, complex)
        ok = True
        for rho in spec.roots():
            qp = m * rho ** (m - 1)
            res = matpoly_eval(conn.A, rho) / qp
            w = np.linalg.eigvals(res)
            w = w[np.argsort(w.real, kind="stable")]
            expected = npp.polyval(rho, nu.T) / qp
            perm, good, worst = match_order(w, expected)
            w = w[perm]
            sums += w
            ok = ok and good
            rows.append({"root": rho, "residue": res, "eigenvalues": w, "expected": expected, "ok": good})
        lam_ok = bool(np.max(np.abs(sums - spec.lam)) <= 1e-10 * max(1.0, np.max(np.abs(spec.lam))))
        report.update(branch="regular", points=rows, eigen_sums=sums, lambda_ok=lam_ok, ok=bool(ok and lam_ok))
        return report
    try:
        _, D = formal_diagonalize(conn.A, m, m, leading=nu[:, 0])
    except ResonantLeading as exc:
        report.update(branch="irregular", ok=False, error=exc.to_dict())
        return report
    ring_eigs = D.T  # (r, m)
    defect = float(np.max(np.abs(ring_eigs - nu)))
    scale = max(1.0, float(np.max(np.abs(nu))))
    ok = defect <= 1e-9 * scale
    lam_ok = bool(np.max(np.abs(ring_eigs[:, m - 1] - spec.lam)) <= 1e-9 * scale)
    report.update(
        branch="irregular",
        leading_exponents=nu[:, 0],
        ring_eigenvalues=ring_eigs,
        expected=nu,
        defect=defect,
        lambda_ok=lam_ok,
        ok=bool(ok and lam_ok),
    )
    return report


def random_spec(rng, r: int, m: int, eps: complex, scale: float = 1.0) -> ExponentSpec:
    """Seeded random spec; mu well separated, c of modest size."""
    for _ in range(100):
        mu = np.exp(2j * np.pi * (np.arange(r) + rng.uniform(-0.2, 0.2, r)) / max(r, 1)) * rng.uniform(0.6, 1.2, r)
        c = scale * (rng.normal(size=(r, m)) + 1j * rng.normal(size=(r, m))) / np.sqrt(2)
        try:
            return make_spec(r, m, mu, c, eps, tol=1e-3)
        except GenericityFailure:
            continue
    raise RuntimeError("could not draw a generic spec")


def random_N(rng, spec: ExponentSpec, spread: float = 0.5) -> QuotMatrix:
    """N = S diag(mu) S^-1 with S(z) = I + (random) over the quotient ring."""
    ring = spec.ring
    r, m = spec.r, spec.m
    for _ in range(100):
        S = np.zeros((m, r, r), complex)
        S[0] = np.eye(r) + spread * (rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
        if m > 1:
            S[1:] = spread * (rng.normal(size=(m - 1, r, r)) + 1j * rng.normal(size=(m - 1, r, r)))
        Sq = QuotMatrix(ring, S)
        if not Sq.is_unit():
            continue
        N = Sq @ QuotMatrix.constant(ring, np.diag(spec.mu)) @ Sq.inverse()
        if injectivity_rank(N) == r * m:
            return N
    raise RuntimeError("could not draw an injective N")


def random_connection(rng, r: int, m: int, eps: complex, scale: float = 1.0, spread: float = 0.5):
    spec = random_spec(rng, r, m, eps, scale)
    return connection_from_N(random_N(rng, spec, spread), spec)
