import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unfoldiso.algebra import QuotMatrix, QuotRing, matpoly_eval
from unfoldiso.connection import (
    N_from_connection,
    connection_from_A,
    connection_from_N,
    interpolation_psi,
    local_data,
    make_spec,
    random_connection,
    random_N,
    random_spec,
    residue_equality_defect,
    spectral_report,
)
from unfoldiso.errors import DuplicateMu, GenericityFailure, NotInjectiveAction, PhiNotAnnihilating, SpectralMismatch
from unfoldiso.orbit import factorize

EPS = st.sampled_from([0.0, 0.3, 0.2 + 0.1j, 1.0])


def test_make_spec_rank_one():
    spec = make_spec(1, 2, [0.0], [[0.4, -1.3]], 0.5)
    assert spec.lam[0] == pytest.approx(-1.3)


def test_make_spec_m1_lambda():
    l1, l2 = 0.25, -0.6 + 0.1j
    spec = make_spec(2, 1, [0, 1], [[l1], [l2 - l1]], 0.7)
    assert np.allclose(spec.lam, [l1, l2])
    with pytest.raises(GenericityFailure) as exc:
        make_spec(2, 1, [0, 1], [[l1], [0.0]], 0.7)
    assert exc.value.detail["pair"] == [0, 1]


def test_make_spec_errors():
    with pytest.raises(GenericityFailure):
        make_spec(2, 2, [0, 1], np.zeros((2, 2)), 0.3)
    with pytest.raises(DuplicateMu):
        make_spec(2, 2, [1, 1], np.ones((2, 2)), 0.3)


def test_connection_rank_one():
    spec = make_spec(1, 2, [0.8], [[0.3, -0.2]], 0.4)
    conn = connection_from_N(np.array([[0.8]]), spec)
    assert np.allclose(conn.A[:, 0, 0], [0.3, -0.2])


def test_connection_diagonal():
    c = np.array([[0.1, 0.5], [0.3, -0.2]])
    mu = [1.0, -2.0]
    spec = make_spec(2, 2, mu, c, 0.25)
    conn = connection_from_N(np.diag(mu).astype(complex), spec)
    nu = spec.nu_polys()
    for j in range(2):
        assert np.allclose(conn.A[j], np.diag(nu[:, j]))
    N = N_from_connection(conn.A, spec)
    assert np.allclose(N.data[0], np.diag(mu)) and np.allclose(N.data[1], 0, atol=1e-12)


def test_connection_errors():
    spec = make_spec(2, 2, [1.0, -1.0], [[0.1, 0.5], [0.3, -0.2]], 0.25)
    with pytest.raises(PhiNotAnnihilating):
        connection_from_N(np.diag([1.0, 2.0]).astype(complex), spec)
    # CRT values diag(1, -1) and I at the two roots: phi(N) = 0 but N is scalar at the second root
    N = QuotMatrix.from_values(spec.ring, [np.diag([1.0, -1.0]), np.eye(2)])
    assert N.poly_eval(spec.phi).norm() < 1e-12
    with pytest.raises(NotInjectiveAction):
        connection_from_N(N, spec)


def test_spectral_mismatch():
    spec = make_spec(2, 2, [1.0, -1.0], [[0.1, 0.5], [0.3, -0.2]], 0.25)
    with pytest.raises(SpectralMismatch):
        N_from_connection(np.stack([np.eye(2), np.eye(2)]), spec)


@given(st.integers(1, 4), st.integers(1, 4), EPS, st.integers(0, 500))
def test_crt_eigenvalues_and_roundtrip(r, m, eps, seed):
    rng = np.random.default_rng(seed)
    conn = random_connection(rng, r, m, eps)
    spec = conn.spec
    rep = spectral_report(conn.A, spec)
    assert rep["ok"]
    back = N_from_connection(conn.A, spec)
    assert back.allclose(conn.N, 1e-9 * max(1.0, conn.N.norm()) ** r)
    if not spec.eps_zero:
        nu = spec.nu_polys()
        for rho in spec.roots():
            ev = np.sort_complex(np.linalg.eigvals(matpoly_eval(conn.A, rho)))
            assert np.allclose(ev, np.sort_complex(np.polynomial.polynomial.polyval(rho, nu.T)), atol=1e-8)


@given(st.integers(1, 4), st.integers(1, 4), EPS, st.integers(0, 500))
def test_psi_interpolates(r, m, eps, seed):
    spec = random_spec(np.random.default_rng(seed), r, m, eps)
    psi = interpolation_psi(spec)
    ring = spec.ring
    for k, nuk in enumerate(spec.nu_polys()):
        acc, power = ring.zero(), ring.one()
        for i in range(r):
            acc = acc + ring.mul(psi[i], power)
            power = ring.mul(power, nuk)
        target = np.zeros(m, complex)
        target[0] = spec.mu[k]
        assert np.allclose(acc, target, atol=1e-8)


def test_local_data_rank_one_by_hand():
    c00, c01 = 0.7, -0.3
    spec = make_spec(1, 2, [0.0], [[c00, c01]], 1.0)
    conn = connection_from_N(np.array([[0.0]]), spec)
    rep = local_data(conn)
    res = {round(p["root"].real): p["residue"][0, 0] for p in rep["points"]}
    assert res[1] == pytest.approx((c00 + c01) / 2)
    assert res[-1] == pytest.approx((c00 - c01) / -2)
    assert rep["eigen_sums"][0] == pytest.approx(c01)
    assert rep["ok"]


def test_local_data_diagonal_eps0():
    c = np.array([[0.1, 0.5, 0.2], [0.3, -0.2, 0.9]])
    spec = make_spec(2, 3, [1.0, -1.0], c, 0.0)
    conn = connection_from_N(np.diag([1.0, -1.0]).astype(complex), spec)
    rep = local_data(conn)
    assert rep["branch"] == "irregular" and rep["ok"]
    assert np.allclose(rep["leading_exponents"], spec.nu_polys()[:, 0])


@given(st.integers(1, 4), st.integers(1, 4), st.sampled_from([0.3, 0.2 + 0.1j, 1.0]), st.integers(0, 500))
def test_residue_equality(r, m, eps, seed):
    conn = random_connection(np.random.default_rng(seed), r, m, eps)
    assert residue_equality_defect(conn.spec) <= 1e-10 * max(1.0, np.max(np.abs(conn.spec.lam)))
    assert local_data(conn)["ok"]


def test_factorization_composes(rng):
    spec = random_spec(rng, 3, 2, 0.3)
    N = random_N(rng, spec)
    conn = connection_from_N(N, spec)
    fac = factorize(conn.N, spec.phi)
    assert fac.N.allclose(conn.N, 1e-9)
    assert fac.theta.allclose(fac.theta.T, 1e-12)


def test_connection_from_A_roundtrip(rng):
    conn = random_connection(rng, 2, 3, 0.2)
    again = connection_from_A(conn.A, conn.spec)
    assert again.N.allclose(conn.N, 1e-9)
    assert QuotRing.unfolding(3, 0.2).m == 3
