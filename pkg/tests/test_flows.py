import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfoldiso.algebra import Dual
from unfoldiso.connection import connection_from_N, make_spec, random_connection
from unfoldiso.errors import DeltaOutOfRange, NotConverged, PathTooClose, PreconditionError, ValidationError
from unfoldiso.flows import (
    OUTSIDE,
    CirclePath,
    FlowField,
    P,
    Q,
    SectorParams,
    SegmentPath,
    asymptotic_limit,
    big_loop,
    convergence_rate_check,
    flat_section_residual,
    integrate_flow,
    local_loops,
    local_monodromy_report,
    monodromy_invariance_check,
    rank_one_monodromy,
    rate_slope,
    region_contains,
    reversal_defect,
    sample_region,
    theta_for,
    transport,
)
from unfoldiso.unfolding import build_xi, isomonodromy_direction, solve_adjusting_data

# --- sector parameters and regions ---------------------------------------------------


def test_theta_examples():
    d = np.pi / 200
    assert theta_for(2, 0.0, 1, 2, d) == pytest.approx(-np.pi + d)
    assert theta_for(2, 0.0, 2, 2, d) == pytest.approx(-np.pi - d)
    assert theta_for(1, 0.3, 1, 3, d) == pytest.approx(-4 * np.pi / 3 - 0.6 + np.pi + d)
    with pytest.raises(DeltaOutOfRange):
        theta_for(1, 0.0, 1, 2, np.pi / 2)
    with pytest.raises(DeltaOutOfRange):
        theta_for(1, 0.0, 1, 2, 0.0)
    with pytest.raises(ValidationError):
        theta_for(1, 0.0, 3, 2, d)


def test_field_basics():
    F = FlowField(3, 0.2 * np.exp(0.4j), 0.7)
    assert np.max(np.abs(F(F.zeros))) < 1e-15
    for j in range(1, 4):
        assert abs(F(F.root(j))) < 1e-15
    x, y = F.vector(0.3, -0.1)
    assert complex(x, y) == pytest.approx(F(0.3 - 0.1j))
    with pytest.raises(ValidationError):
        FlowField(1, 0.1, 0.0)


def test_region_examples():
    p = SectorParams(2, 1, 0.0, 1)
    assert region_contains(1.5, 0.1, 0.0, p) == OUTSIDE
    assert region_contains(0.1, 0.5, 0.0, p) == OUTSIDE  # s beyond 1/3
    # psi far outside its window
    assert region_contains(0.1j, 0.1, 2.0, p) == OUTSIDE
    rng = np.random.default_rng(0)
    for part in (P, Q):
        pts, tags = sample_region(rng, p, 0.1, 0.0, 20, part=part)
        assert len(pts) == 20 and set(tags) == {part}
        assert all(region_contains(z, 0.1, 0.0, p, 1e-3) == part for z in pts)


def test_eta_positive():
    for m in (2, 3, 4):
        for xi in (1, 2):
            p = SectorParams(m, 1, 0.0, xi)
            assert 0 < p.eta <= 0.25


# --- integration -----------------------------------------------------------------------


def test_closed_form_eps0():
    F = FlowField(2, 0.0, np.pi)  # dz/dt = -z^2
    z0 = 0.2
    tr = integrate_flow(z0, F, stop_tol=1e-6)
    assert tr.converged and tr.j == 2 and tr.target == 0
    exact = z0 / (1 + z0 * tr.t)
    assert np.max(np.abs(tr.z - exact) / np.abs(exact)) < 1e-8


def test_start_at_zero_rejected():
    F = FlowField(2, 0.3, 0.0)
    with pytest.raises(PreconditionError):
        integrate_flow(F.root(1), F)


def test_rate_certificate():
    rng = np.random.default_rng(3)
    p = SectorParams(2, 1, 0.0, 1)
    F = p.field(0.1, 0.0)
    pts, _ = sample_region(rng, p, 0.1, 0.0, 3, part=P)
    for z0 in pts:
        tr = integrate_flow(z0, F)
        assert tr.converged and tr.j == 1
        assert convergence_rate_check(tr, F, j=1)
        assert rate_slope(tr, 2) >= 0.9 * 2 / 16
    short = integrate_flow(pts[0], F, max_steps=3)
    with pytest.raises(NotConverged):
        rate_slope(short, 2)
    with pytest.raises(NotConverged):
        convergence_rate_check(tr, F, j=2)


def test_rate_certificate_m3():
    rng = np.random.default_rng(5)
    p = SectorParams(3, 2, 0.0, 2)
    lo, hi = p.psi_window()
    psi = 0.5 * (lo + hi)
    F = p.field(0.05, psi)
    pts, _ = sample_region(rng, p, 0.05, psi, 4)
    for z0 in pts:
        tr = integrate_flow(z0, F)
        assert tr.converged and tr.j == 2
        assert convergence_rate_check(tr, F, j=2)


# --- transport -------------------------------------------------------------------------


def test_transport_zero_connection():
    A = np.zeros((2, 2, 2), complex)
    res = transport(A, 2, 0.3, big_loop(2, 0.3))
    assert np.allclose(res.M, np.eye(2), atol=1e-14)


@pytest.mark.parametrize("m,eps", [(1, 0.0), (2, 0.3), (3, 0.2 + 0.1j)])
def test_rank_one_big_loop(m, eps):
    lam = 0.37 - 0.21j
    A = np.zeros((m, 1, 1), complex)
    A[m - 1] = lam
    res = transport(A, m, eps, big_loop(m, eps))
    assert res.M[0, 0] == pytest.approx(rank_one_monodromy(lam), rel=1e-9)


def test_reversal_and_composition():
    conn = random_connection(np.random.default_rng(11), 2, 2, 0.3)
    loop = big_loop(2, 0.3)
    rep = reversal_defect(conn.A, 2, 0.3, loop)
    assert rep["ok"] and rep["defect"] < 1e-9
    a, b, c = 0.8 + 0j, 0.8j, -0.8 + 0.1j
    from unfoldiso.flows import ConcatPath

    M1 = transport(conn.A, 2, 0.3, SegmentPath(a, b)).M
    M2 = transport(conn.A, 2, 0.3, SegmentPath(b, c)).M
    M12 = transport(conn.A, 2, 0.3, ConcatPath((SegmentPath(a, b), SegmentPath(b, c)))).M
    assert np.allclose(M12, M2 @ M1, atol=1e-9)


def test_path_too_close():
    with pytest.raises(PathTooClose):
        transport(np.zeros((2, 1, 1), complex), 2, 0.3, CirclePath(0j, 0.3))


def test_local_loops_need_eps():
    with pytest.raises(PreconditionError):
        local_loops(2, 0.0)


@settings(max_examples=8)
@given(st.integers(0, 100), st.sampled_from([0.1, 0.25j]))
def test_local_monodromy(seed, eps):
    conn = random_connection(np.random.default_rng(seed), 2, 2, eps, scale=0.3)
    assert local_monodromy_report(conn)["max_defect"] <= 1e-8


def _direction(seed, r=2, m=2, eps=0.1, v=None):
    conn = random_connection(np.random.default_rng(seed), r, m, eps, scale=0.1)
    adj = solve_adjusting_data(build_xi(conn))
    if v is None:
        v = np.zeros((r, m), complex)
        v[:, : m - 1] = np.random.default_rng(seed + 1000).normal(size=(r, m - 1))
    return adj, isomonodromy_direction(adj, v)


def test_monodromy_zero_direction():
    adj, d = _direction(1, v=np.zeros((2, 2)))
    rep = monodromy_invariance_check(d)
    assert np.max(np.abs(rep["M1"])) == 0


def test_monodromy_invariance_and_commutator():
    _, d = _direction(2)
    rep = monodromy_invariance_check(d)
    assert rep["max_trace_h"] <= 1e-8 * max(1.0, rep["trace_h_scale"])
    assert rep["commutator_defect"] is not None and rep["commutator_defect"] <= 1e-8


def test_monodromy_rank_one_trace():
    _, d = _direction(3, r=1, m=3)
    rep = monodromy_invariance_check(d)
    assert abs(rep["trace_h_parts"][0]) <= 1e-10


def test_monodromy_linear_in_v():
    adj, d1 = _direction(4)
    v2 = 2 * d1.v
    d2 = isomonodromy_direction(adj, v2)
    r1, r2 = monodromy_invariance_check(d1), monodromy_invariance_check(d2)
    assert np.allclose(r2["M1"], 2 * r1["M1"], atol=1e-9)
    assert np.allclose(r2["M0"], r1["M0"], atol=1e-12)


# --- asymptotics along a flow -----------------------------------------------------------


def _flow(eps, seed=7):
    rng = np.random.default_rng(seed)
    conn = random_connection(rng, 2, 2, eps, scale=0.3)
    p = SectorParams(2, 1, 0.0, 1)
    F = p.field(eps, 0.0)
    pts, _ = sample_region(rng, p, eps, 0.0, 1)
    return conn, integrate_flow(pts[0], F, stop_tol=1e-9), F


def test_asymptotic_limit_unfolded():
    conn, tr, F = _flow(0.2)
    rep = asymptotic_limit(conn, tr, F)
    assert rep.consistent and rep.ratio_final < 1e-3
    assert rep.picard_change <= 1e-12
    assert flat_section_residual(conn, tr, rep)["residual"] <= 1e-5


def test_asymptotic_rank_one():
    A = np.array([[[0.1]], [[0.4 - 0.2j]]])
    spec = make_spec(1, 2, [0.4 - 0.2j], np.array([[0.1, 0.4 - 0.2j]]), 0.2)
    conn = connection_from_N(np.array([[0.4 - 0.2j]]), spec)
    assert np.allclose(conn.A, A)
    _, tr, F = _flow(0.2)
    rep = asymptotic_limit(conn, tr, F)
    assert rep.ratio_final == 0.0 and rep.iterations == 1


def test_asymptotic_requires_convergence():
    conn, tr, F = _flow(0.2)
    short = integrate_flow(tr.z[0], F, max_steps=2)
    with pytest.raises(NotConverged):
        asymptotic_limit(conn, short, F)


def test_asymptotic_transport_consistency_dual():
    # dual-number transport is the derivative of ordinary transport
    conn = random_connection(np.random.default_rng(6), 2, 2, 0.2, scale=0.3)
    X = np.random.default_rng(7).normal(size=conn.A.shape) * 0.1
    loop = big_loop(2, 0.2)
    Md = transport(Dual(conn.A, X), 2, 0.2, loop).M
    h = 1e-6
    Mp = transport(conn.A + h * X, 2, 0.2, loop).M
    Mm = transport(conn.A - h * X, 2, 0.2, loop).M
    assert np.allclose(Md.eps, (Mp - Mm) / (2 * h), atol=1e-6)
