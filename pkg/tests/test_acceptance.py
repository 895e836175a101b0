"""Desk-scale acceptance criteria. Each test prints one PASS/FAIL line with its measured worst case.

Run directly (python tests/test_acceptance.py) for the eight lines alone.
"""
import sys
import time

import numpy as np
import pytest

from unfoldiso.algebra import QuotMatrix, QuotRing, residue_at_infinity, residue_sum_check, residues_at_roots, unfolding_roots
from unfoldiso.config import FlowConfig, HypergeomConfig, MonodromyConfig
from unfoldiso.connection import random_connection
from unfoldiso.demo import GAUGE_TOL, run_demo
from unfoldiso.orbit import d0, d1, factorize, gauge_compare, kk_pairing, orbit_pairing, random_tangent, tangent_check
from unfoldiso.pipeline import flow_batch, monodromy_batch
from unfoldiso.unfolding import (
    annulus_grid,
    build_xi,
    channel_lift,
    curvature_residuals,
    irregular_lift_eps0,
    solve_adjusting_data,
)

RESULTS = {}


def emit(key, title, ok, detail, elapsed, limit):
    ok = bool(ok and elapsed < limit)
    line = f"{'PASS' if ok else 'FAIL'}  [{key}] {title}: {detail}; {elapsed:.2f}s (limit {limit:g}s)"
    RESULTS[key] = line
    return ok


def random_endo(rng, r, ring, spread=0.5):
    mu = np.exp(2j * np.pi * np.arange(r) / r) * (1 + 0.3 * np.arange(r))
    S = np.zeros((ring.m, r, r), complex)
    S[0] = np.eye(r) + spread * (rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
    S[1:] = spread * (rng.normal(size=(ring.m - 1, r, r)) + 1j * rng.normal(size=(ring.m - 1, r, r)))
    Sq = QuotMatrix(ring, S)
    N = Sq @ QuotMatrix.constant(ring, np.diag(mu)) @ Sq.inverse()
    return N, np.polynomial.polynomial.polyfromroots(mu)


RINGS = [(1, 0.0), (2, 0.0), (2, 0.3), (3, 0.0), (3, 0.3)]


def criterion_residues():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(500):
        m = int(rng.integers(2, 7))
        eps = complex(rng.uniform(0.3, 1) * np.exp(2j * np.pi * rng.uniform()))
        pts = unfolding_roots(m, eps) + 0.1 * abs(eps) * (rng.normal(size=m) + 1j * rng.normal(size=m))
        ls = [0, 0] + list(rng.integers(0, 2, m - 2))
        rng.shuffle(ls)
        worst = max(worst, abs(residue_sum_check(m, pts, ls)))
    worst_g = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 7))
        eps = complex(rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform()))
        A = rng.normal(size=(m + 2, 2, 2)) + 1j * rng.normal(size=(m + 2, 2, 2))
        terms = [residue_at_infinity(A, m, eps), *residues_at_roots(A, m, eps).values()]
        # relative to the largest summand: small eps makes the finite residues large and cancelling
        scale = max(1.0, max(float(np.max(np.abs(t))) for t in terms))
        worst_g = max(worst_g, float(np.max(np.abs(sum(terms)))) / scale)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and worst_g <= 1e-10
    return emit(1, "residue identities", ok, f"sum {worst:.1e} <= 1e-12, global {worst_g:.1e} <= 1e-10", dt, 1)


def criterion_factorization():
    t0 = time.perf_counter()
    worst_rt = worst_sym = worst_d = 0.0
    gauge_ok = tangent_ok = True
    for seed in range(100):
        rng = np.random.default_rng(seed)
        r = 1 + seed % 5
        ring = QuotRing.unfolding(*RINGS[seed % len(RINGS)])
        N, phi = random_endo(rng, r, ring)
        f1, f2 = factorize(N, phi, rng_seed=seed), factorize(N, phi, rng_seed=seed + 7919)
        scale = max(1.0, N.norm())
        worst_rt = max(worst_rt, (f1.N - N).norm() / scale**2)
        worst_sym = max(worst_sym, (f1.theta - f1.theta.T).norm(), (f1.kappa - f1.kappa.T).norm())
        gauge_ok &= N.T.poly_eval(list(gauge_compare(f1, f2))).is_unit()
        P = rng.normal(size=(r, ring.m)) + 1j * rng.normal(size=(r, ring.m))
        pair = d0(f1, P)
        worst_d = max(worst_d, float(np.max(np.abs(d1(f1, pair)))) / (scale ** (2 * r) * max(1.0, np.max(np.abs(P)))))
        tangent_ok &= tangent_check(f1, pair)
    dt = time.perf_counter() - t0
    ok = worst_rt <= 1e-10 and worst_sym <= 1e-12 and worst_d <= 1e-10 and gauge_ok and tangent_ok
    detail = (f"round trip {worst_rt:.1e}, symmetry {worst_sym:.1e}, d1 d0 {worst_d:.1e} (<= 1e-10), "
              f"gauge_compare {'ok' if gauge_ok else 'failed'}")
    return emit(2, "factorization suite", ok, detail, dt, 5)


def criterion_pairings():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(10_000 + seed)
        r = 1 + seed % 4
        ring = QuotRing.unfolding(*RINGS[seed % len(RINGS)])
        N, phi = random_endo(rng, r, ring)
        fac = factorize(N, phi, rng_seed=seed)
        p1, p2 = random_tangent(fac, rng), random_tangent(fac, rng)
        w = np.asarray(orbit_pairing(fac, p1, p2))
        kk = np.asarray(kk_pairing(N, p1, p2, fac))
        worst = max(worst, float(np.max(np.abs(w - kk))) / max(1.0, float(np.max(np.abs(w)))))
    dt = time.perf_counter() - t0
    return emit(3, "orbit pairing = KK pairing", worst <= 1e-9, f"{worst:.1e} <= 1e-9 over 100 pairs", dt, 5)


def criterion_xi():
    t0 = time.perf_counter()
    w = dict(trace=0.0, solve=0.0, res=0.0, recon=0.0)
    for seed in range(50):
        rng = np.random.default_rng(20_000 + seed)
        r, m = 1 + seed % 3, 1 + (seed // 3) % 4
        eps = [0.0, 0.2, 0.1 + 0.3j][seed % 3]
        conn = random_connection(rng, r, m, eps)
        fam = build_xi(conn)
        xs = max(1.0, float(np.max(np.abs(fam.xi))))
        w["trace"] = max(w["trace"], float(np.max(np.abs(fam.trace_residues()[:, : m - 1]), initial=0)) / xs)
        w["recon"] = max(w["recon"], fam.reconstruction_defect() / max(1.0, float(np.max(np.abs(conn.A)))))
        adj = solve_adjusting_data(fam)
        w["solve"] = max(w["solve"], float(np.max(adj.commutator_identity_defect(), initial=0)) / xs)
        w["res"] = max(w["res"], float(np.max(adj.residues_at_infinity()[adj.adjusted], initial=0)))
    dt = time.perf_counter() - t0
    ok = w["trace"] <= 1e-12 and w["recon"] <= 1e-12 and w["solve"] <= 1e-9 and w["res"] <= 1e-10
    detail = (f"trace residue {w['trace']:.1e}, reconstruction {w['recon']:.1e} (<= 1e-12 rel), "
              f"commutator {w['solve']:.1e} <= 1e-9, adjusted residue {w['res']:.1e} <= 1e-10")
    return emit(4, "Xi and adjusting data", ok, detail, dt, 10)


def criterion_curvature():
    t0 = time.perf_counter()
    worst, worst_s, through = 0.0, 0.0, []
    for seed in range(20):
        rng = np.random.default_rng(30_000 + seed)
        r, m, eps = 1 + seed % 3, 2 + (seed // 3) % 2, (0.05, 0.2)[seed % 2]
        conn = random_connection(rng, r, m, eps, scale=0.5)
        adj = solve_adjusting_data(build_xi(conn))
        lift = channel_lift(adj, int(rng.integers(r)), int(rng.integers(m - 1)))
        res = curvature_residuals(lift, annulus_grid(lift, 32))
        worst = max(worst, res["h0"], res["h1"])
    for seed in range(10):
        rng = np.random.default_rng(40_000 + seed)
        r, m = 2 + seed % 2, 2 + (seed // 2) % 2
        conn = random_connection(rng, r, m, 0.0, scale=0.5)
        adj = solve_adjusting_data(build_xi(conn))
        rep = irregular_lift_eps0(conn, adj, int(rng.integers(r)), int(rng.integers(m - 1))).report
        worst_s = max(worst_s, rep["identity_residual"])
        through.append(rep["through_order"])
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and worst_s <= 1e-9
    detail = (f"curvature {worst:.1e} <= 1e-8 on 20 lifts, "
              f"eps=0 series {worst_s:.1e} <= 1e-9 (orders {min(through)}..{max(through)})")
    return emit(5, "integrability", ok, detail, dt, 60)


def criterion_flow():
    t0 = time.perf_counter()
    res = flow_batch(FlowConfig(), seed=0)
    dt = time.perf_counter() - t0
    s = res["summary"]
    ok = all(c["pass"] for c in res["checks"])
    return emit(6, "flow covering", ok, f"{s['converged_ok']}/{s['starts']} = {s['fraction']:.3f} >= 0.95", dt, 60)


def criterion_monodromy():
    t0 = time.perf_counter()
    res = monodromy_batch(MonodromyConfig(instances=10), seed=100)
    dt = time.perf_counter() - t0
    by = lambda p: max((c["value"] for c in res["checks"] if c["name"].startswith(p)), default=0.0)  # noqa: E731
    ok = all(c["pass"] for c in res["checks"])
    detail = (f"rank one {by('rank_one'):.1e} <= 1e-8, local {by('local_monodromy'):.1e} <= 1e-6, "
              f"trace h-parts {by('trace_h_parts'):.1e} <= 1e-6 over 10 instances")
    return emit(7, "monodromy", ok, detail, dt, 120)


def criterion_demo():
    t0 = time.perf_counter()
    rep = run_demo(HypergeomConfig())
    dt = time.perf_counter() - t0
    gauge = max(c["value"] for run in rep["runs"] for c in run["checks"] if c["name"].startswith("gauge_relation"))
    failed = [f"{run['epsilon'].real:g}:{c['name']}" for run in rep["runs"] for c in run["checks"] if not c["pass"]]
    ok = rep["all_pass"] and gauge <= GAUGE_TOL
    status = "passes" if not failed else "fails " + ",".join(failed)
    detail = f"pipeline at eps 0.2/0.05/0 {status}, gauge relation {gauge:.1e} <= 1e-9"
    return emit(8, "hypergeometric demo", ok, detail, dt, 60)


CRITERIA = [criterion_residues, criterion_factorization, criterion_pairings, criterion_xi,
            criterion_curvature, criterion_flow, criterion_monodromy, criterion_demo]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__.removeprefix("criterion_"))
def test_acceptance(criterion, capsys):
    ok = criterion()
    with capsys.disabled():
        print("\n" + RESULTS[CRITERIA.index(criterion) + 1])
    assert ok


if __name__ == "__main__":
    flags = [c() for c in CRITERIA]
    print("\n".join(RESULTS[k] for k in sorted(RESULTS)))
    sys.exit(0 if all(flags) else 1)
