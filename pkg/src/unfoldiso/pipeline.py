"""Shared pipeline steps behind the CLI commands and the demo, each returning named checks."""
from __future__ import annotations

import numpy as np

from .connection import UnfoldedConnection, local_data
from .errors import PreconditionError
from .unfolding import (
    DEFAULT_K,
    build_xi,
    channel_lift,
    curvature_residuals,
    irregular_lift_eps0,
    solve_adjusting_data,
)

EXACT_RTOL = 1e-12
CURVATURE_TOL = 1e-8
SERIES_TOL = 1e-9
RESIDUE_INF_TOL = 1e-10


def check(name: str, value: float, tol: float, **extra) -> dict:
    value = float(value)
    return {"name": name, "value": value, "tol": float(tol), "pass": bool(value <= tol), **extra}


def flag(name: str, ok: bool, value=None, tol=None, **extra) -> dict:
    """A check whose pass condition is not 'value <= tol'."""
    return {"name": name, "value": value, "tol": tol, "pass": bool(ok), **extra}


def all_pass(checks) -> bool:
    return all(c["pass"] for c in checks)


def _scale(arr) -> float:
    return max(1.0, float(np.max(np.abs(arr), initial=0.0)))


def unfold_pipeline(conn: UnfoldedConnection, K: int = DEFAULT_K, tol: float = 1e-9) -> dict:
    """Xi, adjusting data, Xi~ and one horizontal lift per adjusted channel (l, j)."""
    r, m = conn.r, conn.m
    checks = []
    loc = local_data(conn)
    checks.append(flag("local_data", loc["ok"]))
    fam = build_xi(conn)
    xscale = _scale(fam.xi)
    tr = fam.raw_trace_residues()[:, : m - 1]
    checks.append(check("xi_trace_residue", np.max(np.abs(tr), initial=0.0) / xscale, EXACT_RTOL))
    checks.append(check("xi_reconstruction", fam.reconstruction_defect() / _scale(conn.A), EXACT_RTOL))
    adj = solve_adjusting_data(fam, rtol=tol)
    checks.append(check("adjusting_solve_residual", np.max(adj.solve_residual), tol))
    res_inf = adj.residues_at_infinity()[adj.adjusted]
    checks.append(check("xitilde_residue_at_infinity", np.max(res_inf, initial=0.0), RESIDUE_INF_TOL))
    lifts = []
    for l in range(r):
        for j in range(m - 1):
            lift = channel_lift(adj, l, j, K)
            cur = curvature_residuals(lift)
            entry = {"l": l, "j": j, "rho1": lift.rho1, "rho2": lift.rho2, "B": lift.B, "curvature": cur}
            checks.append(check(f"curvature[{l},{j}]", cur["h0"], CURVATURE_TOL))
            if conn.spec.eps_zero:
                irr = irregular_lift_eps0(conn, adj, l, j, K)
                entry["series"] = irr.report
                checks.append(check(f"series_identity[{l},{j}]", irr.report["identity_residual"], SERIES_TOL,
                                    through_order=irr.report["through_order"]))
            lifts.append(entry)
    return {
        "local": loc,
        "xi": fam.xi,
        "psi": fam.psi,
        "R": adj.R,
        "xitilde": adj.xitilde,
        "commutant_dim": adj.commutant_dim,
        "lifts": lifts,
        "checks": checks,
        "adjusted": adj,
    }


def require(cond: bool, exc: type[PreconditionError], message: str, **detail) -> None:
    if not cond:
        raise exc(message, **detail)


def flow_batch(cfg, seed: int) -> dict:
    """Integrate cfg.n_starts region-sampled starts; round-robin over (m, |eps|)."""
    from .flows import Q, SectorParams, integrate_flow, rate_slope, sample_region

    rng = np.random.default_rng(seed)
    combos = [(m, float(abs(s))) for m in cfg.ms for s in cfg.epsilons]
    rows, trajs = [], []
    for i in range(cfg.n_starts):
        m, s = combos[i % len(combos)]
        j = int(rng.integers(1, m + 1))
        xi = int(rng.integers(1, 3))
        psi0 = float(rng.uniform(0, 2 * np.pi))
        p = SectorParams(m, j, psi0, xi)
        part = Q if (s > 0 and rng.uniform() < cfg.q_fraction) else "P"
        pts, tags = sample_region(rng, p, s, psi0, 1, margin=cfg.margin, part=part)
        field = p.field(s, psi0)
        target = field.root(j)
        traj = integrate_flow(pts[0], field, stop_tol=cfg.stop_tol)
        dist = abs(traj.z_end - target)
        slope = rate_slope(traj, m) if traj.converged and len(traj.t) >= 8 else float("nan")
        bound = cfg.rate_factor * m / 4**m
        ok = bool(traj.converged and dist <= cfg.target_tol and slope >= bound)
        rows.append({"run": i, "m": m, "s": s, "psi": psi0, "j": j, "xi": xi, "region": tags[0], "z0": pts[0],
                     "status": traj.status, "z_end": traj.z_end, "target": target, "distance": dist,
                     "slope": slope, "slope_bound": bound, "steps": traj.steps, "ok": ok})
        trajs.append((i, traj))
    n_ok = sum(r["ok"] for r in rows)
    frac = n_ok / max(1, len(rows))
    summary = {"starts": len(rows), "converged_ok": n_ok, "fraction": frac,
               "regions": {t: sum(r["region"] == t for r in rows) for t in ("P", "Q")}}
    checks = [flag("covering_fraction", frac >= 0.95, value=frac, tol=0.95)]
    return {"summary": summary, "runs": rows, "trajectories": trajs, "checks": checks}


def monodromy_batch(cfg, seed: int, tol: float = 1e-6, K: int = DEFAULT_K) -> dict:
    """Seeded instances: local monodromy, reversal sanity, h-parts of Tr(Mon^k) for an isomonodromy direction."""
    from .connection import random_connection
    from .flows import (
        big_loop,
        local_monodromy_report,
        monodromy_invariance_check,
        rank_one_monodromy,
        reversal_defect,
        transport,
    )
    from .unfolding import isomonodromy_direction

    r, m, eps = cfg.r, cfg.m, complex(cfg.epsilon)
    checks, out = [], []
    for i in range(cfg.instances):
        rng = np.random.default_rng(seed + i)
        conn = random_connection(rng, r, m, eps, scale=cfg.scale)
        adj = solve_adjusting_data(build_xi(conn))
        if cfg.v is None:
            v = np.zeros((r, m), complex)
            v[:, : m - 1] = rng.normal(size=(r, m - 1)) + 1j * rng.normal(size=(r, m - 1))
        else:
            v = np.array(cfg.v, complex)
        d = isomonodromy_direction(adj, v, K, check_linearity=False)
        inv = monodromy_invariance_check(d, radius=cfg.radius)
        rev = reversal_defect(conn.A, m, eps, big_loop(m, eps, d.lift.rho1))
        entry = {"instance": i, "seed": seed + i, "A": conn.A, "v": v, "invariance": inv, "reversal": rev}
        rel = inv["max_trace_h"] / max(1.0, inv["trace_h_scale"])
        checks.append(check(f"trace_h_parts[{i}]", rel, tol))
        checks.append(flag(f"reversal[{i}]", rev["ok"], value=rev["defect"], tol=2 * rev["estimate"]))
        if eps != 0:
            loc = local_monodromy_report(conn)
            entry["local"] = loc
            checks.append(check(f"local_monodromy[{i}]", loc["max_defect"], tol))
        out.append(entry)
    # rank one: A = lam z^(m-1), closed form exp(-2 pi i lam)
    lam = complex(np.random.default_rng(seed).normal() * 0.7 + 0.3j)
    A1 = np.zeros((m, 1, 1), complex)
    A1[m - 1] = lam
    M = transport(A1, m, eps, big_loop(m, eps)).M[0, 0]
    rank_one = {"lambda": lam, "M": complex(M), "closed_form": rank_one_monodromy(lam)}
    checks.append(check("rank_one_closed_form", abs(M - rank_one["closed_form"]), 1e-8))
    return {"instances": out, "rank_one": rank_one, "checks": checks}
