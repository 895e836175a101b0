"""Confluence of a 2x2 hypergeometric system: (A0 + A1 z) dz / (z^2 - eps^2) as eps -> 0.

One frame S(z) = S0 + S1 z is drawn once from the seed; for every eps the
endomorphism N = S diag(mu) S^-1 is taken in C[z]/(z^2 - eps^2) and
A = nu(N). The family is therefore continuous in eps, and the run at eps = 0
exercises the irregular branch.
"""
from __future__ import annotations

import numpy as np

from .algebra.dual import Dual
from .algebra.quotient import QuotMatrix, QuotRing
from .config import HypergeomConfig
from .connection import UnfoldedConnection, connection_from_N, make_spec
from .errors import IntegralityViolation, PreconditionError
from .flows import local_monodromy_report, monodromy_invariance_check
from .pipeline import all_pass, check, flag, unfold_pipeline
from .unfolding import DEFAULT_K, commutator_kernel, fold_commutator, isomonodromy_direction

INTEGRALITY_TOL = 1e-6
GAUGE_TOL = 1e-9
MONODROMY_TOL = 1e-6
KERNEL_DIM = 5  # span of (A0, A1), (A1, 0), (0, A0), (I, 0), (0, I)


def frame(cfg: HypergeomConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.frame_seed)
    noise = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    S = cfg.spread * noise
    S[0] += np.eye(2)
    S[1] *= cfg.spread_z / cfg.spread if cfg.spread else 0.0
    return S


def hypergeom_connection(cfg: HypergeomConfig, eps: complex) -> UnfoldedConnection:
    spec = make_spec(2, 2, cfg.mu, np.array(cfg.c, complex), eps)
    ring = QuotRing.unfolding(2, eps)
    S = QuotMatrix(ring, frame(cfg))
    if not S.is_unit():
        raise PreconditionError("frame is not invertible over the quotient ring", epsilon=complex(eps))
    N = S @ QuotMatrix.constant(ring, np.diag(np.asarray(cfg.mu, complex))) @ S.inverse()
    return connection_from_N(N, spec)


def spec_section(cfg: HypergeomConfig, eps: complex) -> dict:
    """A 'spec' configuration section with explicit coefficients, usable by validate and unfold."""
    conn = hypergeom_connection(cfg, eps)
    return {"r": 2, "m": 2, "epsilon": complex(eps), "mu": list(cfg.mu), "c": np.array(cfg.c, complex), "A": conn.A}


def integrality_margin(conn: UnfoldedConnection) -> tuple[float, np.ndarray]:
    """min over (k1, k2) of dist(lambda_k1 - rho_k2, Z), rho = eig(A1) (exponents at infinity)."""
    rho = np.linalg.eigvals(conn.A[-1])
    d = np.subtract.outer(conn.spec.lam, rho)
    return float(np.min(np.abs(d - np.round(d.real)))), rho


def require_generic(conn: UnfoldedConnection) -> np.ndarray:
    margin, rho = integrality_margin(conn)
    if margin < INTEGRALITY_TOL:
        raise IntegralityViolation("lambda_k1 - rho_k2 is an integer; the system is reducible",
                                   margin=margin, lam=conn.spec.lam.tolist(), rho=rho.tolist())
    return rho


def gauge_family(A: np.ndarray) -> np.ndarray:
    """Columns (a, b, c, x, y) of the pairs (dR0, dR1) = (aA0 + bA1 + xI, cA0 + aA1 + yI)."""
    A0, A1 = A
    I2, Z = np.eye(2), np.zeros((2, 2))
    pairs = [(A0, A1), (A1, Z), (Z, A0), (I2, Z), (Z, I2)]
    return np.stack([np.stack(p).ravel() for p in pairs], axis=1)


def gauge_relation(adj, l: int, coeffs) -> dict:
    """Change the adjusting data of channel (l, 0) by the kernel element with parameters coeffs.

    With dR = R - R' = (aA0 + bA1 + xI, cA0 + aA1 + yI) one gets
    Xi~ - Xi~' = -(b - eps^2 c)[A0, A1], and conjugating by G = I + h beta A1
    takes A + h Xi~ to A + h Xi~'.
    """
    conn = adj.conn
    A = conn.A
    A0, A1 = A
    eps2 = conn.epsilon**2
    F = gauge_family(A)
    K = commutator_kernel(A).reshape(-1, 8)
    fit = np.linalg.lstsq(F, K.T, rcond=None)
    span_resid = float(np.max(np.abs(F @ fit[0] - K.T), initial=0.0))
    a, b, c, x, y = coeffs
    dR = (F @ np.array([a, b, c, x, y], complex)).reshape(2, 2, 2)
    R = adj.R[l, 0]
    Rp = R - dR
    Xi = adj.base.xi[l, 0]
    Xt = adj.xitilde[l, 0]
    Xtp = Xi - fold_commutator(A, Rp, conn.spec.ring.modulus)
    beta = b - eps2 * c
    comm = A0 @ A1 - A1 @ A0
    diff = Xt - Xtp
    expected = np.zeros_like(diff)
    expected[0] = -beta * comm
    G = Dual(np.eye(2), beta * A1)
    Ginv = Dual(np.eye(2), -beta * A1)
    conj = max(float(np.max(np.abs(((Ginv @ Dual(A[k], Xt[k]) @ G) - Dual(A[k], Xtp[k])).eps))) for k in range(2))
    scale = max(1.0, float(np.max(np.abs(comm))) * max(1.0, abs(beta)))
    return {
        "l": l,
        "coefficients": {"a": a, "b": b, "c": c, "x": x, "y": y},
        "beta": beta,
        "kernel_dim": int(K.shape[0]),
        "kernel_span_residual": span_resid,
        "Rprime": Rp,
        "xitilde_prime": Xtp,
        "top_coefficient": float(np.max(np.abs(Xtp[1]))),
        "relation_defect": float(np.max(np.abs(diff - expected))) / scale,
        "opposite_sign_gap": float(np.max(np.abs(diff + expected))) / scale,
        "conjugation_defect": conj / scale,
    }


def _exponents(conn: UnfoldedConnection, rho: np.ndarray, loc: dict) -> dict:
    out = {"lambda": conn.spec.lam, "infinity": -rho}
    if conn.spec.eps_zero:
        out["irregular_z0"] = conn.spec.nu_polys()
    else:
        out["points"] = [{"root": p["root"], "exponents": p["eigenvalues"]} for p in loc["points"]]
    return out


def run_epsilon(cfg: HypergeomConfig, eps: complex, K: int = DEFAULT_K, tol: float = 1e-9,
                monodromy: bool = True) -> dict:
    conn = hypergeom_connection(cfg, eps)
    rho = require_generic(conn)
    pipe = unfold_pipeline(conn, K, tol)
    checks = list(pipe["checks"])
    adj = pipe["adjusted"]
    margin = integrality_margin(conn)[0]
    checks.append(flag("integrality_margin", margin >= INTEGRALITY_TOL, value=margin, tol=INTEGRALITY_TOL))
    mono = {}
    if monodromy:
        if not conn.spec.eps_zero:
            loc = local_monodromy_report(conn)
            mono["local"] = loc
            checks.append(check("local_monodromy", loc["max_defect"], MONODROMY_TOL))
        mono["big_loop"] = []
        for l in range(2):
            v = np.zeros((2, 2), complex)
            v[l, 0] = 1.0
            rep = monodromy_invariance_check(isomonodromy_direction(adj, v, K, check_linearity=False))
            mono["big_loop"].append({"v": v, **rep})
            rel = rep["max_trace_h"] / max(1.0, rep["trace_h_scale"])
            checks.append(check(f"trace_h_parts[{l},0]", rel, MONODROMY_TOL))
            if rep["commutator_defect"] is not None:
                rel_c = rep["commutator_defect"] / max(1.0, rep["trace_h_scale"])
                checks.append(check(f"monodromy_commutator[{l},0]", rel_c, MONODROMY_TOL))
    gauge = [gauge_relation(adj, l, cfg.gauge_coeffs) for l in range(2)]
    for g in gauge:
        l = g["l"]
        checks.append(check(f"gauge_kernel_dim[{l}]", abs(g["kernel_dim"] - KERNEL_DIM), 0))
        checks.append(check(f"gauge_kernel_span[{l}]", g["kernel_span_residual"], GAUGE_TOL))
        checks.append(check(f"gauge_top_coefficient[{l}]", g["top_coefficient"], GAUGE_TOL))
        checks.append(check(f"gauge_relation[{l}]", g["relation_defect"], GAUGE_TOL))
        checks.append(check(f"gauge_conjugation[{l}]", g["conjugation_defect"], GAUGE_TOL))
    return {
        "epsilon": complex(eps),
        "A": conn.A,
        "exponents": _exponents(conn, rho, pipe["local"]),
        "xitilde": pipe["xitilde"],
        "curvature": [{"l": e["l"], "j": e["j"], **e["curvature"], **({"series": e["series"]} if "series" in e else {})}
                      for e in pipe["lifts"]],
        "monodromy": mono,
        "gauge": gauge,
        "checks": checks,
        "all_pass": all_pass(checks),
    }


def run_demo(cfg: HypergeomConfig | None = None, K: int = DEFAULT_K, tol: float = 1e-9, epsilons=None,
             monodromy: bool = True) -> dict:
    cfg = cfg or HypergeomConfig()
    eps_list = cfg.epsilons if epsilons is None else tuple(epsilons)
    runs = [run_epsilon(cfg, complex(e), K, tol, monodromy) for e in eps_list]
    return {"mu": cfg.mu, "c": cfg.c, "frame_seed": cfg.frame_seed, "runs": runs,
            "all_pass": all(r["all_pass"] for r in runs)}


def narrative(report: dict) -> str:
    """Human-readable summary of a demo report."""
    lines = []
    for run in report["runs"]:
        eps = run["epsilon"]
        lines.append(f"eps = {eps.real:g}{eps.imag:+g}i")
        ex = run["exponents"]
        lines.append(f"  lambda = {np.round(ex['lambda'], 6)}  at infinity: {np.round(ex['infinity'], 6)}")
        for p in ex.get("points", []):
            lines.append(f"  at z = {np.round(p['root'], 6)}: {np.round(p['exponents'], 6)}")
        if "irregular_z0" in ex:
            lines.append(f"  irregular exponents at 0 (z-coefficients): {np.round(ex['irregular_z0'], 6).tolist()}")
        for g in run["gauge"]:
            lines.append(f"  gauge change on channel ({g['l']},0): beta = {np.round(g['beta'], 6)}, "
                         f"relation defect {g['relation_defect']:.1e}, conjugation defect {g['conjugation_defect']:.1e}")
        bad = [c["name"] for c in run["checks"] if not c["pass"]]
        lines.append(f"  checks: {len(run['checks']) - len(bad)}/{len(run['checks'])} pass" + (f"; failing {bad}" if bad else ""))
    lines.append("all checks pass" if report["all_pass"] else "SOME CHECKS FAIL")
    return "\n".join(lines)
