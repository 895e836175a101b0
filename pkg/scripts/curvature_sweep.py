"""Curvature residual of channel lifts across sizes and eps, plus the eps = 0 series identity."""
import argparse

import numpy as np

from unfoldiso.connection import random_connection
from unfoldiso.unfolding import (
    annulus_grid,
    build_xi,
    channel_lift,
    curvature_residuals,
    irregular_lift_eps0,
    solve_adjusting_data,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--order", type=int, default=24)
    args = ap.parse_args()
    print(f"{'r':>2} {'m':>2} {'eps':>6} {'worst residual':>15} {'rho1':>8}")
    for r in (1, 2, 3):
        for m in (2, 3):
            for eps in (0.0, 0.05, 0.2):
                worst, rho1 = 0.0, 0.0
                for seed in range(args.seeds):
                    conn = random_connection(np.random.default_rng(seed), r, m, eps, scale=0.5)
                    adj = solve_adjusting_data(build_xi(conn))
                    for l in range(r):
                        for j in range(m - 1):
                            if eps == 0:
                                worst = max(worst, irregular_lift_eps0(conn, adj, l, j, args.order).report["identity_residual"])
                            else:
                                lift = channel_lift(adj, l, j, args.order)
                                res = curvature_residuals(lift, annulus_grid(lift, 32))
                                worst, rho1 = max(worst, res["h0"]), max(rho1, lift.rho1)
                print(f"{r:>2} {m:>2} {eps:>6.2f} {worst:>15.2e} {rho1:>8.3f}")


if __name__ == "__main__":
    main()
