"""Hypergeometric example over a range of eps: integrality margin, gauge defects, monodromy h-parts."""
import argparse

import numpy as np

from unfoldiso.config import HypergeomConfig
from unfoldiso.demo import hypergeom_connection, integrality_margin, run_epsilon


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="*", default=list(np.linspace(0.0, 0.3, 7)))
    ap.add_argument("--no-monodromy", action="store_true")
    args = ap.parse_args()
    cfg = HypergeomConfig()
    print(f"{'eps':>6} {'margin':>8} {'gauge':>9} {'conj':>9} {'worst check':>12} pass")
    for eps in args.eps:
        margin = integrality_margin(hypergeom_connection(cfg, eps))[0]
        run = run_epsilon(cfg, eps, monodromy=not args.no_monodromy)
        g = max(x["relation_defect"] for x in run["gauge"])
        c = max(x["conjugation_defect"] for x in run["gauge"])
        worst = max((ch["value"] / ch["tol"] for ch in run["checks"]
                     if ch["name"] != "integrality_margin" and isinstance(ch["value"], float) and ch["tol"]), default=0.0)
        print(f"{eps:>6.3f} {margin:>8.4f} {g:>9.1e} {c:>9.1e} {worst:>12.1e} {run['all_pass']}")


if __name__ == "__main__":
    main()
