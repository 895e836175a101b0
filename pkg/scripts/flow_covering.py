"""Flow covering batch: converged fraction and rate certificates per (m, eps)."""
import argparse
from collections import defaultdict

from unfoldiso.config import FlowConfig
from unfoldiso.pipeline import flow_batch
from unfoldiso.serialize import write_trajectories_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--starts", type=int, default=200)
    ap.add_argument("--csv", help="write trajectories here")
    args = ap.parse_args()
    res = flow_batch(FlowConfig(n_starts=args.starts), args.seed)
    groups = defaultdict(list)
    for row in res["runs"]:
        groups[(row["m"], float(abs(row["s"])))].append(row)
    print(f"{'m':>2} {'s':>6} {'n':>4} {'ok':>4} {'min slope/bound':>16}")
    for (m, s), rows in sorted(groups.items()):
        ratios = [row["slope"] / row["slope_bound"] for row in rows if row["slope"] == row["slope"]]
        print(f"{m:>2} {s:>6.3f} {len(rows):>4} {sum(r['ok'] for r in rows):>4} {min(ratios, default=float('nan')):>16.3g}")
    print("summary:", res["summary"])
    if args.csv:
        write_trajectories_csv(args.csv, res["trajectories"])


if __name__ == "__main__":
    main()
