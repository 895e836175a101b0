"""Command-line driver.

Exit codes: 0 success, 2 validation failure (bad input or a failed check),
3 mathematical precondition failure, 64 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import MAX_ORDER, RunConfig, load_config
from .connection import (
    connection_from_A,
    connection_from_N,
    local_data,
    make_spec,
    random_N,
    residue_equality_defect,
    spectral_report,
)
from .errors import PreconditionError, UnfoldError, ValidationError
from .pipeline import all_pass, check, flag, flow_batch, monodromy_batch, unfold_pipeline
from .serialize import dumps, write_json, write_trajectories_csv

EXIT_OK, EXIT_VALIDATION, EXIT_PRECONDITION, EXIT_USAGE = 0, 2, 3, 64
COMMANDS = ("validate", "unfold", "flow", "monodromy", "hypergeom-demo")

log = logging.getLogger("unfoldiso")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unfoldiso", description="Unfolded connections, horizontal lifts and flows.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--tol", type=float)
    p.add_argument("--order", type=int, help=f"truncation order K (1..{MAX_ORDER})")
    p.add_argument("--epsilon", type=float, action="append", help="hypergeom-demo: eps value (repeatable)")
    p.add_argument("--quiet", action="store_true")
    return p


def _connection(cfg: RunConfig):
    sc = cfg.spec
    if sc is None:
        raise ValidationError("this command needs a 'spec' section in the configuration")
    spec = make_spec(sc.r, sc.m, np.array(sc.mu), sc.c_array, sc.epsilon)
    if sc.A is not None:
        return connection_from_A(sc.A_array, spec)
    return connection_from_N(random_N(np.random.default_rng(cfg.seed), spec, sc.spread), spec)


def cmd_validate(cfg: RunConfig) -> dict:
    conn = _connection(cfg)
    spec = conn.spec
    checks = []
    spr = spectral_report(conn.A, spec)
    checks.append(flag("spectrum_on_divisor", spr["ok"], value=spr["ring_defect"]))
    loc = local_data(conn)
    checks.append(flag("local_data", loc["ok"]))
    if not spec.eps_zero:
        checks.append(check("residue_sum", residue_equality_defect(spec), 1e-12 * max(1.0, float(np.max(np.abs(spec.lam))))))
    return {"spec": {"r": spec.r, "m": spec.m, "epsilon": spec.epsilon, "mu": spec.mu, "c": spec.c, "lambda": spec.lam},
            "A": conn.A, "spectral": spr, "local": loc, "checks": checks}


def cmd_unfold(cfg: RunConfig) -> dict:
    conn = _connection(cfg)
    out = unfold_pipeline(conn, cfg.order, cfg.tol)
    out.pop("adjusted")
    out["A"] = conn.A
    out["order"] = cfg.order
    return out


def cmd_flow(cfg: RunConfig) -> dict:
    return flow_batch(cfg.flow, cfg.seed)


def cmd_monodromy(cfg: RunConfig) -> dict:
    return monodromy_batch(cfg.monodromy, cfg.seed, cfg.monodromy.check_tol, cfg.order)


def cmd_hypergeom_demo(cfg: RunConfig, epsilons=None) -> dict:
    from .demo import run_demo

    rep = run_demo(cfg.hypergeom, cfg.order, cfg.tol, epsilons)
    rep["checks"] = [dict(c, name=f"eps={run['epsilon'].real:g}:{c['name']}") for run in rep["runs"] for c in run["checks"]]
    return rep


def _emit(cfg: RunConfig, command: str, result: dict, out_dir: Path | None) -> None:
    if out_dir is None:
        return
    trajs = result.pop("trajectories", None)
    if trajs is not None:
        write_trajectories_csv(out_dir / "trajectories.csv", trajs)
    if command == "monodromy":
        write_json(out_dir / "monodromy.json", result)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"error": "UsageError", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    out_dir = Path(args.out) if args.out else None
    report: dict = {"command": args.command, "version": __version__}
    try:
        cfg = load_config(args.config, args.command)
        cfg = replace(cfg, **{k: v for k, v in (("seed", args.seed), ("tol", args.tol), ("order", args.order),
                                                  ("out", args.out)) if v is not None})
        report["config"] = {"seed": cfg.seed, "tol": cfg.tol, "order": cfg.order}
        handler = {"validate": cmd_validate, "unfold": cmd_unfold, "flow": cmd_flow, "monodromy": cmd_monodromy}
        if args.command == "hypergeom-demo":
            result = cmd_hypergeom_demo(cfg, args.epsilon)
        else:
            result = handler[args.command](cfg)
        if args.command == "hypergeom-demo" and not args.quiet:
            from .demo import narrative

            log.info(narrative(result))
        _emit(cfg, args.command, result, out_dir)
        report["result"] = result
        report["all_pass"] = all_pass(result["checks"])
        code = EXIT_OK if report["all_pass"] else EXIT_VALIDATION
    except (json.JSONDecodeError, OSError) as exc:
        report["error"] = {"error": type(exc).__name__, "message": str(exc),
                           "detail": {"line": getattr(exc, "lineno", None), "column": getattr(exc, "colno", None)}}
        code = EXIT_USAGE
    except ValidationError as exc:
        report["error"] = exc.to_dict()
        code = EXIT_VALIDATION
    except PreconditionError as exc:
        report["error"] = exc.to_dict()
        code = EXIT_PRECONDITION
    except UnfoldError as exc:  # pragma: no cover - every concrete error derives from one of the two above
        report["error"] = exc.to_dict()
        code = EXIT_VALIDATION
    report["exit_code"] = code
    text = dumps(report)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(text)
    if not args.quiet:
        summary = {k: report.get(k) for k in ("command", "all_pass", "exit_code")}
        if "error" in report:
            summary["error"] = report["error"]
        print(dumps(summary), end="")
    return code


def main() -> None:
    sys.exit(run())
