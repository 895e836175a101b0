"""Run configuration: one JSON document with per-command sections; CLI flags override it.

Complex numbers are written as [re, im] (plain reals are accepted too).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ValidationError

MAX_ORDER = 256


def parse_complex(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ValidationError("expected a number or [re, im]", value=x)


def parse_complex_array(x, shape: tuple) -> np.ndarray:
    """Array of the given shape written with real leaves or with [re, im] leaves."""
    try:
        a = np.array(x, float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("malformed numeric array", value=str(x)[:80]) from exc
    shape = tuple(shape)
    if a.shape == shape:
        return a.astype(complex)
    if a.shape == shape + (2,):
        return a[..., 0] + 1j * a[..., 1]
    raise ValidationError("array has the wrong shape", expected=list(shape), got=list(a.shape))


@dataclass(frozen=True)
class SpecConfig:
    r: int
    m: int
    epsilon: complex
    mu: tuple
    c: tuple  # r rows of m entries
    A: tuple | None = None  # optional explicit (m, r, r) coefficients
    spread: float = 0.4

    @classmethod
    def from_dict(cls, d: dict) -> "SpecConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValidationError("unknown keys in section", section=cls.__name__, keys=sorted(unknown))
        try:
            r, m = int(d["r"]), int(d["m"])
            eps = parse_complex(d.get("epsilon", 0.0))
            mu = tuple(parse_complex_array(d["mu"], (r,)))
            c = parse_complex_array(d["c"], (r, m))
        except KeyError as exc:
            raise ValidationError("spec section misses a field", field=str(exc)) from exc
        A = None
        if d.get("A") is not None:
            A_arr = parse_complex_array(d["A"], (m, r, r))
            A = tuple(map(tuple, A_arr.reshape(m, -1)))
        return cls(r, m, eps, mu, tuple(map(tuple, c)), A, float(d.get("spread", 0.4)))

    @property
    def c_array(self) -> np.ndarray:
        return np.array(self.c, complex)

    @property
    def A_array(self) -> np.ndarray | None:
        return None if self.A is None else np.array(self.A, complex).reshape(self.m, self.r, self.r)


@dataclass(frozen=True)
class FlowConfig:
    ms: tuple = (2, 3)
    epsilons: tuple = (0.0, 0.05, 0.2)
    n_starts: int = 200
    margin: float = 1e-3
    stop_tol: float = 1e-8
    target_tol: float = 1e-6
    rate_factor: float = 0.9
    q_fraction: float = 0.25  # share of starts drawn from the thin Q wedge when eps != 0


@dataclass(frozen=True)
class MonodromyConfig:
    r: int = 2
    m: int = 2
    epsilon: complex = 0.1
    instances: int = 1
    scale: float = 0.1
    v: tuple | None = None  # (r, m) direction; None: random with v[:, m-1] = 0
    radius: float | None = None
    check_tol: float = 1e-6


@dataclass(frozen=True)
class HypergeomConfig:
    mu: tuple = (1.0, -1.0)
    c: tuple = ((0.21 + 0.05j, 0.31), (0.12, 0.17 + 0.03j))
    epsilons: tuple = (0.2, 0.05, 0.0)
    frame_seed: int = 7
    spread: float = 0.4
    spread_z: float = 0.4  # size of the z-linear part of the frame; 0 gives a reducible system
    gauge_coeffs: tuple = (0.3, -0.7, 0.45, 0.2, -0.1)  # a, b, c, x, y


@dataclass(frozen=True)
class RunConfig:
    command: str = "validate"
    seed: int = 0
    tol: float = 1e-9
    order: int = 24
    out: str | None = None
    spec: SpecConfig | None = None
    flow: FlowConfig = field(default_factory=FlowConfig)
    monodromy: MonodromyConfig = field(default_factory=MonodromyConfig)
    hypergeom: HypergeomConfig = field(default_factory=HypergeomConfig)

    def __post_init__(self):
        if not (self.tol > 0):
            raise ValidationError("tolerances must be positive", tol=self.tol)
        if not (1 <= self.order <= MAX_ORDER):
            raise ValidationError("order out of range", order=self.order, max=MAX_ORDER)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _section(cls, d: dict | None):
    if not d:
        return cls()
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValidationError("unknown keys in section", section=cls.__name__, keys=sorted(unknown))
    kw = {}
    for k, v in d.items():
        if k in ("epsilon",):
            kw[k] = parse_complex(v)
        elif k == "epsilons":
            kw[k] = tuple(parse_complex(x) for x in v)
        elif k == "mu":
            kw[k] = tuple(parse_complex(x) for x in v)
        elif k in ("c", "v"):
            kw[k] = None if v is None else _matrix(v)
        elif isinstance(v, list):
            kw[k] = tuple(v)
        else:
            kw[k] = v
    return cls(**kw)


def _matrix(v) -> tuple:
    a = np.array(v, float)
    if a.ndim == 3 and a.shape[-1] == 2:
        a = a[..., 0] + 1j * a[..., 1]
    elif a.ndim != 2:
        raise ValidationError("expected a matrix", shape=list(a.shape))
    return tuple(map(tuple, a.astype(complex)))


def config_from_dict(d: dict, command: str) -> RunConfig:
    if not isinstance(d, dict):
        raise ValidationError("configuration must be a JSON object")
    spec = SpecConfig.from_dict(d["spec"]) if d.get("spec") else None
    return RunConfig(
        command=command,
        seed=int(d.get("seed", 0)),
        tol=float(d.get("tol", 1e-9)),
        order=int(d.get("order", 24)),
        out=d.get("out"),
        spec=spec,
        flow=_section(FlowConfig, d.get("flow")),
        monodromy=_section(MonodromyConfig, d.get("monodromy")),
        hypergeom=_section(HypergeomConfig, d.get("hypergeom")),
    )


def load_config(path: str | None, command: str) -> RunConfig:
    """Read a JSON file; json.JSONDecodeError propagates so the CLI can report a parse error."""
    if path is None:
        return RunConfig(command=command)
    with open(path) as fh:
        return config_from_dict(json.load(fh), command)
