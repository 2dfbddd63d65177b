"""Experiment configuration: JSON files validated against the shipped schema."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from ..spectral_core import Grid

DEFAULT_TOLERANCES = {
    "slope_low": 0.8,
    "slope_high": 1.2,
    "T_linearity": 0.3,
    "rough_reduction": 4.0,
    "stability_constant": 10.0,
    "truncation_slope_tol": 0.2,
    "equivalence_sup": 1e-5,
    "order_tol": 0.5,
    "round_off_growth": 1e-5,
}

_BASE = {
    "schema_version": 1,
    "grid": {"sizes": [32, 32, 32], "lengths": None},
    "a": 1.0,
    "T": 0.5,
    "T_list": [],
    "dt": 0.01,
    "dt_list": [],
    "sample_every": 1,
    "delta": 0.05,
    "datum": {"family": "bump", "family_version": 1, "delta": 0.05, "width": 1.0},
    "K_list": [],
    "picard_iterations": 5,
    "shell_range": None,
    "tolerances": {},
    "output": None,
    "save_trajectories": False,
    "workers": 1,
}

DEFAULTS = {
    "simulate": {"epsilons": [0.0], "T": 0.25},
    "sweep": {"epsilons": [0.1, 0.05, 0.025, 0.0125], "T_list": [0.25, 0.5]},
    "truncate": {
        "grid": {"sizes": [64, 64, 64], "lengths": None},
        "epsilons": [0.01, 0.005, 0.0025, 0.00125],
        "T": 0.25,
        "datum": {"family": "shell", "family_version": 1, "delta": 0.05, "seed": 0},
        "K_list": [2, 3, 4],
        "sample_every": 5,
    },
    "equivalence": {"epsilons": [1.0, 0.0], "T": 0.25, "dt_list": [0.01, 0.005, 0.0025]},
    "selftest": {"epsilons": [0.0]},
}


def schema() -> dict:
    text = resources.files(__package__).joinpath("config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "datum":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    kind: str
    grid: dict
    a: float
    epsilons: list[float]
    T: float
    dt: float
    delta: float
    datum: dict
    T_list: list[float] = field(default_factory=list)
    dt_list: list[float] = field(default_factory=list)
    sample_every: int = 1
    K_list: list[int] = field(default_factory=list)
    picard_iterations: int = 5
    shell_range: list[int] | None = None
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    save_trajectories: bool = False
    workers: int = 1
    schema_version: int = 1

    def __post_init__(self):
        if list(self.epsilons) != sorted(self.epsilons, reverse=True):
            raise ValueError(f"epsilon list must be sorted descending, got {self.epsilons}")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        if any(v <= 0 for v in tol.values()):
            raise ValueError("tolerances must be positive")
        self.tolerances = tol

    @property
    def grid_obj(self) -> Grid:
        return Grid(tuple(self.grid["sizes"]), self.grid.get("lengths"), workers=1)

    @property
    def shell_range_tuple(self):
        return tuple(self.shell_range) if self.shell_range else None

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def to_dict(self) -> dict:
        return asdict(self)


def build_config(kind: str, raw: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    raw = dict(raw or {})
    raw.setdefault("kind", kind)
    kind = raw["kind"]
    merged = _merge(_merge(_BASE, DEFAULTS.get(kind, {})), raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v if k != "grid" else {"sizes": list(v), "lengths": None}
    try:
        jsonschema.validate(merged, schema())
    except jsonschema.ValidationError as exc:
        raise ValueError(f"invalid config: {exc.message}") from exc
    return ExperimentConfig(**merged)


def load_config(path, kind: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    if kind is not None and raw.get("kind", kind) != kind:
        raise ValueError(f"config kind {raw['kind']!r} does not match verb {kind!r}")
    return build_config(kind or raw.get("kind"), raw, overrides)
