"""Experiment reports, NDJSON persistence and two-column plot data."""

from __future__ import annotations

import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from ..fieldio import _jsonable, write_ndjson


@dataclass
class Criterion:
    name: str
    passed: bool
    value: float | None = None
    threshold: str = ""
    detail: str = ""

    def line(self) -> str:
        v = "" if self.value is None else f" value={self.value:.6g}"
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}:{v} ({self.threshold}) {self.detail}".rstrip()


@dataclass
class Curve:
    xlabel: str
    ylabel: str
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)

    def add(self, x: float, y: float) -> None:
        self.x.append(float(x))
        self.y.append(float(y))


CURVES = {
    "simulate": [("critical_norm", "t", "critical_besov_norm")],
    "sweep": [("inviscid_error", "epsilon", "sup_t_besov_error")],
    "truncate": [
        ("term1_over_tail", "K", "term1_over_tail"),
        ("term2_slope", "K", "fitted_slope"),
        ("term3_over_tail", "K", "term3_over_tail"),
    ],
    "equivalence": [("discrepancy", "dt", "sup_discrepancy")],
    "selftest": [("selftest", "check_index", "passed")],
}


def environment() -> dict:
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


@dataclass
class ExperimentReport:
    kind: str
    config: dict = field(default_factory=dict)
    criteria: list[Criterion] = field(default_factory=list)
    curves: dict[str, Curve] = field(default_factory=dict)
    records: list[dict] = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, kind: str, config: dict | None = None) -> "ExperimentReport":
        curves = {name: Curve(xl, yl) for name, xl, yl in CURVES.get(kind, [])}
        meta = {"environment": environment()}
        return cls(kind, dict(config or {}), [], curves, [], {}, meta)

    def check(self, name: str, passed: bool, value=None, threshold: str = "", detail: str = "") -> Criterion:
        if value is not None:
            value = float(value)
        c = Criterion(name, bool(passed), value, threshold, detail)
        self.criteria.append(c)
        return c

    def curve(self, name: str, xlabel: str = "x", ylabel: str = "y") -> Curve:
        if name not in self.curves:
            self.curves[name] = Curve(xlabel, ylabel)
        return self.curves[name]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def summary_lines(self) -> list[str]:
        return [c.line() for c in self.criteria]

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "kind": self.kind,
                "passed": self.passed,
                "config": self.config,
                "criteria": [asdict(c) for c in self.criteria],
                "curves": {k: asdict(v) for k, v in self.curves.items()},
                "fits": self.fits,
                "metadata": self.metadata,
            }
        )

    def save(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{self.kind}_report.json").write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_nan_safe))
        crit = [{"kind": self.kind, **asdict(c)} for c in self.criteria]
        write_ndjson(d / f"{self.kind}_criteria.ndjson", crit)
        write_ndjson(d / f"{self.kind}_records.ndjson", self.records)
        emit_plotdata(self, d)
        return d


def _nan_safe(obj):
    return str(obj)


def emit_plotdata(report: ExperimentReport, directory) -> list[Path]:
    """One whitespace-separated two-column file per curve; header-only when empty."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, curve in sorted(report.curves.items()):
        p = d / f"{report.kind}_{name}.dat"
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(f"# {curve.xlabel} {curve.ylabel}\n")
            for x, y in zip(curve.x, curve.y):
                fh.write(f"{x:.17g} {y:.17g}\n")
        paths.append(p)
    return paths


def read_plotdata(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().lstrip("#").split()
        rows = [[float(t) for t in line.split()] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(-1, 2)


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0) or np.any(x <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
