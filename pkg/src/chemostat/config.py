"""Run configuration: biological constants, operating mode, integrator, output.

Stored as JSON with the field names of :class:`RunConfig`::

    {
      "parameters": {"m1": 4.0, ...},
      "operating": {"point": {"S_in": 1.0, "D": 0.5}},
      "integrator": {"rtol": 1e-08, ...},
      "output": {"directory": "out", "formats": ["csv", "svg"]}
    }

``operating`` holds exactly one of ``point``, ``line`` (``S_in`` and
``D_range``) or ``grid`` (``S_in_range``, ``D_range``, ``resolution``).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .dynamics import IntegratorConfig
from .errors import ParameterError
from .growth import BioParams

FORMATS = ("csv", "svg")
MODES = ("point", "line", "grid")


@dataclass(frozen=True)
class PointMode:
    S_in: float = 1.0
    D: float = 0.5


@dataclass(frozen=True)
class LineMode:
    S_in: float = 1.0
    D_range: tuple = (0.05, 5.0)
    n: int = 400

    def __post_init__(self):
        _check_range("D_range", self.D_range, positive=True)
        if not (isinstance(self.n, int) and self.n >= 2):
            raise ParameterError("line.n must be an integer >= 2")


@dataclass(frozen=True)
class GridMode:
    S_in_range: tuple = (0.0, 1.0)
    D_range: tuple = (0.0, 2.0)
    resolution: tuple = (200, 200)

    def __post_init__(self):
        _check_range("S_in_range", self.S_in_range)
        _check_range("D_range", self.D_range)
        res = self.resolution
        if isinstance(res, int):
            res = (res, res)
        if len(res) != 2 or not all(isinstance(r, int) and r >= 2 for r in res):
            raise ParameterError("grid.resolution must be two integers >= 2")
        object.__setattr__(self, "resolution", tuple(res))


def _check_range(name, r, positive=False):
    try:
        lo, hi = r
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a pair [lo, hi]") from None
    if not (isinstance(lo, (int, float)) and isinstance(hi, (int, float))):
        raise ParameterError(f"{name} entries must be numbers")
    if not (0 <= lo < hi) or (positive and lo == 0):
        raise ParameterError(f"{name} must satisfy {'0 <' if positive else '0 <='} lo < hi, got {r!r}")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv",)

    def __post_init__(self):
        fmts = tuple(self.formats)
        if not fmts:
            raise ParameterError("output formats must not be empty")
        bad = [f for f in fmts if f not in FORMATS]
        if bad:
            raise ParameterError(f"unknown output format(s) {bad}; choose from {FORMATS}")
        object.__setattr__(self, "formats", fmts)


@dataclass(frozen=True)
class RunConfig:
    parameters: BioParams = field(default_factory=BioParams)
    point: Optional[PointMode] = None
    line: Optional[LineMode] = None
    grid: Optional[GridMode] = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        set_modes = [m for m in MODES if getattr(self, m) is not None]
        if len(set_modes) != 1:
            raise ParameterError(f"exactly one operating mode must be set, got {set_modes}")

    @property
    def mode(self) -> str:
        return next(m for m in MODES if getattr(self, m) is not None)

    def to_dict(self) -> dict:
        mode = self.mode
        return {
            "parameters": self.parameters.to_dict(),
            "operating": {mode: _plain(asdict(getattr(self, mode)))},
            "integrator": asdict(self.integrator),
            "output": _plain(asdict(self.output)),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ParameterError("configuration must be a JSON object")
        unknown = set(data) - {"parameters", "operating", "integrator", "output"}
        if unknown:
            raise ParameterError(f"unknown configuration section(s): {sorted(unknown)}")
        params = BioParams.from_dict(data.get("parameters", {}))
        operating = data.get("operating", {"point": {}})
        if not isinstance(operating, dict):
            raise ParameterError("'operating' must be an object")
        bad = set(operating) - set(MODES)
        if bad:
            raise ParameterError(f"unknown operating mode(s): {sorted(bad)}")
        modes = {}
        for name, kind in (("point", PointMode), ("line", LineMode), ("grid", GridMode)):
            if operating.get(name) is not None:
                modes[name] = _build(kind, operating[name])
        return cls(
            parameters=params,
            integrator=_build(IntegratorConfig, data.get("integrator", {})),
            output=_build(OutputConfig, data.get("output", {})),
            **modes,
        )


def _plain(d):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _build(kind, values):
    if not isinstance(values, dict):
        raise ParameterError(f"{kind.__name__} expects an object, got {values!r}")
    names = {f.name for f in fields(kind)}
    unknown = set(values) - names
    if unknown:
        raise ParameterError(f"unknown {kind.__name__} field(s): {sorted(unknown)}")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    try:
        return kind(**clean)
    except TypeError as exc:
        raise ParameterError(str(exc)) from exc


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read configuration {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"invalid JSON in {path}: {exc}") from exc
    return RunConfig.from_dict(data)


def dump(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
