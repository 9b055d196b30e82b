"""Run configuration: JSON ingestion, validation, and CLI overrides.

A config file is a single JSON object with a ``version`` field.  Every
field has a default, so ``RunConfig()`` is a complete runnable setup and
a config file only has to mention what it changes.  Command-line flags
are applied last and win over the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import multi_index as mi
from .gallery import DEFAULT_AMPLITUDE, DEFAULT_RESOLUTION, BetaTerm

CONFIG_VERSION = "g2verify-config/1"

SUITE_NAMES = ("pointwise", "field", "growth", "convergence")

STRUCTURE_KINDS = ("flat", "perturbedClosed", "explicitField")


class ConfigError(Exception):
    """Invalid configuration; the CLI maps this to its own exit code."""


@dataclass(frozen=True)
class RunConfig:
    structure_kind: str = "perturbedClosed"
    amplitude: float = DEFAULT_AMPLITUDE
    beta_terms: tuple | None = None  # None = gallery default family
    field_path: str | None = None    # explicitField source
    resolution: tuple = DEFAULT_RESOLUTION
    lengths: tuple | None = None     # periodic box lengths, None = 2*pi each
    suites: tuple = SUITE_NAMES
    seed: int = 0
    samples: int = 100               # pointwise battery draws
    k1: float = 1.0
    k2: float = 1.0
    ladder: tuple = (17, 34)         # active-axis sizes for the convergence pair
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.structure_kind not in STRUCTURE_KINDS:
            raise ConfigError(
                f"unknown structure kind {self.structure_kind!r}, "
                f"expected one of {STRUCTURE_KINDS}")
        if self.structure_kind == "explicitField" and not self.field_path:
            raise ConfigError("explicitField structure needs a snapshot path")
        if not (self.amplitude > 0.0) and self.structure_kind == "perturbedClosed":
            raise ConfigError(f"perturbation amplitude must be positive, got {self.amplitude}")
        object.__setattr__(self, "resolution", _normalize_resolution(self.resolution))
        if self.lengths is not None:
            lengths = tuple(float(x) for x in self.lengths)
            if len(lengths) != mi.DIM or any(x <= 0 for x in lengths):
                raise ConfigError(f"lengths must be 7 positive numbers, got {self.lengths}")
            object.__setattr__(self, "lengths", lengths)
        bad = [s for s in self.suites if s not in SUITE_NAMES]
        if bad:
            raise ConfigError(f"unknown suites {bad}, expected a subset of {SUITE_NAMES}")
        object.__setattr__(self, "suites", tuple(self.suites))
        object.__setattr__(self, "seed", int(self.seed))
        if int(self.samples) < 1:
            raise ConfigError("sample count must be at least 1")
        if not (0.0 < self.k1 <= self.k2):
            raise ConfigError(f"pinch scales need 0 < k1 <= k2, got {self.k1}, {self.k2}")
        ladder = tuple(int(n) for n in self.ladder)
        if len(ladder) < 2 or any(n < 5 for n in ladder) or sorted(ladder) != list(ladder):
            raise ConfigError(f"ladder must be ascending sizes of at least 5, got {self.ladder}")
        object.__setattr__(self, "ladder", ladder)
        if self.beta_terms is not None:
            object.__setattr__(self, "beta_terms", tuple(self.beta_terms))

    def tolerance(self, suite: str, name: str, default):
        """Per-suite override lookup; falls back to the built-in default."""
        return self.tolerances.get(suite, {}).get(name, default)

    def to_dict(self) -> dict:
        out = {
            "version": CONFIG_VERSION,
            "seed": self.seed,
            "suites": list(self.suites),
            "structure": {"kind": self.structure_kind},
            "chart": {
                "resolution": list(self.resolution),
                "lengths": None if self.lengths is None else list(self.lengths),
            },
            "pointwise": {"samples": self.samples},
            "growth": {"k1": self.k1, "k2": self.k2},
            "convergence": {"ladder": list(self.ladder)},
            "tolerances": self.tolerances,
        }
        if self.structure_kind == "perturbedClosed":
            out["structure"]["amplitude"] = self.amplitude
            if self.beta_terms is not None:
                out["structure"]["beta"] = [t.to_dict() for t in self.beta_terms]
        if self.structure_kind == "explicitField":
            out["structure"]["path"] = self.field_path
        return out


def _normalize_resolution(res) -> tuple:
    """Accept a full 7-tuple or a single size for the three active axes."""
    if isinstance(res, (int, float)):
        n = int(res)
        return (n, n, n) + DEFAULT_RESOLUTION[3:]
    res = tuple(int(n) for n in res)
    if len(res) == 1:
        return _normalize_resolution(res[0])
    if len(res) != mi.DIM:
        raise ConfigError(f"resolution needs 1 or 7 entries, got {len(res)}")
    if any(n < 5 for n in res):
        raise ConfigError(f"resolution must be at least 5 per axis, got {res}")
    return res


def _expect(d: dict, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown {where} keys {sorted(extra)}")


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    version = data.get("version")
    if version != CONFIG_VERSION:
        raise ConfigError(f"config version {version!r} not supported, expected {CONFIG_VERSION!r}")
    _expect(data, {"version", "seed", "suites", "structure", "chart",
                   "pointwise", "growth", "convergence", "tolerances"}, "config")
    kw = {}
    if "seed" in data:
        kw["seed"] = data["seed"]
    if "suites" in data:
        kw["suites"] = tuple(data["suites"])
    structure = data.get("structure", {})
    _expect(structure, {"kind", "amplitude", "beta", "path"}, "structure")
    if "kind" in structure:
        kw["structure_kind"] = structure["kind"]
    if "amplitude" in structure:
        kw["amplitude"] = float(structure["amplitude"])
    if structure.get("beta") is not None:
        try:
            kw["beta_terms"] = tuple(BetaTerm.from_dict(t) for t in structure["beta"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad beta term: {exc}") from exc
    if "path" in structure:
        kw["field_path"] = structure["path"]
    chart = data.get("chart", {})
    _expect(chart, {"resolution", "lengths"}, "chart")
    if "resolution" in chart:
        kw["resolution"] = chart["resolution"]
    if chart.get("lengths") is not None:
        kw["lengths"] = chart["lengths"]
    pointwise = data.get("pointwise", {})
    _expect(pointwise, {"samples"}, "pointwise")
    if "samples" in pointwise:
        kw["samples"] = int(pointwise["samples"])
    growth = data.get("growth", {})
    _expect(growth, {"k1", "k2"}, "growth")
    if "k1" in growth:
        kw["k1"] = float(growth["k1"])
    if "k2" in growth:
        kw["k2"] = float(growth["k2"])
    convergence = data.get("convergence", {})
    _expect(convergence, {"ladder"}, "convergence")
    if "ladder" in convergence:
        kw["ladder"] = tuple(convergence["ladder"])
    tolerances = data.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances must be an object keyed by suite name")
    kw["tolerances"] = tolerances
    try:
        return RunConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def apply_overrides(cfg: RunConfig, resolution=None, seed=None, suites=None) -> RunConfig:
    """Command-line flags win over the config file."""
    kw = {}
    if resolution is not None:
        kw["resolution"] = _parse_resolution_flag(resolution)
    if seed is not None:
        kw["seed"] = int(seed)
    if suites:
        kw["suites"] = tuple(suites)
    if not kw:
        return cfg
    try:
        return replace(cfg, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_resolution_flag(text) -> tuple:
    if isinstance(text, (int, tuple, list)):
        return _normalize_resolution(text)
    parts = [p for p in str(text).split(",") if p]
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad resolution {text!r}: {exc}") from exc
    if len(values) == 1:
        return _normalize_resolution(values[0])
    return _normalize_resolution(tuple(values))
