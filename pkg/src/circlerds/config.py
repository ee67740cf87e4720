"""TOML experiment configs.

An experiment file holds a ``seed``, a ``[family]`` table (atoms and
probabilities) and optional tables for each experiment stage. Every key is
checked against the schema below; unknown keys, wrong types and
out-of-range values raise :class:`ConfigError` naming the offending field.
See ``docs/config.md`` for the full schema.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
import typing
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .engine import NuMeasure
from .errors import ConfigError
from .maps import from_dict


@dataclass(frozen=True)
class StationaryConfig:
    n_steps: int = 200
    n_samples: int = 100_000
    x0: float = 0.0
    # start for the inverse system; differs from x0 when x0 repels under nu^-
    x0_minus: float = 0.0
    tol: float = 1e-8
    max_warning_fraction: float = 0.01


@dataclass(frozen=True)
class ExponentsConfig:
    n_steps: int = 10_000
    n_samples: int = 100
    grid: int = 64
    mc_draws: int | None = None


@dataclass(frozen=True)
class EntropyConfig:
    radius: float | None = None
    draws: int = 20_000
    target_count: int = 100
    leave_one_out: bool = True


@dataclass(frozen=True)
class DimensionConfig:
    probes: int = 500
    r_min: float = 1e-4
    r_max: float = 1e-1
    n_radii: int = 12


@dataclass(frozen=True)
class SyncConfig:
    x: float = 0.1
    y: float = 0.6
    n_steps: int = 500
    n_samples: int = 1000
    collapse_tol: float = 1e-6


@dataclass(frozen=True)
class PointsConfig:
    n_steps: int = 400
    probes: int = 16
    tol: float = 1e-8
    grid: int = 2048


@dataclass(frozen=True)
class HypothesesConfig:
    grid: int = 1024
    tol: float = 1e-8
    pairs: int = 32
    depth: int = 60
    beam: int = 8
    prox_threshold: float = 1e-3
    sync_n: int = 500
    sync_samples: int = 64


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"


SECTIONS = {
    "stationary": StationaryConfig,
    "exponents": ExponentsConfig,
    "entropy": EntropyConfig,
    "dimension": DimensionConfig,
    "sync": SyncConfig,
    "points": PointsConfig,
    "hypotheses": HypothesesConfig,
    "output": OutputConfig,
}

# float fields that may be zero or negative
_FREE_FLOATS = {"x0", "x0_minus", "x", "y"}
# float fields that must lie in (0, 1/2)
_RADII = {"r_min", "r_max", "radius"}

ATOM_KEYS = {
    "projective": {"kind", "matrix"},
    "sine": {"kind", "a", "b"},
    "rotation": {"kind", "a"},
    "inverse": {"kind", "base"},
}


def _type_name(t) -> str:
    return getattr(t, "__name__", str(t))


def _coerce(value, tp, name):
    args = typing.get_args(tp)
    if args and type(None) in args:
        tp = next(a for a in args if a is not type(None))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false, got {value!r}", name)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}", name)
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}", name)
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}", name)
        return value
    raise ConfigError(f"{name}: unsupported type {_type_name(tp)}", name)


def load_section(cls, table, prefix: str):
    """Build dataclass ``cls`` from a TOML table, rejecting unknown keys."""
    if not isinstance(table, dict):
        raise ConfigError(f"{prefix} must be a table", prefix)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in table:
        if key not in names:
            raise ConfigError(f"unknown key {prefix}.{key} (allowed: {', '.join(sorted(names))})",
                              f"{prefix}.{key}")
    kwargs = {}
    for key, value in table.items():
        name = f"{prefix}.{key}"
        v = _coerce(value, hints[key], name)
        if isinstance(v, int) and not isinstance(v, bool) and v < 1:
            raise ConfigError(f"{name} must be >= 1, got {v}", name)
        if isinstance(v, float):
            if key in _RADII and not 0.0 < v < 0.5:
                raise ConfigError(f"{name} must lie in (0, 1/2), got {v}", name)
            if key not in _FREE_FLOATS and not v > 0:
                raise ConfigError(f"{name} must be > 0, got {v}", name)
        kwargs[key] = v
    obj = cls(**kwargs)
    if isinstance(obj, DimensionConfig) and not obj.r_min < obj.r_max:
        raise ConfigError(f"{prefix}.r_min must be below {prefix}.r_max", f"{prefix}.r_min")
    if isinstance(obj, DimensionConfig) and obj.n_radii < 3:
        raise ConfigError(f"{prefix}.n_radii must be >= 3", f"{prefix}.n_radii")
    return obj


def _check_atom(spec, name):
    if not isinstance(spec, dict):
        raise ConfigError(f"{name} must be a table", name)
    kind = spec.get("kind")
    if kind not in ATOM_KEYS:
        raise ConfigError(f"{name}.kind must be one of {sorted(ATOM_KEYS)}, got {kind!r}",
                          f"{name}.kind")
    extra = set(spec) - ATOM_KEYS[kind]
    missing = ATOM_KEYS[kind] - set(spec)
    if extra:
        k = sorted(extra)[0]
        raise ConfigError(f"unknown key {name}.{k} for a {kind} atom", f"{name}.{k}")
    if missing:
        k = sorted(missing)[0]
        raise ConfigError(f"missing key {name}.{k}", f"{name}.{k}")
    if kind == "inverse":
        _check_atom(spec["base"], f"{name}.base")


def parse_family(table, prefix: str = "family") -> NuMeasure:
    if not isinstance(table, dict):
        raise ConfigError(f"{prefix} must be a table", prefix)
    for key in table:
        if key not in ("atoms", "probs", "control"):
            raise ConfigError(f"unknown key {prefix}.{key}", f"{prefix}.{key}")
    atoms = table.get("atoms")
    probs = table.get("probs")
    if not isinstance(atoms, list) or not atoms:
        raise ConfigError(f"{prefix}.atoms must be a non-empty list", f"{prefix}.atoms")
    if not isinstance(probs, list) or len(probs) != len(atoms):
        raise ConfigError(f"{prefix}.probs must list one probability per atom", f"{prefix}.probs")
    maps = []
    for i, spec in enumerate(atoms):
        name = f"{prefix}.atoms[{i}]"
        _check_atom(spec, name)
        try:
            maps.append(from_dict(spec))
        except (ValueError, TypeError, KeyError) as e:
            raise ConfigError(str(e), name) from None
    for i, p in enumerate(probs):
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ConfigError(f"{prefix}.probs[{i}] must be a number", f"{prefix}.probs")
    try:
        return NuMeasure(tuple(maps), tuple(float(p) for p in probs))
    except ValueError as e:
        raise ConfigError(str(e), f"{prefix}.probs") from None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    nu: NuMeasure
    control: str | None = None
    stationary: StationaryConfig = field(default_factory=StationaryConfig)
    exponents: ExponentsConfig = field(default_factory=ExponentsConfig)
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    dimension: DimensionConfig = field(default_factory=DimensionConfig)
    sync: SyncConfig = field(default_factory=SyncConfig)
    points: PointsConfig = field(default_factory=PointsConfig)
    hypotheses: HypothesesConfig = field(default_factory=HypothesesConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def with_seed(self, seed: int | None) -> "ExperimentConfig":
        return self if seed is None else dataclasses.replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        d = {"name": self.name, "seed": self.seed, "family": self.nu.to_dict()}
        if self.control is not None:
            d["control"] = self.control
        for sec in SECTIONS:
            d[sec] = dataclasses.asdict(getattr(self, sec))
        return d

    def config_hash(self) -> str:
        return config_hash(self.to_dict())


def config_hash(d: dict) -> str:
    """Hash of the resolved config; output locations do not contribute."""
    d = {k: v for k, v in d.items() if k != "output"}
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def read_toml(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", str(path)) from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: invalid TOML: {e}", str(path)) from None


def parse_experiment(data: dict, name: str = "experiment", seed_required: bool = True,
                     default_seed: int = 0) -> ExperimentConfig:
    allowed = {"name", "seed", "family", *SECTIONS}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key {key} (allowed: {', '.join(sorted(allowed))})", key)
    if "family" not in data:
        raise ConfigError("missing [family] table", "family")
    if "seed" in data:
        seed = _coerce(data["seed"], int, "seed")
        if seed < 0:
            raise ConfigError("seed must be >= 0", "seed")
    elif seed_required:
        raise ConfigError("missing key seed", "seed")
    else:
        seed = default_seed
    nu = parse_family(data["family"])
    control = data["family"].get("control")
    if control is not None and control != "negative":
        raise ConfigError("family.control must be \"negative\" when given", "family.control")
    name = data.get("name", name)
    if not isinstance(name, str):
        raise ConfigError("name must be a string", "name")
    sections = {sec: load_section(cls, data.get(sec, {}), sec) for sec, cls in SECTIONS.items()}
    return ExperimentConfig(name, seed, nu, control, **sections)


def load_experiment(path) -> ExperimentConfig:
    return parse_experiment(read_toml(path), name=Path(path).stem)
