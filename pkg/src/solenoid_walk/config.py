"""Run configuration: a JSON file plus command-line overrides.

The file holds one object with the sections below; only ``group``,
``distribution`` and ``seed`` are required.  Unknown keys are rejected so
that a typo never silently falls back to a default.

    {
      "group": {"base": [2], "extension": {"kind": "periodic"}, "depth_cap": 64},
      "distribution": {"family": "geometric", "r": "1/2"},
      "seed": 42,
      "workers": 1,
      "classify": {"n_terms": 64},
      "integrate": {"n_cells": 12, "samples_per_cell": 20000, "depth": null, "tolerance": 1e-9},
      "simulate": {"trials": 1000, "horizons": [100, 1000, 10000]},
      "partition": {"n": 3, "max_coord": null, "alphas": []},
      "check_bounds": {"cells": [1, 2, 3, 4, 5], "samples": 10000, "grid_size": 10000},
      "output": {"format": "json", "path": null}
    }
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .distribution import DistributionError, Family, family_from_dict, family_to_dict
from .group import GroupSequence

SEED_LIMIT = 2**64


class ConfigError(ValueError):
    """The configuration is malformed or incomplete."""


@dataclass(frozen=True)
class ClassifyOptions:
    n_terms: int = 64


@dataclass(frozen=True)
class IntegrateOptions:
    n_cells: int = 12
    samples_per_cell: int = 20000
    depth: Optional[int] = None
    tolerance: float = 1e-9
    growth_threshold: float = 0.5
    stratified: bool = True


@dataclass(frozen=True)
class SimulateOptions:
    trials: int = 1000
    horizons: tuple[int, ...] = (100, 1000, 10000)
    contrast: Optional[dict] = None  # a second family descriptor, for visit_count_contrast


@dataclass(frozen=True)
class PartitionOptions:
    n: int = 3
    max_coord: Optional[int] = None
    alphas: tuple[float, ...] = ()


@dataclass(frozen=True)
class CheckBoundsOptions:
    cells: tuple[int, ...] = (1, 2, 3, 4, 5)
    samples: int = 10000
    grid_size: int = 10000


@dataclass(frozen=True)
class OutputOptions:
    format: str = "json"
    path: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    group: GroupSequence
    distribution: Family
    seed: int
    workers: int = 1
    classify: ClassifyOptions = field(default_factory=ClassifyOptions)
    integrate: IntegrateOptions = field(default_factory=IntegrateOptions)
    simulate: SimulateOptions = field(default_factory=SimulateOptions)
    partition: PartitionOptions = field(default_factory=PartitionOptions)
    check_bounds: CheckBoundsOptions = field(default_factory=CheckBoundsOptions)
    output: OutputOptions = field(default_factory=OutputOptions)

    def to_dict(self) -> dict:
        return {
            "group": self.group.to_dict(),
            "distribution": family_to_dict(self.distribution),
            "seed": self.seed,
            "workers": self.workers,
            "classify": _section_to_dict(self.classify),
            "integrate": _section_to_dict(self.integrate),
            "simulate": _section_to_dict(self.simulate),
            "partition": _section_to_dict(self.partition),
            "check_bounds": _section_to_dict(self.check_bounds),
            "output": _section_to_dict(self.output),
        }

    def with_overrides(self, **kw) -> "RunConfig":
        """Apply command-line flags; ``None`` values leave the file setting alone."""
        cfg = self
        if kw.get("seed") is not None:
            cfg = dataclasses.replace(cfg, seed=_check_seed(kw["seed"]))
        if kw.get("workers") is not None:
            cfg = dataclasses.replace(cfg, workers=_check_workers(kw["workers"]))
        out = cfg.output
        if kw.get("output") is not None:
            out = dataclasses.replace(out, path=str(kw["output"]))
        if kw.get("format") is not None:
            out = dataclasses.replace(out, format=_check_format(kw["format"]))
        return dataclasses.replace(cfg, output=out)


def _section_to_dict(section) -> dict:
    d = dataclasses.asdict(section)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _section_from_dict(cls, raw: Any, name: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    kw = {}
    for f in dataclasses.fields(cls):
        if f.name not in raw:
            continue
        v = raw[f.name]
        default = getattr(cls(), f.name)
        if isinstance(default, tuple):
            if not isinstance(v, list):
                raise ConfigError(f"{name}.{f.name} must be a list")
            v = tuple(v)
        elif isinstance(default, bool):
            if not isinstance(v, bool):
                raise ConfigError(f"{name}.{f.name} must be true or false")
        elif isinstance(default, int) and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise ConfigError(f"{name}.{f.name} must be a nonnegative integer")
        kw[f.name] = v
    return cls(**kw)


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < SEED_LIMIT:
        raise ConfigError("seed must be an integer in [0, 2^64)")
    return seed


def _check_workers(w) -> int:
    if isinstance(w, bool) or not isinstance(w, int) or w < 1:
        raise ConfigError("workers must be a positive integer")
    return w


def _check_format(fmt) -> str:
    if fmt not in ("json", "csv"):
        raise ConfigError("output format must be 'json' or 'csv'")
    return fmt


TOP_KEYS = {"group", "distribution", "seed", "workers", "classify", "integrate", "simulate",
            "partition", "check_bounds", "output"}


def config_from_dict(raw: Any, seed_override: Optional[int] = None) -> RunConfig:
    """Validate and build a RunConfig.  ``seed_override`` satisfies the seed requirement."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("group", "distribution"):
        if key not in raw:
            raise ConfigError(f"missing required section {key!r}")
    if "seed" not in raw and seed_override is None:
        raise ConfigError("missing required key 'seed' (no entropy default; pass --seed or set it in the file)")
    try:
        group = GroupSequence.from_dict(raw["group"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad group section: {exc}") from exc
    try:
        family = family_from_dict(raw["distribution"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, DistributionError):
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"bad distribution section: {exc}") from exc
    simulate = _section_from_dict(SimulateOptions, raw.get("simulate"), "simulate")
    if simulate.contrast is not None:
        try:
            family_from_dict(simulate.contrast)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad simulate.contrast: {exc}") from exc
    output = _section_from_dict(OutputOptions, raw.get("output"), "output")
    _check_format(output.format)
    return RunConfig(
        group=group,
        distribution=family,
        seed=_check_seed(raw["seed"]) if "seed" in raw else _check_seed(seed_override),
        workers=_check_workers(raw.get("workers", 1)),
        classify=_section_from_dict(ClassifyOptions, raw.get("classify"), "classify"),
        integrate=_section_from_dict(IntegrateOptions, raw.get("integrate"), "integrate"),
        simulate=simulate,
        partition=_section_from_dict(PartitionOptions, raw.get("partition"), "partition"),
        check_bounds=_section_from_dict(CheckBoundsOptions, raw.get("check_bounds"), "check_bounds"),
        output=output,
    )


def load_config(path: str | Path, seed_override: Optional[int] = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw, seed_override)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2)
