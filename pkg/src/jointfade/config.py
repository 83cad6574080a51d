"""Pipeline configuration: flat dotted keys loaded from JSON or YAML."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline knobs.

    File keys use dots (``align.M``); the attribute name swaps dots for
    underscores (``align_M``). Nested mappings are flattened on load.
    """

    input: str | None = None
    seed: int = 0
    # synthetic source, used when ``input`` is None
    synth_n_total: int = 1_000_000
    synth_tail_fraction: float = 0.02
    synth_alpha: float = 0.7
    synth_xi_x: float = -0.2
    synth_sigma_x: float = 5.0
    synth_u_x: float = -15.0
    synth_xi_y: float = -0.2
    synth_sigma_y: float = 8.0
    synth_u_y: float = -30.0
    synth_window: int = 10
    synth_bulk_offset: float = 15.0
    synth_bulk_sd: float = 3.0
    # stages
    decluster_mg: int = 2
    decluster_mg_set: tuple[int, ...] = ()
    decluster_q: float = 0.05
    thresholds_grid: tuple[float, ...] = ()
    thresholds_n: int = 100
    thresholds_q_lo: float = 0.001
    thresholds_q_hi: float = 0.25
    thresholds_floor: int = 30
    thresholds_u_x: float | None = None
    thresholds_u_y: float | None = None
    r2_min: float = 0.95
    align_M: int = 1000
    zeta_mode: str = "joint"
    frechet_cap: float = 1e12
    likelihood: str = "full"
    r0_critical: float = 0.05
    mean_tol: float = 0.05
    grids_cdf_n: int = 50
    grids_h_n: int = 2001

    def __post_init__(self):
        if self.align_M < 1:
            raise ConfigError(f"align.M must be >= 1, got {self.align_M}")
        if self.decluster_mg < 1 or any(m < 1 for m in self.decluster_mg_set):
            raise ConfigError("decluster.mg values must be >= 1")
        if not 0.0 <= self.r2_min <= 1.0:
            raise ConfigError("r2_min must lie in [0, 1]")
        if not 0.0 < self.r0_critical < 1.0:
            raise ConfigError("r0.critical must lie in (0, 1)")
        if not self.mean_tol >= 0:
            raise ConfigError("mean_tol must be >= 0")
        if self.zeta_mode not in ("joint", "raw"):
            raise ConfigError("zeta.mode must be 'joint' or 'raw'")
        if self.likelihood not in ("full", "mixed_partial"):
            raise ConfigError("likelihood must be 'full' or 'mixed_partial'")
        if not 0.0 < self.decluster_q < 1.0:
            raise ConfigError("decluster.q must lie in (0, 1)")
        if not 0.0 < self.thresholds_q_lo < self.thresholds_q_hi < 1.0:
            raise ConfigError("need 0 < thresholds.q_lo < thresholds.q_hi < 1")
        if self.thresholds_n < 3 or self.thresholds_floor < 1:
            raise ConfigError("thresholds.n must be >= 3 and thresholds.floor >= 1")
        if self.grids_cdf_n < 2 or self.grids_h_n < 3 or self.grids_h_n % 2 == 0:
            raise ConfigError("grids.cdf_n must be >= 2 and grids.h_n odd and >= 3")
        if not 0.0 <= self.synth_tail_fraction < 0.25:
            raise ConfigError("synth.tail_fraction must lie in [0, 0.25)")

    @property
    def mg_set(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.decluster_mg_set) | {self.decluster_mg}))

    @classmethod
    def keys(cls) -> list[str]:
        return [dotted(f.name) for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, data: dict) -> "PipelineConfig":
        flat = _flatten(data)
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in flat.items():
            name = key.replace(".", "_")
            if name not in names:
                raise ConfigError(f"unknown config key '{key}'")
            if isinstance(value, list):
                value = tuple(value)
            kwargs[name] = value
        return cls(**kwargs)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {dotted(k): (list(v) if isinstance(v, tuple) else v)
                for k, v in dataclasses.asdict(self).items()}


_PREFIXES = ("synth", "decluster", "thresholds", "align", "zeta", "frechet", "r0", "grids")


def dotted(name: str) -> str:
    """Attribute name to file key: ``align_M`` -> ``align.M``."""
    head, _, tail = name.partition("_")
    return f"{head}.{tail}" if head in _PREFIXES and tail else name


def _flatten(data: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def read_config_mapping(path) -> dict:
    """Parse a JSON or YAML file into a flat dotted-key mapping, without validating values."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as err:
        raise ConfigError(f"{path}: cannot parse config: {err}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return _flatten(data)


def load_config(path) -> PipelineConfig:
    """Read a JSON or YAML file of flat (or nested) keys."""
    return PipelineConfig.from_mapping(read_config_mapping(path))
