"""Experiment configuration: market parameters, GA parameters and their flat file form."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

# Order ids double as birth ticks and are packed into heap keys below 2**24.
MAX_TICKS = 2**24 - 1


class ConfigError(ValueError):
    """Invalid configuration value or file."""


@dataclass(frozen=True)
class MarketConfig:
    n: int = 900
    w1_max: float = 1.0
    w2_max: float = 100.0
    w3_max: float = 1.0
    tau_max: int = 1000
    sigma_eps: float = 0.03
    p_d: float = 1000.0
    t_c: int = 2000
    delta_p: float = 0.01
    p_f: float = 10000.0
    delta_t: int = 10
    t_e: int = 10000

    def __post_init__(self):
        if self.n < 1 or self.tau_max < 1 or self.delta_t < 1:
            raise ConfigError("n, tau_max and delta_t must be positive")
        if min(self.w1_max, self.w2_max, self.w3_max) <= 0:
            raise ConfigError("weight maxima must be positive")
        if self.sigma_eps < 0 or self.p_d < 0:
            raise ConfigError("sigma_eps and p_d must be non-negative")
        if self.delta_p <= 0 or self.p_f <= 0:
            raise ConfigError("delta_p and p_f must be positive")
        if not 0 < self.t_c < self.t_e:
            raise ConfigError(f"need 0 < t_c < t_e, got t_c={self.t_c}, t_e={self.t_e}")
        if self.t_e > MAX_TICKS:
            raise ConfigError(f"t_e must not exceed {MAX_TICKS}")
        if (self.t_e - self.t_c) % self.delta_t:
            raise ConfigError("(t_e - t_c) must be a multiple of delta_t")
        ratio = self.p_f / self.delta_p
        if abs(ratio - round(ratio)) > 1e-6:
            raise ConfigError("p_f must be a multiple of delta_p")

    @property
    def n_actions(self) -> int:
        """Length of a gene: number of AI-agent action slots."""
        return (self.t_e - self.t_c) // self.delta_t

    @property
    def pf_ticks(self) -> int:
        return int(round(self.p_f / self.delta_p))

    def action_tick(self, k: int) -> int:
        """Tick of action slot ``k`` (1-based)."""
        return self.t_c + k * self.delta_t


@dataclass(frozen=True)
class GAConfig:
    population: int = 10000
    elites: int = 400
    crossover_prob: float = 0.65
    mutation_prob: float = 0.2
    generations: int = 1500
    ga_seed: int = 0

    def __post_init__(self):
        if not 2 <= self.elites <= self.population:
            raise ConfigError("need 2 <= elites <= population")
        if not (0.0 <= self.crossover_prob <= 1.0 and 0.0 <= self.mutation_prob <= 1.0):
            raise ConfigError("probabilities must lie in [0, 1]")
        if self.generations < 0 or self.ga_seed < 0:
            raise ConfigError("generations and ga_seed must be non-negative")


@dataclass(frozen=True)
class ExperimentConfig:
    market: MarketConfig = field(default_factory=MarketConfig)
    ga: GAConfig = field(default_factory=GAConfig)
    seed: int = 1
    output_dir: str = "runs"
    workers: int = 0
    checkpoint_every: int = 10
    volume_bucket: int = 200

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.workers < 0 or self.checkpoint_every < 0 or self.volume_bucket < 1:
            raise ConfigError("workers/checkpoint_every must be >= 0, volume_bucket >= 1")

    def to_flat(self) -> dict:
        flat = asdict(self.market) | asdict(self.ga)
        for f in fields(self):
            if f.name not in ("market", "ga"):
                flat[f.name] = getattr(self, f.name)
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "ExperimentConfig":
        flat = dict(flat)
        groups = {}
        for name, klass in (("market", MarketConfig), ("ga", GAConfig), ("top", cls)):
            keys = {f.name: f.type for f in fields(klass) if f.name not in ("market", "ga")}
            groups[name] = {k: _coerce(k, flat.pop(k), klass) for k in list(flat) if k in keys}
        if flat:
            raise ConfigError(f"unknown config keys: {sorted(flat)}")
        return cls(
            market=MarketConfig(**groups["market"]),
            ga=GAConfig(**groups["ga"]),
            **groups["top"],
        )

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        flat = self.to_flat()
        flat.update({k: v for k, v in overrides.items() if v is not None})
        return self.from_flat(flat)

    @property
    def config_hash(self) -> str:
        """Hash of everything that affects results (not paths or worker counts)."""
        flat = self.to_flat()
        for k in ("output_dir", "workers", "checkpoint_every"):
            flat.pop(k)
        blob = json.dumps(flat, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _coerce(key, value, klass):
    default = getattr(klass(), key)
    try:
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def load_config(path) -> ExperimentConfig:
    try:
        flat = yaml.safe_load(Path(path).read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(flat, dict):
        raise ConfigError(f"{path} must be a flat key: value document")
    return ExperimentConfig.from_flat(flat)


def dump_config(cfg: ExperimentConfig, path=None) -> str:
    text = yaml.safe_dump(cfg.to_flat(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text


def small_market(**kw) -> MarketConfig:
    """Tiny market handy for tests and quick runs."""
    base = dict(n=50, tau_max=100, t_c=200, t_e=600, delta_t=10)
    base.update(kw)
    return MarketConfig(**base)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "GAConfig",
    "MarketConfig",
    "dump_config",
    "load_config",
    "small_market",
]
