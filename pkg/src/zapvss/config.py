"""Experiment configuration and the flat ``key = value`` file format."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

__all__ = [
    "ALGORITHMS",
    "SCENARIOS",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "builtin_config_path",
]

ALGORITHMS = (
    "LMS",
    "ZAP_FIXED_L1",
    "ZAP_YOU_L1",
    "ZAP_VSS1_L1",
    "ZAP_VSS2_L1",
    "ZAP_FIXED_L0",
    "ZAP_YOU_L0",
    "ZAP_VSS1_L0",
    "ZAP_VSS2_L0",
)
SCENARIOS = ("SPARSE_SWITCH_SPARSE", "SPARSE_SWITCH_DISPERSIVE")
CONVENTIONS = ("norm", "squared")


class ConfigError(ValueError):
    """Malformed or out-of-range experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    # scenario
    L: int = 512
    n_samples: int = 10000
    switch_at: int = 5000
    scenario: str = "SPARSE_SWITCH_SPARSE"
    active_taps: int = 16
    snr_db: float = 30.0
    runs: int = 10
    seed: int = 0
    workers: int = 1
    out_dir: str = "out"
    misalign_convention: str = "norm"
    algorithms: tuple = ALGORITHMS
    # shared update parameters
    mu: float = 1e-3
    beta: float = 5.0
    sigma: float = 0.0  # penalty shape for the l0 measure; 0 means "same as beta"
    p: float = 0.5
    measure_l1: str = "M1"
    measure_l0: str = "M3"
    # fixed attractors
    kappa_fixed_l1: float = 1e-4
    kappa_fixed_l0: float = 1e-4
    # decay heuristic
    kappa0_you_l1: float = 1e-3
    kappa0_you_l0: float = 1e-3
    kappa_min_l1: float = 1e-6
    kappa_min_l0: float = 1e-6
    eta: float = 0.5
    conv_short: int = 64
    conv_long: int = 1024
    conv_ratio: float = 0.98
    # proposed controllers
    kappa0_vss: float = 0.0
    lam: float = 0.01
    alpha: float = 0.01
    gamma_vss1_l1: float = 1.0
    gamma_vss1_l0: float = 1.0
    gamma_vss2_l1: float = 1.0
    gamma_vss2_l0: float = 1.0

    def __post_init__(self):
        algs = self.algorithms
        if isinstance(algs, str):
            algs = [a for a in (s.strip() for s in algs.split(",")) if a]
        algs = tuple(a.upper() for a in algs)
        object.__setattr__(self, "algorithms", algs)
        object.__setattr__(self, "scenario", self.scenario.upper())
        object.__setattr__(self, "misalign_convention", self.misalign_convention.lower())
        self.validate()

    def validate(self) -> None:
        problems = []
        if self.L <= 1:
            problems.append(f"L must exceed 1 (got {self.L})")
        if self.n_samples < 1:
            problems.append(f"n_samples must be positive (got {self.n_samples})")
        if not 0 <= self.switch_at < self.n_samples:
            problems.append(f"switch_at must lie in [0, n_samples) (got {self.switch_at})")
        if self.runs < 1:
            problems.append(f"runs must be at least 1 (got {self.runs})")
        if self.workers < 1:
            problems.append(f"workers must be at least 1 (got {self.workers})")
        if not 1 <= self.active_taps <= self.L:
            problems.append(f"active_taps must lie in [1, L] (got {self.active_taps})")
        if not 0 <= self.seed < 2**64:
            problems.append(f"seed must be an unsigned 64-bit integer (got {self.seed})")
        if self.scenario not in SCENARIOS:
            problems.append(f"scenario must be one of {SCENARIOS} (got {self.scenario!r})")
        if self.misalign_convention not in CONVENTIONS:
            problems.append(f"misalign_convention must be one of {CONVENTIONS}")
        if not self.algorithms:
            problems.append("algorithms is empty")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            problems.append(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            problems.append("algorithms contains duplicates")
        if math.isnan(self.snr_db):
            problems.append("snr_db is NaN")
        for name in ("mu", "beta", "eta", "lam", "alpha", "kappa_min_l1", "kappa_min_l0",
                     "gamma_vss1_l1", "gamma_vss1_l0", "gamma_vss2_l1", "gamma_vss2_l0"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive (got {getattr(self, name)})")
        for name in ("kappa_fixed_l1", "kappa_fixed_l0", "kappa0_you_l1", "kappa0_you_l0",
                     "kappa0_vss", "sigma"):
            if not getattr(self, name) >= 0:
                problems.append(f"{name} must be nonnegative (got {getattr(self, name)})")
        for name in ("eta", "lam", "alpha"):
            if not getattr(self, name) < 1:
                problems.append(f"{name} must be below 1 (got {getattr(self, name)})")
        if not 1 <= self.conv_short <= self.conv_long:
            problems.append("need 1 <= conv_short <= conv_long")
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def sigma_l0(self) -> float:
        return self.sigma if self.sigma > 0 else self.beta

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELDS[name].type
    if kind == "int":
        return int(raw, 0)
    if kind == "float":
        return float(raw)
    if kind == "tuple":
        return tuple(a.strip() for a in raw.split(",") if a.strip())
    return raw


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {raw!r}") from exc
    try:
        return ExperimentConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def builtin_config_path(name: str) -> Path:
    """Path of a config shipped inside the package (e.g. ``reference.cfg``)."""
    return Path(str(resources.files("zapvss") / "data" / name))


def load_config(path) -> ExperimentConfig:
    """Read a config file. A bare name like ``reference.cfg`` that does not exist
    on disk falls back to the copy shipped with the package."""
    path = Path(path)
    if not path.exists() and path.parent == Path("."):
        shipped = builtin_config_path(path.name if path.suffix else f"{path.name}.cfg")
        if shipped.exists():
            path = shipped
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))
