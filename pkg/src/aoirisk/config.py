"""System and solver configuration, plus the plain-text key=value config loader."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .grids import GridMode, Interpolation


class ConfigError(ValueError):
    """Malformed config file or out-of-range parameter value."""


@dataclass(frozen=True)
class SystemConfig:
    """Parameters of the monitoring link and of the weighted risk objective.

    ``lam`` is the per-slot Bernoulli arrival probability of fresh status
    updates at the device, ``p`` the per-transmission delivery probability.
    ``eta`` weighs the CVaR-of-AoI term, ``nu`` the energy term, ``alpha``
    is the CVaR tail level. Ages are capped at ``cap_device``/``cap_receiver``.
    """

    lam: float
    p: float
    energy_cost: float
    gamma: float
    eta: float
    nu: float
    alpha: float
    cap_device: int
    cap_receiver: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must be in [0, 1], got {self.p}")
        if self.energy_cost < 0.0:
            raise ConfigError(f"energy_cost must be >= 0, got {self.energy_cost}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.eta < 0.0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if self.nu < 0.0:
            raise ConfigError(f"nu must be >= 0, got {self.nu}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.cap_device < 1:
            raise ConfigError(f"cap_device must be >= 1, got {self.cap_device}")
        if self.cap_receiver < self.cap_device:
            # Otherwise receiver-age saturation can drop below the device age.
            raise ConfigError(
                f"cap_receiver ({self.cap_receiver}) must be >= cap_device ({self.cap_device})"
            )

    @property
    def stage_bound(self) -> float:
        """Largest possible one-slot cost: (1+eta)*cap_receiver + nu*energy_cost."""
        return (1.0 + self.eta) * self.cap_receiver + self.nu * self.energy_cost

    @property
    def value_bound(self) -> float:
        """Analytic ceiling on any discounted value: stage_bound / (1 - gamma)."""
        return self.stage_bound / (1.0 - self.gamma)

    def truncation_bound(self, horizon: int) -> float:
        """Geometric tail bound gamma^H/(1-gamma) * stage_bound for horizon H."""
        return self.gamma**horizon / (1.0 - self.gamma) * self.stage_bound

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "p": self.p,
            "energy_cost": self.energy_cost,
            "gamma": self.gamma,
            "eta": self.eta,
            "nu": self.nu,
            "alpha": self.alpha,
            "cap_device": self.cap_device,
            "cap_receiver": self.cap_receiver,
        }

    def sha256(self) -> str:
        """Hash of the canonical key=value rendering, used to pair policy files with configs."""
        text = "\n".join(f"{k}={v!r}" for k, v in sorted(self.as_dict().items()))
        return hashlib.sha256(text.encode()).hexdigest()


def default_horizon(cfg: SystemConfig, rel: float = 1e-3) -> int:
    """Smallest H with relative truncation error gamma^H <= rel of the value scale."""
    return max(1, math.ceil(math.log(rel) / math.log(cfg.gamma)))


@dataclass(frozen=True)
class SolverSettings:
    """Knobs of the augmented value-iteration solver."""

    vi_tolerance: float = 1e-8
    max_iterations: int = 5000
    inner_grid_points: int = 129
    coordinate_ascent_rounds: int = 8
    interpolation: Interpolation = Interpolation.LOG_BILINEAR
    grid_points: int = 65
    mode: GridMode = GridMode.MANIFOLD1D

    def __post_init__(self) -> None:
        if self.vi_tolerance <= 0.0:
            raise ConfigError(f"solver.vi_tolerance must be > 0, got {self.vi_tolerance}")
        if self.max_iterations < 1:
            raise ConfigError(f"solver.max_iterations must be >= 1, got {self.max_iterations}")
        if self.inner_grid_points < 3:
            raise ConfigError(
                f"solver.inner_grid_points must be >= 3, got {self.inner_grid_points}"
            )
        if self.coordinate_ascent_rounds < 0:
            raise ConfigError(
                f"solver.coordinate_ascent_rounds must be >= 0, got {self.coordinate_ascent_rounds}"
            )
        if self.grid_points < 2:
            raise ConfigError(f"solver.grid_points must be >= 2, got {self.grid_points}")

    def as_dict(self) -> dict:
        return {
            "vi_tolerance": self.vi_tolerance,
            "max_iterations": self.max_iterations,
            "inner_grid_points": self.inner_grid_points,
            "coordinate_ascent_rounds": self.coordinate_ascent_rounds,
            "interpolation": self.interpolation.value,
            "grid_points": self.grid_points,
            "mode": self.mode.value,
        }


_SYSTEM_KEYS = {
    "lambda": ("lam", float),
    "p": ("p", float),
    "energy_cost": ("energy_cost", float),
    "gamma": ("gamma", float),
    "eta": ("eta", float),
    "nu": ("nu", float),
    "alpha": ("alpha", float),
    "cap_device": ("cap_device", int),
    "cap_receiver": ("cap_receiver", int),
}

_SOLVER_KEYS = {
    "solver.vi_tolerance": ("vi_tolerance", float),
    "solver.max_iterations": ("max_iterations", int),
    "solver.inner_grid_points": ("inner_grid_points", int),
    "solver.coordinate_ascent_rounds": ("coordinate_ascent_rounds", int),
    "solver.interpolation": ("interpolation", Interpolation),
    "solver.grid_points": ("grid_points", int),
    "solver.mode": ("mode", GridMode),
}


def _parse_value(raw: str, kind, key: str, lineno: int):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return kind(raw)  # enum lookup by value
    except ValueError:
        raise ConfigError(f"line {lineno}: invalid value {raw!r} for key {key!r}") from None


def load_config(path: str | Path) -> tuple[SystemConfig, SolverSettings]:
    """Parse a key=value config file (``#`` starts a comment; unknown keys are errors)."""
    system: dict = {}
    solver: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in _SYSTEM_KEYS:
            attr, kind = _SYSTEM_KEYS[key]
            if attr in system:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            system[attr] = _parse_value(raw, kind, key, lineno)
        elif key in _SOLVER_KEYS:
            attr, kind = _SOLVER_KEYS[key]
            if attr in solver:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            solver[attr] = _parse_value(raw, kind, key, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    missing = [k for k, (attr, _) in _SYSTEM_KEYS.items() if attr not in system]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(sorted(missing))}")
    return SystemConfig(**system), SolverSettings(**solver)


def replace_param(cfg: SystemConfig, name: str, value: float) -> SystemConfig:
    """Return a copy of cfg with one sweepable parameter replaced."""
    attr = {"eta": "eta", "alpha": "alpha", "nu": "nu", "lambda": "lam", "p": "p"}.get(name)
    if attr is None:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    return replace(cfg, **{attr: value})
