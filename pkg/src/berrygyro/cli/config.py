"""Run configuration: TOML sections, validation, and conversion to model objects.

Frequencies are given in Hz in the file and converted to rad/s here.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..model import D_NV, GAMMA_14N, Q_14N, TWO_PI, PhysicalScenario, boundary_omega_alpha


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass(frozen=True)
class PhysicsSection:
    Q_hz: float = Q_14N / TWO_PI
    D_hz: float = D_NV / TWO_PI
    A_perp_hz: float = 0.0
    A_par_hz: float = 0.0
    gamma_n: float = GAMMA_14N


@dataclass(frozen=True)
class RotationSection:
    omega_gamma_hz: float = 200e3
    beta_rad: float = 0.05
    theta_rad: float = 0.05
    # Exactly one of these fixes omega_alpha.
    omega_alpha_hz: float | None = None
    boundary_offset: float | None = None


@dataclass(frozen=True)
class SweepSection:
    omega_min_hz: float = -500.0
    omega_max_hz: float = 500.0
    points: int = 1001
    # Propagation is ~50x costlier per point than a Wilson loop.
    dynamics_points: int = 21


@dataclass(frozen=True)
class GridSection:
    N_t: int = 4096
    steps: int = 16384


@dataclass(frozen=True)
class NoiseSection:
    T1e_s: float = 10e-3
    T2n_star_s: float = 10e-3
    t_i_s: tuple[float, ...] = (0.0, 0.5e-3, 1e-3)
    N_spins: float = 1e6
    Tm_s: float = 1.0
    tau_min_s: float = 0.1e-3
    tau_max_s: float = 100e-3
    tau_points: int = 31
    slope_s: float | None = None


@dataclass(frozen=True)
class OutputSection:
    directory: str = "berrygyro-out"
    formats: tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    rotation: RotationSection = field(default_factory=RotationSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    grid: GridSection = field(default_factory=GridSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # -- model objects -------------------------------------------------
    def scenario(self, Omega: float = 0.0) -> PhysicalScenario:
        p, r = self.physics, self.rotation
        wg = TWO_PI * r.omega_gamma_hz
        if r.omega_alpha_hz is not None:
            wa = TWO_PI * r.omega_alpha_hz
        else:
            wa = boundary_omega_alpha(wg, r.theta_rad, r.beta_rad, r.boundary_offset)
        return PhysicalScenario(
            Q=TWO_PI * p.Q_hz,
            D=TWO_PI * p.D_hz,
            A_perp=TWO_PI * p.A_perp_hz,
            A_par=TWO_PI * p.A_par_hz,
            omega_alpha=wa,
            omega_gamma=wg,
            beta=r.beta_rad,
            theta=r.theta_rad,
            Omega=Omega,
            gamma_n=p.gamma_n,
        )

    def omega_grid(self) -> np.ndarray:
        s = self.sweep
        return TWO_PI * np.linspace(s.omega_min_hz, s.omega_max_hz, s.points)

    def dynamics_grid(self) -> np.ndarray:
        s = self.sweep
        return TWO_PI * np.linspace(s.omega_min_hz, s.omega_max_hz, s.dynamics_points)

    def tau_grid(self) -> np.ndarray:
        n = self.noise
        return np.geomspace(n.tau_min_s, n.tau_max_s, n.tau_points)


_SECTIONS = {
    "physics": PhysicsSection,
    "rotation": RotationSection,
    "sweep": SweepSection,
    "grid": GridSection,
    "noise": NoiseSection,
    "output": OutputSection,
}


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _build_section(cls, raw: dict, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        default = known[key].default
        if isinstance(default, tuple):
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"{name}.{key} must be a list")
            value = tuple(value)
        elif isinstance(default, bool) or isinstance(value, bool):
            raise ConfigError(f"{name}.{key} must be a number")
        elif isinstance(default, int) and not isinstance(default, bool):
            if not isinstance(value, int):
                raise ConfigError(f"{name}.{key} must be an integer")
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError(f"{name}.{key} must be a string")
        elif value is not None:
            if not isinstance(value, (int, float)):
                raise ConfigError(f"{name}.{key} must be a number")
            value = float(value)
        kwargs[key] = value
    return cls(**kwargs)


def validate(cfg: RunConfig) -> RunConfig:
    p, r, s, g, n = cfg.physics, cfg.rotation, cfg.sweep, cfg.grid, cfg.noise
    floats = [*dataclasses.astuple(p), r.omega_gamma_hz, r.beta_rad, r.theta_rad,
              s.omega_min_hz, s.omega_max_hz, *n.t_i_s, n.T1e_s, n.T2n_star_s, n.N_spins,
              n.Tm_s, n.tau_min_s, n.tau_max_s]
    floats += [v for v in (r.omega_alpha_hz, r.boundary_offset, n.slope_s) if v is not None]
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in floats):
        raise ConfigError("all numeric parameters must be finite")
    if (r.omega_alpha_hz is None) == (r.boundary_offset is None):
        raise ConfigError("set exactly one of rotation.omega_alpha_hz and rotation.boundary_offset")
    if r.omega_gamma_hz == 0:
        raise ConfigError("rotation.omega_gamma_hz must be nonzero")
    if not (0 <= r.beta_rad <= math.pi and 0 <= r.theta_rad <= math.pi):
        raise ConfigError("angles must lie in [0, pi]")
    if s.points < 3 or s.dynamics_points < 3:
        raise ConfigError("sweep.points and sweep.dynamics_points must be >= 3")
    if not s.omega_min_hz < s.omega_max_hz:
        raise ConfigError("sweep.omega_min_hz must be below omega_max_hz")
    if not (_is_pow2(g.N_t) and _is_pow2(g.steps)):
        raise ConfigError("grid.N_t and grid.steps must be powers of two")
    if g.N_t < 256 or g.steps < 1024:
        raise ConfigError("need grid.N_t >= 256 and grid.steps >= 1024")
    if n.T1e_s <= 0 or n.T2n_star_s <= 0 or n.Tm_s <= 0 or n.N_spins < 1:
        raise ConfigError("noise times must be positive and N_spins >= 1")
    if any(t < 0 for t in n.t_i_s) or not n.t_i_s:
        raise ConfigError("noise.t_i_s must be a non-empty list of non-negative times")
    if not 0 < n.tau_min_s < n.tau_max_s or n.tau_points < 2:
        raise ConfigError("noise tau grid must satisfy 0 < tau_min < tau_max with >= 2 points")
    if n.slope_s is not None and n.slope_s <= 0:
        raise ConfigError("noise.slope_s must be positive")
    bad = set(cfg.output.formats) - {"csv", "json"}
    if bad:
        raise ConfigError(f"unsupported output formats {sorted(bad)}")
    try:
        cfg.scenario()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def from_dict(raw: dict) -> RunConfig:
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    sections = {k: _build_section(cls, raw.get(k, {}), k) for k, cls in _SECTIONS.items()}
    return validate(RunConfig(**sections))


def loads(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return from_dict(raw)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


PRESETS = ("near_resonant", "detuned", "resonant")


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    text = resources.files("berrygyro.presets").joinpath(f"{name}.toml").read_text()
    return loads(text)
