"""Schrodinger propagation with or without counter-diabatic driving, and phase bookkeeping."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from . import model
from .adiabatic_geo import (
    DEGENERACY_GUARD,
    EigenTrack,
    _wrap,
    cd_resolvent,
    select_level,
    track_path,
)
from .errors import DegenerateSpectrum, LowReturnFidelity, NumericalFailure
from .model import PhysicalScenario
from .spin_algebra import eigensystem, unitary_exp

MIN_STEPS = 1024
LOW_FIDELITY = 0.9


@dataclass(frozen=True)
class Trajectory:
    scenario: PhysicalScenario
    t: np.ndarray
    states: np.ndarray  # (steps + 1, dim)
    used_cd: bool
    step_count: int


def effective_hamiltonian(scenario: PhysicalScenario, t: np.ndarray, include_cd: bool) -> np.ndarray:
    """``H(t)`` or ``H(t) + H_CD(t)`` from a fresh eigendecomposition at each ``t``."""
    h = model.hamiltonian(scenario, t)
    if not include_cd:
        return h
    values, vectors = eigensystem(h)
    gaps = np.min(np.diff(values, axis=-1), axis=-1)
    if gaps.min() < DEGENERACY_GUARD * np.max(np.abs(values)):
        raise DegenerateSpectrum(f"minimum gap {gaps.min():.3e} rad/s on the propagation grid")
    return h + cd_resolvent(values, vectors, model.hamiltonian_derivative(scenario, t))


def propagate(
    scenario: PhysicalScenario,
    include_cd: bool,
    psi0: np.ndarray,
    steps: int = 2**14,
) -> Trajectory:
    """Exponential-midpoint stepping over one period ``T = 2 pi / |omega_gamma|``.

    ``psi_{k+1} = exp(-i H_eff(t_k + h/2) h) psi_k`` with ``h = T / steps``.
    Each step is an exact unitary, so the norm is preserved to rounding.
    """
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be at least {MIN_STEPS}")
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"psi0 must be normalized (norm {norm})")
    h = scenario.period / steps
    t = np.arange(steps + 1) * h
    mids = t[:-1] + h / 2
    u = unitary_exp(effective_hamiltonian(scenario, mids, include_cd), h)
    states = np.empty((steps + 1, len(psi0)), dtype=complex)
    states[0] = psi0
    psi = psi0
    for k in range(steps):
        psi = u[k] @ psi
        states[k + 1] = psi
    if not np.all(np.isfinite(states)):
        raise NumericalFailure("non-finite amplitudes during propagation")
    return Trajectory(scenario, t, states, include_cd, steps)


def matching_track(trajectory: Trajectory) -> EigenTrack:
    """Eigen-track sampled on exactly the trajectory grid."""
    s = trajectory.scenario
    return track_path(
        lambda tt: model.hamiltonian(s, tt),
        lambda tt: model.hamiltonian_derivative(s, tt),
        trajectory.t,
    )


def _aligned_track(trajectory: Trajectory, track: EigenTrack | None) -> EigenTrack:
    if track is not None and len(track.t) == len(trajectory.t) and np.allclose(
        track.t, trajectory.t, rtol=0, atol=1e-12 * trajectory.t[-1]
    ):
        return track
    return matching_track(trajectory)


def fidelity_profile(
    trajectory: Trajectory, track: EigenTrack | None = None, level: int | str = "plus"
) -> np.ndarray:
    """``|<v_n(t)|psi(t)>|^2`` on the trajectory grid."""
    track = _aligned_track(trajectory, track)
    n = select_level(track, level)
    overlap = np.einsum("ki,ki->k", np.conj(track.vectors[:, :, n]), trajectory.states)
    return np.abs(overlap) ** 2


@dataclass(frozen=True)
class PhaseResult:
    total_phase: float
    dynamical_phase: float
    geometric_phase: float
    return_fidelity: float
    min_instantaneous_fidelity: float

    @property
    def reliable(self) -> bool:
        return self.return_fidelity >= LOW_FIDELITY


def extract_phases(
    trajectory: Trajectory, track: EigenTrack | None = None, level: int | str = "plus"
) -> PhaseResult:
    """Split the cyclic phase into dynamical and geometric parts.

    With CD the dynamical phase is ``-int lambda_n dt`` (the CD term has no
    diagonal part in the eigenbasis); without CD it is ``-int <psi|H|psi> dt``.
    Both integrals use the trapezoidal rule on the trajectory grid.
    """
    track = _aligned_track(trajectory, track)
    n = select_level(track, level)
    psi0, psi_t = trajectory.states[0], trajectory.states[-1]
    ret = np.vdot(psi0, psi_t)
    total = float(np.angle(ret))
    if trajectory.used_cd:
        energy = track.values[:, n]
    else:
        h = model.hamiltonian(trajectory.scenario, trajectory.t)
        psi = trajectory.states
        energy = np.real(np.einsum("ki,kij,kj->k", np.conj(psi), h, psi))
    dynamical = -float(trapezoid(energy, trajectory.t))
    fid = fidelity_profile(trajectory, track, n)
    result = PhaseResult(
        total_phase=total,
        dynamical_phase=dynamical,
        geometric_phase=float(_wrap(total - dynamical)),
        return_fidelity=float(min(abs(ret) ** 2, 1.0)),
        min_instantaneous_fidelity=float(fid.min()),
    )
    if not result.reliable:
        warnings.warn(
            f"return fidelity {result.return_fidelity:.3f} < {LOW_FIDELITY}; "
            "geometric phase unreliable",
            LowReturnFidelity,
            stacklevel=2,
        )
    return result


def cyclic_phase(
    scenario: PhysicalScenario,
    include_cd: bool,
    steps: int = 2**14,
    level: int | str = "plus",
) -> tuple[PhaseResult, np.ndarray]:
    """Start in the tracked eigenstate at ``t = 0``, propagate one period, and decompose."""
    h = scenario.period / steps
    t = np.arange(steps + 1) * h
    track = track_path(
        lambda tt: model.hamiltonian(scenario, tt),
        lambda tt: model.hamiltonian_derivative(scenario, tt),
        t,
    )
    n = select_level(track, level)
    traj = propagate(scenario, include_cd, track.vectors[0, :, n], steps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowReturnFidelity)
        result = extract_phases(traj, track, n)
    return result, fidelity_profile(traj, track, n)
