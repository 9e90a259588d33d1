"""Eigenstate tracking, adiabaticity, Kato counter-diabatic driving and Berry phases."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import model
from .errors import DegenerateSpectrum, UnderResolved, UnwrapAmbiguity
from .model import PhysicalScenario
from .spin_algebra import dagger, eigensystem

MIN_NT = 256
OVERLAP_MIN = 0.99
DEGENERACY_GUARD = 1e-6
# Wrapped phase steps above this between neighbouring Omega samples trigger refinement.
UNWRAP_LIMIT = np.pi / 2


@dataclass(frozen=True)
class EigenTrack:
    """Gauge-continuous eigensystem on a uniform grid over one period.

    ``values[k, n]`` and ``vectors[k, :, n]`` belong to time ``t[k]``;
    ``t[-1]`` is the period, so ``t[0]`` and ``t[-1]`` describe the same
    Hamiltonian.  ``hdot[k]`` holds ``dH/dt`` at ``t[k]`` (``None`` when the
    track was built without derivatives).
    """

    t: np.ndarray
    values: np.ndarray
    vectors: np.ndarray
    hdot: np.ndarray | None
    min_gap: float
    min_gap_index: int

    @property
    def n_t(self) -> int:
        return len(self.t) - 1

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    def projectors(self) -> np.ndarray:
        """``P[k, n] = |v_n(t_k)><v_n(t_k)|``, shape ``(k, n, dim, dim)``."""
        v = np.swapaxes(self.vectors, -1, -2)  # (k, n, dim)
        return v[..., :, None] * np.conj(v[..., None, :])


def _align_phases(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Propagate phase alignment so successive overlaps are real positive."""
    raw = np.einsum("kin,kin->kn", np.conj(vectors[:-1]), vectors[1:])
    angles = np.concatenate([np.zeros((1, vectors.shape[-1])), np.cumsum(np.angle(raw), axis=0)])
    return vectors * np.exp(-1j * angles)[:, None, :], np.abs(raw)


def track_path(
    hfunc: Callable[[np.ndarray], np.ndarray],
    hdot_func: Callable[[np.ndarray], np.ndarray] | None,
    t: np.ndarray,
    guard: float = DEGENERACY_GUARD,
) -> EigenTrack:
    """Track the eigensystem of an arbitrary Hermitian path sampled at ``t``."""
    t = np.asarray(t, dtype=float)
    h = hfunc(t)
    values, vectors = eigensystem(h)
    vectors, overlaps = _align_phases(vectors)
    gaps = np.min(np.diff(values, axis=-1), axis=-1)
    k_min = int(np.argmin(gaps))
    min_gap = float(gaps[k_min])
    scale = float(np.max(np.abs(values)))
    if min_gap < guard * scale:
        raise DegenerateSpectrum(
            f"minimum gap {min_gap:.3e} rad/s below guard {guard * scale:.3e} "
            f"at t = {t[k_min]:.6e} s"
        )
    worst = float(np.min(overlaps))
    if worst < OVERLAP_MIN:
        raise UnderResolved(f"adjacent eigenvector overlap {worst:.4f} < {OVERLAP_MIN}; refine the grid")
    hdot = None if hdot_func is None else hdot_func(t)
    return EigenTrack(t, values, vectors, hdot, min_gap, k_min)


def track_eigensystem(
    scenario: PhysicalScenario, n_t: int = 4096, with_derivative: bool = True
) -> EigenTrack:
    """Instantaneous eigensystem of ``H(t)`` on ``n_t + 1`` points spanning one period."""
    if n_t < MIN_NT:
        raise ValueError(f"n_t must be at least {MIN_NT}")
    t = np.linspace(0.0, scenario.period, n_t + 1)
    deriv = (lambda tt: model.hamiltonian_derivative(scenario, tt)) if with_derivative else None
    return track_path(lambda tt: model.hamiltonian(scenario, tt), deriv, t)


def select_level(track: EigenTrack, level: int | str = "plus") -> int:
    """Index of the tracked level.

    ``"plus"`` picks the eigenstate with the largest ``|<+1|v_n(0)>|``,
    i.e. the one adiabatically connected to bare ``|+1>``.
    """
    if level == "plus":
        return int(np.argmax(np.abs(track.vectors[0, 0, :])))
    level = int(level)
    if not 0 <= level < track.dim:
        raise ValueError(f"level {level} out of range")
    return level


@dataclass(frozen=True)
class AdiabaticityReport:
    t: np.ndarray
    eps: np.ndarray  # (k, m, n)
    max_eps: float


def _require_hdot(track: EigenTrack) -> np.ndarray:
    if track.hdot is None:
        raise ValueError("track was built without dH/dt samples")
    return track.hdot


def _hdot_eigenbasis(track: EigenTrack) -> np.ndarray:
    return dagger(track.vectors) @ _require_hdot(track) @ track.vectors


def adiabatic_parameter(track: EigenTrack) -> AdiabaticityReport:
    """``eps_mn = |<m|dH/dt|n>| / (lambda_n - lambda_m)^2`` at every grid point."""
    m = np.abs(_hdot_eigenbasis(track))
    diff = track.values[:, None, :] - track.values[:, :, None]
    dim = track.dim
    off = ~np.eye(dim, dtype=bool)
    eps = np.zeros_like(m)
    eps[:, off] = m[:, off] / diff[:, off] ** 2
    return AdiabaticityReport(track.t, eps, float(eps.max()))


def cd_resolvent(values: np.ndarray, vectors: np.ndarray, hdot: np.ndarray) -> np.ndarray:
    """``i sum_{m != n} P_m Hdot P_n / (lambda_n - lambda_m)``; broadcasts over leading axes."""
    m = dagger(vectors) @ hdot @ vectors
    diff = values[..., None, :] - values[..., :, None]  # lambda_n - lambda_m at [m, n]
    dim = values.shape[-1]
    off = ~np.eye(dim, dtype=bool)
    c = np.zeros_like(m)
    c[..., off] = 1j * m[..., off] / diff[..., off]
    h_cd = vectors @ c @ dagger(vectors)
    return (h_cd + dagger(h_cd)) / 2


def kato_cd(track: EigenTrack, t_index: int | np.ndarray | None = None) -> np.ndarray:
    """Counter-diabatic Hamiltonian at grid indices ``t_index`` (all when ``None``)."""
    idx = slice(None) if t_index is None else t_index
    return cd_resolvent(track.values[idx], track.vectors[idx], _require_hdot(track)[idx])


def _projector_derivative(track: EigenTrack, k: np.ndarray) -> np.ndarray:
    """Fourth-order central difference of the projectors; the grid wraps periodically."""
    p = track.projectors()[:-1]
    n = len(p)
    dt = track.t[1] - track.t[0]
    return (
        p[(k - 2) % n] - 8 * p[(k - 1) % n] + 8 * p[(k + 1) % n] - p[(k + 2) % n]
    ) / (12 * dt)


def kato_cd_projector(track: EigenTrack, t_index: int | np.ndarray | None = None) -> np.ndarray:
    """``(i/2) sum_n [dP_n/dt, P_n]`` with ``dP_n/dt`` differenced along the track.

    Independent of the resolvent form; the track must sample a closed period.
    """
    n = track.n_t
    k = np.arange(n + 1) if t_index is None else np.asarray(t_index)
    k = k % n
    dp = _projector_derivative(track, k)
    p = track.projectors()[k]
    return 0.5j * np.sum(dp @ p - p @ dp, axis=-3)


@dataclass(frozen=True)
class CDProfile:
    t: np.ndarray
    phase: np.ndarray  # omega_gamma * t
    plus_minus: np.ndarray
    plus_zero: np.ndarray
    zero_minus: np.ndarray


def cd_bare_basis_profile(scenario: PhysicalScenario, n_t: int = 4096) -> CDProfile:
    """Magnitudes of the bare-basis couplings of ``H_CD`` over one period."""
    track = track_eigensystem(scenario, n_t)
    h_cd = kato_cd(track)
    return CDProfile(
        t=track.t,
        phase=scenario.omega_gamma * track.t,
        plus_minus=np.abs(h_cd[:, 0, 2]),
        plus_zero=np.abs(h_cd[:, 0, 1]),
        zero_minus=np.abs(h_cd[:, 1, 2]),
    )


def _wrap(phase):
    """Map onto (-pi, pi]."""
    w = np.angle(np.exp(1j * np.asarray(phase)))
    return np.where(w <= -np.pi, np.pi, w)


def wilson_loop_phase(track: EigenTrack, level: int | str = "plus") -> float:
    """Discrete Berry phase ``-arg prod_k <v_k|v_{k+1}>`` over the closed loop.

    The final grid point is replaced by the first, so the product is a
    Bargmann invariant and independent of every per-point phase choice.
    """
    n = select_level(track, level)
    v = track.vectors[:-1, :, n]
    ov = np.einsum("ki,ki->k", np.conj(v), np.roll(v, -1, axis=0))
    worst = float(np.min(np.abs(ov)))
    if worst < OVERLAP_MIN:
        raise UnderResolved(f"loop overlap {worst:.4f} < {OVERLAP_MIN}")
    # sum of angles avoids precision loss of a long product
    return float(_wrap(-np.sum(np.angle(ov))))


@dataclass(frozen=True)
class BerryCurve:
    omega_grid: np.ndarray
    phi_g: np.ndarray
    delta_phi_g: np.ndarray
    slope: np.ndarray

    @property
    def max_abs_slope(self) -> float:
        return float(np.max(np.abs(self.slope)))

    @property
    def argmax_slope(self) -> float:
        return float(self.omega_grid[int(np.argmax(np.abs(self.slope)))])


def _raw_phases(template, omegas, level, n_t, workers):
    def one(om):
        track = track_eigensystem(template.with_omega(om), n_t, with_derivative=False)
        return wilson_loop_phase(track, level)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return np.array(list(pool.map(one, omegas)))
    return np.array([one(om) for om in omegas])


def berry_curve(
    template: PhysicalScenario,
    omega_grid: Sequence[float],
    level: int | str = "plus",
    n_t: int = 4096,
    workers: int = 1,
) -> BerryCurve:
    """Unwrapped Berry phase per cycle against the rotation rate ``Omega``.

    Intervals whose wrapped phase step exceeds ``UNWRAP_LIMIT`` are bisected
    once; any that remain ambiguous raise :class:`UnwrapAmbiguity`.
    """
    omegas = np.asarray(omega_grid, dtype=float)
    if omegas.size < 3 or np.any(np.diff(omegas) <= 0):
        raise ValueError("omega_grid must be strictly increasing with at least 3 points")
    raw = _raw_phases(template, omegas, level, n_t, workers)
    steps = np.abs(_wrap(np.diff(raw)))
    bad = np.flatnonzero(steps > UNWRAP_LIMIT)
    if bad.size:
        mids = (omegas[bad] + omegas[bad + 1]) / 2
        extra = _raw_phases(template, mids, level, n_t, workers)
        omegas = np.insert(omegas, bad + 1, mids)
        raw = np.insert(raw, bad + 1, extra)
        steps = np.abs(_wrap(np.diff(raw)))
        if np.any(steps > UNWRAP_LIMIT):
            where = omegas[np.flatnonzero(steps > UNWRAP_LIMIT)]
            raise UnwrapAmbiguity(
                f"phase jumps stay ambiguous near Omega = {where.tolist()} rad/s; "
                "use a denser omega grid"
            )
    phi = raw[0] + np.concatenate([[0.0], np.cumsum(_wrap(np.diff(raw)))])
    zero = np.flatnonzero(omegas == 0.0)
    if zero.size:
        ref = phi[zero[0]]
    else:
        j = int(np.argmin(np.abs(omegas)))
        raw0 = _raw_phases(template, [0.0], level, n_t, 1)[0]
        ref = phi[j] + _wrap(raw0 - raw[j])
    delta = phi - ref
    slope = np.gradient(phi, omegas, edge_order=2)
    return BerryCurve(omegas, phi, delta, slope)
