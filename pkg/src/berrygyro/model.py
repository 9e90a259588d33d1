"""Body-frame Hamiltonian of a 14N nuclear spin in a 3D-rotating diamond.

Frames are nested inertial -> trap (system) -> diamond -> NV axis.  With
``phi = omega_gamma * t`` and ``w_a = omega_alpha + Omega`` the body-frame
Hamiltonian is::

    H(t) = Q' Iz^2 - w_a * A Rz(-phi) Bt Iz Bt^+ Rz(phi) A^+ - omega_gamma * A Iz A^+

with ``A = Ry(-theta)`` and ``Bt = Ry(-beta)``.  Writing ``H = Q' Iz^2 - B.I``
defines the effective field ``B`` (rad/s).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .spin_algebra import commutator, dagger, rotation_y, rotation_z, spin_operators

TWO_PI = 2 * np.pi

# 14N nuclear quadrupole splitting and NV zero-field splitting (rad/s).
Q_14N = TWO_PI * 4.95e6
D_NV = TWO_PI * 2.87e9
# 14N gyromagnetic ratio (rad s^-1 T^-1).
GAMMA_14N = 1.93e7

IX, IY, IZ = spin_operators(3)
IZ2 = IZ @ IZ

# Preset geometry: weak transverse field (theta, beta << 1) with omega_alpha ~ -omega_gamma.
PRESET_OMEGA_GAMMA = TWO_PI * 200e3
PRESET_TILT = 0.05
# Fractional offset from the resonance boundary.  sin(tilt)^2 / 2 puts the
# offset equal to the curvature of B_z at the crossing, which centres the
# CD coupling peak on omega_gamma t = pi.
NEAR_RESONANT_OFFSET = 1.25e-3
DETUNED_OFFSET = 0.05


def boundary_omega_alpha(omega_gamma: float, theta: float, beta: float, offset: float) -> float:
    """``omega_alpha`` with ``omega_alpha cos(theta - beta) = -omega_gamma cos(theta) (1 - offset)``."""
    return float(-omega_gamma * np.cos(theta) * (1 - offset) / np.cos(theta - beta))


@dataclass(frozen=True)
class PhysicalScenario:
    """One sensing configuration; all frequencies in rad/s."""

    Q: float = Q_14N
    D: float = D_NV
    A_perp: float = 0.0
    A_par: float = 0.0
    omega_alpha: float = boundary_omega_alpha(
        PRESET_OMEGA_GAMMA, PRESET_TILT, PRESET_TILT, NEAR_RESONANT_OFFSET
    )
    omega_gamma: float = PRESET_OMEGA_GAMMA
    beta: float = PRESET_TILT
    theta: float = PRESET_TILT
    Omega: float = 0.0
    gamma_n: float = GAMMA_14N

    def __post_init__(self):
        values = [getattr(self, f) for f in self.__dataclass_fields__]
        if not all(np.isfinite(v) for v in values):
            raise ValueError("scenario parameters must be finite")
        if self.omega_gamma == 0:
            raise ValueError("omega_gamma must be nonzero")
        if not (0 <= self.beta <= np.pi and 0 <= self.theta <= np.pi):
            raise ValueError("beta and theta must lie in [0, pi]")
        if self.D == 0 and self.A_perp != 0:
            raise ValueError("A_perp correction requires nonzero D")

    @property
    def Q_prime(self) -> float:
        """Hyperfine-corrected quadrupole coupling ``Q + A_perp^2 / D``."""
        if self.A_perp == 0:
            return self.Q
        return self.Q + self.A_perp**2 / self.D

    @property
    def omega_alpha_eff(self) -> float:
        return self.omega_alpha + self.Omega

    @property
    def period(self) -> float:
        return TWO_PI / abs(self.omega_gamma)

    def with_omega(self, Omega: float) -> "PhysicalScenario":
        return replace(self, Omega=float(Omega))


def near_resonant_scenario(offset: float = NEAR_RESONANT_OFFSET, **overrides) -> PhysicalScenario:
    """Scenario placed ``offset`` (fractional) from the resonance boundary at ``Omega = 0``.

    Positive ``offset`` lies on the detuned side, where ``B_z`` has a single
    near-zero minimum at ``omega_gamma t = pi``; negative values are resonant.
    ``omega_alpha`` is recomputed from the (possibly overridden) geometry.
    """
    overrides.pop("omega_alpha", None)
    base = PhysicalScenario(**overrides)
    wa = boundary_omega_alpha(base.omega_gamma, base.theta, base.beta, offset)
    return replace(base, omega_alpha=wa)


def detuned_scenario(offset: float = DETUNED_OFFSET, **overrides) -> PhysicalScenario:
    """Same geometry as :func:`near_resonant_scenario`, far from the boundary."""
    return near_resonant_scenario(offset, **overrides)


def _frames(scenario: PhysicalScenario, t):
    phi = scenario.omega_gamma * np.asarray(t, dtype=float)
    a = rotation_y(-scenario.theta)
    rz = rotation_z(-phi)
    bt = rotation_y(-scenario.beta)
    return a, rz, bt


def _precession_axis(scenario: PhysicalScenario, t) -> np.ndarray:
    """``W Iz W^+``: the trap axis seen from the NV frame."""
    a, rz, bt = _frames(scenario, t)
    inner = rz @ (bt @ IZ @ dagger(bt)) @ dagger(rz)
    return a @ inner @ dagger(a)


def _spin_axis(scenario: PhysicalScenario) -> np.ndarray:
    a = rotation_y(-scenario.theta)
    return a @ IZ @ dagger(a)


def hamiltonian(scenario: PhysicalScenario, t) -> np.ndarray:
    """Closed-form ``H(t)``; broadcasts over an array of times."""
    t = np.asarray(t, dtype=float)
    h = scenario.Q_prime * IZ2 - scenario.omega_alpha_eff * _precession_axis(scenario, t)
    return h - scenario.omega_gamma * _spin_axis(scenario)


def hamiltonian_derivative(scenario: PhysicalScenario, t) -> np.ndarray:
    """Analytic ``dH/dt``; only the ``Rz(-omega_gamma t)`` factors depend on time."""
    a, rz, bt = _frames(scenario, t)
    inner = rz @ (bt @ IZ @ dagger(bt)) @ dagger(rz)
    d_inner = 1j * scenario.omega_gamma * commutator(IZ, inner)
    return -scenario.omega_alpha_eff * (a @ d_inner @ dagger(a))


def frame_transform(scenario: PhysicalScenario, t) -> tuple[np.ndarray, np.ndarray]:
    """``W(t)`` and ``dW/dt`` for ``W = [Rz(wa t) Ry(beta) Rz(wg t) Ry(theta)]^+``.

    Uses the bare ``omega_alpha``; the inertial ``Omega`` enters separately as
    the ``-Omega Iz`` term of the system-frame Hamiltonian.
    """
    t = float(t)
    wa, wg = scenario.omega_alpha, scenario.omega_gamma
    ry_th = rotation_y(scenario.theta)
    ry_b = rotation_y(scenario.beta)
    rz_a = rotation_z(wa * t)
    rz_g = rotation_z(wg * t)
    big_r = rz_a @ ry_b @ rz_g @ ry_th
    # d/dt Rz(w t) = -i w Iz Rz(w t)
    d_big_r = (-1j * wa * IZ @ rz_a) @ ry_b @ rz_g @ ry_th + rz_a @ ry_b @ (
        -1j * wg * IZ @ rz_g
    ) @ ry_th
    return dagger(big_r), dagger(d_big_r)


def hamiltonian_direct(scenario: PhysicalScenario, t: float) -> np.ndarray:
    """Assemble ``H = W H_s' W^+ + i (dW/dt) W^+`` from explicit frame products.

    Independent of :func:`hamiltonian`; used to cross-check the closed form.
    """
    w, dw = frame_transform(scenario, t)
    big_r = dagger(w)
    h_n = scenario.Q_prime * IZ2
    h_sys = big_r @ h_n @ dagger(big_r) - scenario.Omega * IZ
    return w @ h_sys @ dagger(w) + 1j * dw @ dagger(w)


@dataclass(frozen=True)
class EffectiveField:
    t: np.ndarray
    B: np.ndarray  # shape (..., 3), rad/s


def field_from_hamiltonian(h: np.ndarray, q_prime: float) -> np.ndarray:
    """Project ``H - Q' Iz^2`` onto ``-I_k``: ``B_k = -Tr((H - Q' Iz^2) I_k) / 2``."""
    rest = h - q_prime * IZ2
    comps = [-np.real(np.trace(rest @ op, axis1=-2, axis2=-1)) / 2 for op in (IX, IY, IZ)]
    return np.stack(comps, axis=-1)


def effective_field(scenario: PhysicalScenario, t) -> EffectiveField:
    t = np.asarray(t, dtype=float)
    return EffectiveField(t=t, B=field_from_hamiltonian(hamiltonian(scenario, t), scenario.Q_prime))


def bz_closed_form(scenario: PhysicalScenario, t) -> np.ndarray:
    th, b = scenario.theta, scenario.beta
    phi = scenario.omega_gamma * np.asarray(t, dtype=float)
    geo = np.cos(th) * np.cos(b) - np.sin(th) * np.sin(b) * np.cos(phi)
    return scenario.omega_alpha_eff * geo + scenario.omega_gamma * np.cos(th)


def bz_extrema(scenario: PhysicalScenario) -> tuple[float, float]:
    """``B_z`` at ``omega_gamma t = 0`` and ``pi`` (the only stationary points)."""
    wa, wg, th, b = scenario.omega_alpha_eff, scenario.omega_gamma, scenario.theta, scenario.beta
    return wa * np.cos(th + b) + wg * np.cos(th), wa * np.cos(th - b) + wg * np.cos(th)


@dataclass(frozen=True)
class DiagonalCurves:
    t: np.ndarray
    Hpp: np.ndarray
    Hmm: np.ndarray


def diagonal_curves(scenario: PhysicalScenario, grid) -> DiagonalCurves:
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ValueError("grid needs at least two points")
    h = hamiltonian(scenario, grid)
    return DiagonalCurves(t=grid, Hpp=np.real(h[..., 0, 0]), Hmm=np.real(h[..., 2, 2]))


class Resonance(enum.Enum):
    DETUNED = "detuned"
    RESONANT = "resonant"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ResonanceClass:
    kind: Resonance
    product: float
    boundary_residual: float


RESONANCE_TOL = 1e-9


def resonance_class(scenario: PhysicalScenario, tol: float = RESONANCE_TOL) -> ResonanceClass:
    """Classify by the sign of the product of the two ``B_z`` extrema over ``omega_gamma``.

    ``boundary_residual`` is ``w_a cos(theta - beta) + omega_gamma cos(theta)``.
    """
    wa, wg, th, b = scenario.omega_alpha_eff, scenario.omega_gamma, scenario.theta, scenario.beta
    r = wa / wg
    product = (r * np.cos(th + b) + np.cos(th)) * (r * np.cos(th - b) + np.cos(th))
    if product < -tol:
        kind = Resonance.RESONANT
    elif product > tol:
        kind = Resonance.DETUNED
    else:
        kind = Resonance.BOUNDARY
    residual = wa * np.cos(th - b) + wg * np.cos(th)
    return ResonanceClass(kind, float(product), float(residual))
