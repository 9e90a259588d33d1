"""Shot-noise rotation sensitivity, decoherence/overhead penalties and T_m optimisation.

Units: slopes ``|d phi_g / d Omega|`` in seconds, times in seconds,
sensitivities in rad s^-1 Hz^-1/2 (and T Hz^-1/2 for the magnetometry figure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .adiabatic_geo import BerryCurve
from .model import GAMMA_14N

OPT_SPAN = 1e3
OPT_RTOL = 1e-6


@dataclass(frozen=True)
class SensitivityPoint:
    omega: float
    slope: float
    eta: float
    eta_single: float
    eta_B: float


def ideal_sensitivity(
    slope: float, N: float, Tm: float, gamma: float = GAMMA_14N, omega: float = math.nan
) -> SensitivityPoint:
    """``eta = 1 / (|slope| sqrt(N Tm))`` with single-spin and magnetometry conversions.

    A zero slope gives ``eta = inf`` rather than an error.
    """
    if N < 1 or Tm <= 0:
        raise ValueError("need N >= 1 and Tm > 0")
    slope = abs(float(slope))
    eta = math.inf if slope == 0 else 1.0 / (slope * math.sqrt(N * Tm))
    return SensitivityPoint(omega, slope, eta, eta * math.sqrt(N), eta / gamma)


@dataclass(frozen=True)
class SensitivityCurve:
    omega: np.ndarray
    slope: np.ndarray
    eta: np.ndarray
    eta_single: np.ndarray
    eta_B: np.ndarray

    @property
    def optimum_index(self) -> int:
        return int(np.argmin(self.eta))

    @property
    def optimum(self) -> SensitivityPoint:
        return self.point(self.optimum_index)

    def point(self, i: int) -> SensitivityPoint:
        return SensitivityPoint(
            float(self.omega[i]), float(self.slope[i]), float(self.eta[i]),
            float(self.eta_single[i]), float(self.eta_B[i]),
        )

    def points(self) -> list[SensitivityPoint]:
        return [self.point(i) for i in range(len(self.omega))]


def sensitivity_curve(curve: BerryCurve, N: float, Tm: float, gamma: float = GAMMA_14N) -> SensitivityCurve:
    pts = [ideal_sensitivity(s, N, Tm, gamma, om) for om, s in zip(curve.omega_grid, curve.slope)]
    cols = {f: np.array([getattr(p, f) for p in pts]) for f in ("omega", "slope", "eta", "eta_single", "eta_B")}
    return SensitivityCurve(**cols)


def effective_coherence(T1e: float, T2n_star: float) -> float:
    """``T1e T2n* / (T1e + T2n*)``; either time may be infinite."""
    if T1e <= 0 or T2n_star <= 0:
        raise ValueError("coherence times must be positive")
    return 1.0 / (1.0 / T1e + 1.0 / T2n_star)


def real_sensitivity(slope: float, N: float, Tm: float, tau: float, t_i: float) -> float:
    """Ideal sensitivity times ``exp(Tm / tau) sqrt((t_i + Tm) / Tm)``."""
    if tau <= 0 or t_i < 0:
        raise ValueError("need tau > 0 and t_i >= 0")
    eta = ideal_sensitivity(slope, N, Tm).eta
    return eta * math.exp(Tm / tau) * math.sqrt((t_i + Tm) / Tm)


@dataclass(frozen=True)
class NoiseBudget:
    T1e: float
    T2n_star: float
    t_i: float
    N: float
    slope: float
    tau: float
    Tm_opt: float
    eta_real_opt: float
    # Nearest whole number of modulation periods, when a period was supplied.
    Tm_periods: int | None = None
    eta_real_periods: float | None = None


def optimize_Tm(
    slope: float,
    N: float,
    tau: float,
    t_i: float,
    bounds: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Minimise ``real_sensitivity`` over ``Tm`` in ``[tau/1e3, 1e3 tau]`` (default).

    Bounded Brent search on ``log Tm``.  Raises ``ValueError`` if the minimum
    sits on a bound.
    """
    if tau <= 0 or t_i < 0:
        raise ValueError("need tau > 0 and t_i >= 0")
    lo, hi = bounds if bounds is not None else (tau / OPT_SPAN, tau * OPT_SPAN)
    log_lo, log_hi = math.log(lo), math.log(hi)
    slope = abs(slope)
    if slope == 0:
        raise ValueError("zero slope: sensitivity is infinite for every Tm")

    def objective(log_tm):
        tm = math.exp(log_tm)
        # log of real_sensitivity, dropping Tm-independent terms
        return tm / tau + 0.5 * math.log(t_i + tm) - math.log(tm)

    res = minimize_scalar(
        objective, bounds=(log_lo, log_hi), method="bounded", options={"xatol": OPT_RTOL / 10}
    )
    edge = 10 * OPT_RTOL
    if res.x - log_lo < edge or log_hi - res.x < edge:
        raise ValueError(f"no interior minimum in [{lo:.3e}, {hi:.3e}] s")
    tm = math.exp(res.x)
    return tm, real_sensitivity(slope, N, tm, tau, t_i)


def noise_budget(
    slope: float,
    N: float,
    T1e: float,
    T2n_star: float,
    t_i: float,
    period: float | None = None,
) -> NoiseBudget:
    tau = effective_coherence(T1e, T2n_star)
    tm, eta = optimize_Tm(slope, N, tau, t_i)
    periods = eta_p = None
    if period is not None:
        periods = max(1, round(tm / period))
        eta_p = real_sensitivity(slope, N, periods * period, tau, t_i)
    return NoiseBudget(T1e, T2n_star, t_i, N, abs(slope), tau, tm, eta, periods, eta_p)


REPORTED_SLOPE = 40.0
REPORTED_ETA = 0.6e-6
REPORTED_N = 1e6


def reported_chains(gamma: float = GAMMA_14N) -> dict[str, SensitivityPoint]:
    """The two arithmetic chains behind the quoted 14N figures.

    ``"from_slope"`` starts from a phase slope of 40 s with ``N = 1e6`` and
    ``Tm = 1 s``; ``"from_eta"`` starts from ``eta = 0.6 urad/s/sqrt(Hz)``.
    The two are not mutually consistent, so both are reported.
    """
    from_slope = ideal_sensitivity(REPORTED_SLOPE, REPORTED_N, 1.0, gamma)
    eta = REPORTED_ETA
    from_eta = SensitivityPoint(math.nan, math.nan, eta, eta * math.sqrt(REPORTED_N), eta / gamma)
    return {"from_slope": from_slope, "from_eta": from_eta}
