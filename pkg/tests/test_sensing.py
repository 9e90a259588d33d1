import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from berrygyro import sensing
from berrygyro.adiabatic_geo import BerryCurve
from berrygyro.model import GAMMA_14N

MS = 1e-3


def closed_form_tm(tau, t_i):
    # stationary point of Tm / tau + log(t_i + Tm) / 2 - log(Tm)
    return ((tau - 2 * t_i) + math.sqrt((2 * t_i - tau) ** 2 + 16 * tau * t_i)) / 4


def test_slope_forty_chain():
    p = sensing.ideal_sensitivity(40.0, 1e6, 1.0)
    assert p.eta == pytest.approx(2.5e-5, rel=1e-15)
    assert p.eta_single == pytest.approx(2.5e-5 * 1e3, rel=1e-12)


def test_reported_eta_chain():
    chains = sensing.reported_chains()
    e = chains["from_eta"]
    assert e.eta_single == 6e-4
    assert e.eta_B == pytest.approx(31e-15, rel=0.02)
    assert chains["from_slope"].eta == pytest.approx(2.5e-5)


def test_zero_slope_sentinel():
    p = sensing.ideal_sensitivity(0.0, 1e6, 1.0)
    assert math.isinf(p.eta) and math.isinf(p.eta_B)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        sensing.ideal_sensitivity(1.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        sensing.ideal_sensitivity(1.0, 10, 0.0)
    with pytest.raises(ValueError):
        sensing.effective_coherence(0.0, 1.0)


@pytest.mark.parametrize("factor", [10.0, 100.0, 1000.0])
def test_scaling_laws(factor):
    base = sensing.ideal_sensitivity(0.37, 1e4, 0.2).eta
    assert sensing.ideal_sensitivity(0.37, 1e4 * factor, 0.2).eta == pytest.approx(base / math.sqrt(factor), rel=1e-12)
    assert sensing.ideal_sensitivity(0.37, 1e4, 0.2 * factor).eta == pytest.approx(base / math.sqrt(factor), rel=1e-12)
    assert sensing.ideal_sensitivity(0.37 * factor, 1e4, 0.2).eta == pytest.approx(base / factor, rel=1e-12)


@given(
    slope=st.floats(1e-6, 1e3),
    n=st.floats(1, 1e12),
    tm=st.floats(1e-6, 1e3),
)
def test_identity_chain(slope, n, tm):
    p = sensing.ideal_sensitivity(slope, n, tm)
    assert p.eta_single / p.eta == pytest.approx(math.sqrt(n), rel=1e-12)
    assert p.eta / p.eta_B == pytest.approx(GAMMA_14N, rel=1e-12)


def _toy_curve():
    om = np.linspace(-10, 10, 21)
    slope = np.exp(-((om - 3) ** 2))
    return BerryCurve(om, np.cumsum(slope), np.cumsum(slope) - np.cumsum(slope)[10], slope)


def test_sensitivity_curve():
    curve = _toy_curve()
    a = sensing.sensitivity_curve(curve, 1e6, 1.0)
    b = sensing.sensitivity_curve(curve, 2e6, 1.0)
    assert np.allclose(b.eta, a.eta / math.sqrt(2), rtol=1e-12)
    assert a.optimum.omega == curve.argmax_slope
    assert a.optimum_index == int(np.argmax(curve.slope))
    assert len(a.points()) == 21


def test_effective_coherence():
    assert sensing.effective_coherence(10 * MS, 10 * MS) == pytest.approx(5 * MS)
    assert sensing.effective_coherence(3.0, 6.0) == pytest.approx(2.0)
    assert sensing.effective_coherence(math.inf, 7.0) == 7.0


@given(a=st.floats(1e-6, 1e3), b=st.floats(1e-6, 1e3))
def test_coherence_bound(a, b):
    assert sensing.effective_coherence(a, b) <= min(a, b) * (1 + 1e-15)


def test_real_sensitivity_limits():
    ideal = sensing.ideal_sensitivity(2.0, 1e6, 0.01).eta
    assert sensing.real_sensitivity(2.0, 1e6, 0.01, math.inf, 0.0) == ideal
    assert sensing.real_sensitivity(2.0, 1e6, 0.01, math.inf, 0.01) == pytest.approx(ideal * math.sqrt(2))
    assert sensing.real_sensitivity(2.0, 1e6, 0.01, 0.01, 0.0) == pytest.approx(ideal * math.e)


@pytest.mark.parametrize("tau_ms", [0.1, 1.0, 10.0, 100.0])
def test_optimum_half_tau(tau_ms):
    tau = tau_ms * MS
    tm, _ = sensing.optimize_Tm(1.0, 1e6, tau, 0.0)
    assert tm == pytest.approx(tau / 2, rel=1e-3)


def test_optimum_matches_closed_form(rng):
    for _ in range(50):
        tau = 10 ** rng.uniform(-4, -1)
        t_i = tau * 10 ** rng.uniform(-3, 1)
        tm, _ = sensing.optimize_Tm(1.0, 1e6, tau, t_i)
        assert tm == pytest.approx(closed_form_tm(tau, t_i), rel=1e-5)


def test_optimizer_vs_brute_force(rng):
    for _ in range(100):
        tau = 10 ** rng.uniform(-4, -1)
        t_i = 10 ** rng.uniform(-5, -2) if rng.random() > 0.1 else 0.0
        tm, eta = sensing.optimize_Tm(3.0, 1e6, tau, t_i)
        grid = np.geomspace(tau / 1e3, tau * 1e3, 100_000)
        log_vals = grid / tau + 0.5 * np.log((t_i + grid) / grid) - np.log(3.0 * np.sqrt(1e6 * grid))
        k = int(np.argmin(log_vals))
        assert tm == pytest.approx(grid[k], rel=5e-3)
        assert eta <= np.exp(log_vals[k]) * (1 + 1e-9)


def test_monotone_in_overhead_and_coherence():
    tau = 1 * MS
    tms = [sensing.optimize_Tm(1.0, 1e6, tau, ti)[0] for ti in np.linspace(0, 5 * MS, 30)]
    assert np.all(np.diff(tms) >= 0)
    for ti in (0.0, 0.5 * MS, 1 * MS):
        etas = [sensing.optimize_Tm(1.0, 1e6, tau, ti)[1] for tau in np.geomspace(0.1 * MS, 100 * MS, 30)]
        assert np.all(np.diff(etas) <= 0)


def test_linear_in_tau():
    taus = np.linspace(0.1 * MS, 100 * MS, 50)
    tms = [sensing.optimize_Tm(1.0, 1e6, tau, 0.0)[0] for tau in taus]
    slope, intercept = np.polyfit(taus, tms, 1)
    assert slope == pytest.approx(0.5, abs=1e-3)
    assert abs(intercept) < 1e-6


def test_edge_minimum_rejected():
    with pytest.raises(ValueError):
        sensing.optimize_Tm(1.0, 1e6, 1e-3, 0.0, bounds=(1e-3, 1.0))
    with pytest.raises(ValueError):
        sensing.optimize_Tm(0.0, 1e6, 1e-3, 0.0)


def test_noise_budget():
    b = sensing.noise_budget(40.0, 1e6, 10 * MS, 10 * MS, 0.0, period=5e-6)
    assert b.tau == pytest.approx(5 * MS)
    assert b.Tm_opt == pytest.approx(2.5 * MS, rel=1e-3)
    assert b.Tm_periods == 500
    assert b.eta_real_periods >= b.eta_real_opt * (1 - 1e-9)
    assert b.Tm_opt > 0 and b.tau <= 10 * MS
