import math

import numpy as np
import pytest

import wignerlab as wl
from wignerlab.errors import AlreadyQuantumError, ConfigError, UnsupportedModelError
from wignerlab.estimators import (
    SECONDS_PER_DAY,
    SECONDS_PER_YEAR,
    entropy_rate_profile,
    t_eq,
)


# ---------------------------------------------------------------------------
# closed-form timescales


def test_t_hbar_chaotic_basic():
    assert wl.t_hbar_chaotic(1.0, 1.0, math.e**10, 1.0) == pytest.approx(10.0)
    assert wl.t_hbar_chaotic(2.0, 1.0, math.e**10, 1.0) == pytest.approx(5.0)


def test_t_hbar_chaotic_log_law():
    base = wl.t_hbar_chaotic(0.7, 2.0, 3.0, 0.01)
    doubled = wl.t_hbar_chaotic(0.7, 2.0, 3.0, 0.02)
    assert base - doubled == pytest.approx(math.log(2) / 0.7)


def test_t_hbar_chaotic_already_quantum():
    with pytest.raises(AlreadyQuantumError):
        wl.t_hbar_chaotic(1.0, 1.0, 0.5, 1.0)


def test_t_r_values():
    assert wl.t_r(1.0, math.e, 1.0) == pytest.approx(1.0)
    assert wl.t_r(1.0, 1.0, 1.0) == 0.0
    assert wl.t_r(0.0, 10.0, 1.0) == math.inf


def test_t_hbar_integrable():
    assert wl.t_hbar_integrable(1.0, 100.0, 1.0, 0.5) == pytest.approx(10.0)
    assert wl.t_hbar_integrable(2.0, 1e6, 1.0, 1.0) == pytest.approx(5e5)


def test_integrable_vs_chaotic_contrast():
    # at action ratio 1e60, the integrable time at alpha = 1/2 exceeds the
    # chaotic one by ~1e28
    ratio = 1e60
    chaotic = wl.t_r(1.0, ratio, 1.0)
    integrable = wl.t_hbar_integrable(1.0, ratio, 1.0, 0.5)
    assert integrable / chaotic == pytest.approx(1e30 / math.log(1e60), rel=1e-9)
    assert 1e27 < integrable / chaotic < 1e29


def test_monotone_in_hbar():
    hs = [0.01, 0.1, 1.0]
    chaotic = [wl.t_hbar_chaotic(1.0, 2.0, 3.0, h) for h in hs]
    assert chaotic[0] > chaotic[1] > chaotic[2]
    integrable = [wl.t_hbar_integrable(1.0, 10.0, h, 0.7) for h in hs]
    assert integrable[0] > integrable[1] > integrable[2]


def test_scale_invariance_of_logarithms():
    # multiplying all actions by c shifts only logarithm arguments
    t1 = wl.t_hbar_chaotic(1.0, 2.0, 3.0, 0.5)
    t2 = wl.t_hbar_chaotic(1.0, 2.0, 3.0 * 7.0, 0.5 * 7.0)
    assert t1 == pytest.approx(t2)


def test_decoherence_time_primary():
    r = wl.decoherence_time(1.0, 1.0, 1.0)
    assert r.primary == pytest.approx(1.0)
    quarter = wl.decoherence_time(1.0, 2.0, 1.0)
    assert quarter.primary == pytest.approx(0.25)


def test_decoherence_time_thermal_consistency():
    # with D = 2 m gamma k_B T the thermal form equals the primary exactly
    m, gamma, T = 2.0, 0.3, 1.7
    D = 2 * m * gamma * T
    r = wl.decoherence_time(D, 1.3, 1.0, gamma=gamma, mass=m, temperature=T)
    assert r.thermal_form == pytest.approx(r.primary, rel=1e-12)
    assert r.consistent
    r2 = wl.decoherence_time(2 * D, 1.3, 1.0, gamma=gamma, mass=m, temperature=T)
    assert not r2.consistent


def test_sigma_c_and_coherence_length():
    assert wl.sigma_c(0.02, 1.0) == pytest.approx(0.2)
    assert wl.coherence_length(0.02, 1.0, 1.0) == pytest.approx(5.0)
    assert wl.sigma_c(1e-8, 1.0) < 1e-3  # isolated limit


def test_t_eq_forms():
    r = t_eq(10.0, 1.0, 2.0, lam=2.0)
    assert r.rate_form == pytest.approx(5.0)
    assert r.lyapunov_form == pytest.approx(5.0)
    r2 = t_eq(10.0, 2.0, 1.0)
    assert r2.rate_form == pytest.approx(5.0)
    r3 = t_eq(10.0, 1.0, 1e9)
    assert r3.rate_form < 1e-7


# ---------------------------------------------------------------------------
# covariance oracle


def test_oracle_harmonic_conserves_entropy():
    cov0 = np.diag([1.0, 0.25])
    times = np.linspace(0, 12.0, 121)
    out = wl.gaussian_oracle(
        wl.Harmonic(omega=1.0), None, wl.GaussianState(np.array([1.0, 0.0]), cov0), times, hbar=1.0
    )
    dets = np.linalg.det(out.covariances)
    assert np.allclose(dets, 0.25, rtol=1e-8)
    assert np.allclose(out.entropy, out.entropy[0], atol=1e-8)
    # means rotate with unit frequency
    assert out.means[-1, 0] == pytest.approx(math.cos(12.0), abs=1e-7)


def test_oracle_rejects_nonquadratic():
    with pytest.raises(UnsupportedModelError):
        wl.gaussian_oracle(
            wl.DoubleWell(1.0, 1.0), None,
            wl.GaussianState(np.zeros(2), np.eye(2)), np.linspace(0, 1, 5), hbar=1.0,
        )


def test_oracle_critical_dispersion_limit():
    lam, D = 1.0, 0.01
    env = wl.EnvironmentModel(D=D)
    times = np.linspace(0, 8.0, 81)
    out = wl.gaussian_oracle(
        wl.Inverted(lambda0=lam), env,
        wl.GaussianState(np.zeros(2), np.diag([0.02, 0.02])), times, hbar=0.01,
    )
    w = np.array([1.0, -1.0]) / math.sqrt(2)
    var_w = out.variance_along(w)
    # steady contracting variance D/(2 lam); its doubled width is sigma_c
    assert var_w[-1] == pytest.approx(D / (2 * lam), rel=1e-3)
    assert 4 * var_w[-1] == pytest.approx(wl.sigma_c(D, lam) ** 2, rel=1e-3)


def test_oracle_entropy_rate_profile():
    lam, D = 1.0, 0.01
    sc2 = D / (2 * lam)
    su0, sw0 = 2.5 * math.sqrt(sc2), 1.3 * math.sqrt(sc2)
    rot = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
    cov0 = rot.T @ np.diag([su0**2, sw0**2]) @ rot
    times = np.linspace(0, 5.0, 201)
    out = wl.gaussian_oracle(
        wl.Inverted(lambda0=lam), wl.EnvironmentModel(D=D),
        wl.GaussianState(np.zeros(2), cov0), times, hbar=0.005,
    )
    hdot = out.hdot()
    mask = times >= 1.8
    profile = entropy_rate_profile(times[mask], lam, sw0**2, sc2)
    assert np.abs(hdot[mask] - profile).max() / lam < 0.05
    # late-time rate approaches the instability exponent
    assert hdot[-1] == pytest.approx(lam, rel=0.02)


def test_oracle_entropy_never_decreases_without_friction():
    times = np.linspace(0, 6.0, 61)
    out = wl.gaussian_oracle(
        wl.Harmonic(omega=1.0), wl.EnvironmentModel(D=0.05),
        wl.GaussianState(np.zeros(2), np.diag([1.0, 0.25])), times, hbar=1.0,
    )
    dets = np.linalg.det(out.covariances)
    assert np.all(np.diff(dets) > -1e-12)


def test_gaussian_state_physicality():
    with pytest.raises(ConfigError, match="covariance"):
        wl.GaussianState(np.zeros(2), np.diag([0.1, 0.1])).validated(hbar=1.0)


# ---------------------------------------------------------------------------
# tangent-map Lyapunov


def test_lyapunov_harmonic_near_zero():
    est = wl.classical_lyapunov(wl.Harmonic(omega=1.0), 1.0, 0.0, duration=200.0, dt=0.005)
    assert abs(est.value) < 1e-3


def test_lyapunov_inverted_exact():
    est = wl.classical_lyapunov(
        wl.Inverted(lambda0=0.8), 1e-6, 0.0, duration=30.0, dt=0.002, segment_time=1.0
    )
    assert est.value == pytest.approx(0.8, rel=0.01)
    assert not est.low_confidence


def test_lyapunov_step_halving_stable():
    model = wl.DrivenDoubleWell(a=1.0, b=1.0, amplitude=0.3, drive_omega=1.0)
    a = wl.classical_lyapunov(model, 0.5, 0.1, duration=300.0, dt=0.004)
    b = wl.classical_lyapunov(model, 0.5, 0.1, duration=300.0, dt=0.002)
    assert abs(a.value - b.value) <= 2 * (a.stderr + b.stderr)


# ---------------------------------------------------------------------------
# macroscopic scenario


def _hyperion():
    return wl.MacroScenario(
        name="hyperion",
        mass=5.62e18,
        velocity=5.07e3,
        period=21.28 * SECONDS_PER_DAY,
        lyapunov_rate=1.0 / (42.0 * SECONDS_PER_DAY),
    )


def test_hyperion_report_order_twenty_years():
    report = wl.hyperion_report(_hyperion())
    assert 20.0 / 3 <= report.t_r_years <= 20.0 * 3
    assert 100 <= report.log_action_ratio <= 200
    text = report.to_text()
    assert "ln(A0/hbar)" in text and "yr" in text


def test_toy_scenario_arithmetic():
    # A0/hbar = e^100 with 1/lambda = 42 days: t_r = 4200 days = 11.5 yr
    scenario = wl.MacroScenario(
        name="toy",
        mass=1.0,
        velocity=math.sqrt(2 * math.e**100 * wl.estimators.HBAR_SI / 1.0),
        period=1.0,
        lyapunov_rate=1.0 / (42.0 * SECONDS_PER_DAY),
    )
    report = wl.hyperion_report(scenario)
    assert report.log_action_ratio == pytest.approx(100.0, abs=1e-6)
    assert report.t_r_years == pytest.approx(100 * 42 * SECONDS_PER_DAY / SECONDS_PER_YEAR, rel=1e-9)


def test_zero_lyapunov_gives_infinite_sentinel():
    scenario = wl.MacroScenario(
        name="frozen", mass=1e18, velocity=1e3, period=1e6, lyapunov_rate=0.0
    )
    report = wl.hyperion_report(scenario)
    assert report.t_r_seconds == math.inf


def test_scenario_missing_fields_rejected():
    with pytest.raises(ConfigError, match="mass"):
        wl.MacroScenario(name="bad", mass=0.0, velocity=1.0, period=1.0, lyapunov_rate=1.0)
