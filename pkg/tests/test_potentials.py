import math

import numpy as np
import pytest

import wignerlab as wl
from wignerlab.errors import ConfigError
from wignerlab.potentials import evaluate, nonlinearity_scale, reference_rates


def test_harmonic_values():
    v, v1, v3 = evaluate(wl.Harmonic(omega=1.0), 2.0, mass=1.0)
    assert v == pytest.approx(2.0)
    assert v1 == pytest.approx(2.0)
    assert v3 == pytest.approx(0.0)


def test_inverted_values():
    v, v1, v3 = evaluate(wl.Inverted(lambda0=1.0), 1.0, mass=1.0)
    assert v == pytest.approx(-0.5)
    assert v1 == pytest.approx(-1.0)
    assert v3 == pytest.approx(0.0)


def test_double_well_values():
    v, v1, v3 = evaluate(wl.DoubleWell(a=1.0, b=1.0), 1.0)
    assert v == pytest.approx(-0.25)
    assert v1 == pytest.approx(0.0)
    assert v3 == pytest.approx(6.0)


def test_driven_reduces_to_static_at_zero_amplitude():
    driven = wl.DrivenDoubleWell(a=1.0, b=0.5, amplitude=0.0, drive_omega=1.0)
    static = wl.DoubleWell(a=1.0, b=0.5)
    x = np.linspace(-2, 2, 101)
    for t in (0.0, 0.37, 2.2):
        assert np.allclose(driven.value(x, t), static.value(x))
        assert np.allclose(driven.derivative(x, 1, t), static.derivative(x, 1))


def test_drive_is_dipole():
    driven = wl.DrivenDoubleWell(a=1.0, b=1.0, amplitude=0.4, drive_omega=2.0)
    static = wl.DoubleWell(a=1.0, b=1.0)
    x = np.linspace(-2, 2, 11)
    t = 0.9
    force = 0.4 * math.cos(2.0 * t)
    assert np.allclose(driven.value(x, t) - static.value(x), x * force)
    assert np.allclose(driven.derivative(x, 3, t), static.derivative(x, 3))


@pytest.mark.parametrize(
    "model",
    [
        wl.Harmonic(omega=1.3),
        wl.Inverted(lambda0=0.8),
        wl.DoubleWell(a=1.0, b=0.7),
        wl.DrivenDoubleWell(a=1.0, b=0.7, amplitude=0.3, drive_omega=1.1),
    ],
)
def test_derivatives_match_finite_differences(model):
    xs = np.array([-1.7, -0.9, 0.4, 1.3, 2.1])
    t = 0.31
    h = 1e-4
    v1 = model.derivative(xs, 1, t)
    fd1 = (model.value(xs + h, t) - model.value(xs - h, t)) / (2 * h)
    assert np.allclose(v1, fd1, rtol=1e-6, atol=1e-6)
    # third differences at h = 1e-4 sit below the float64 noise floor, so
    # V''' is checked at a step where cancellation noise is negligible
    # (exact for this polynomial family: the fifth derivative vanishes)
    h = 1e-2
    v3 = model.derivative(xs, 3, t)
    fd3 = (
        model.value(xs + 2 * h, t)
        - 2 * model.value(xs + h, t)
        + 2 * model.value(xs - h, t)
        - model.value(xs - 2 * h, t)
    ) / (2 * h**3)
    assert np.allclose(v3, fd3, rtol=1e-6, atol=1e-6)


def test_quadratic_chi_is_infinite():
    assert nonlinearity_scale(wl.Harmonic(omega=1.0), (0.5, 2.0)) == math.inf
    assert nonlinearity_scale(wl.Inverted(lambda0=1.0), (-3.0, 3.0)) == math.inf
    assert nonlinearity_scale(wl.Free(), (-1.0, 1.0)) == math.inf


def test_double_well_chi_median():
    # independent oracle: chi(x) = sqrt(|x^2 - 1| / 6) on [0.5, 2]; the
    # median of the monotone transform equals the transform of the median
    # of |x^2 - 1|, solvable in closed form: sqrt(1+y) - sqrt(1-y) = 0.75.
    y = math.sqrt(1.0 - ((2.0 - 0.75**2) / 2.0) ** 2)
    expected = math.sqrt(y / 6.0)
    got = nonlinearity_scale(wl.DoubleWell(a=1.0, b=1.0), (0.5, 2.0))
    assert got == pytest.approx(expected, abs=2e-4)
    # dense-sample cross-check with an independent sampling density
    xs = np.linspace(0.5, 2.0, 30001)
    brute = np.median(np.sqrt(np.abs((-xs + xs**3) / (6 * xs))))
    assert got == pytest.approx(brute, abs=2e-4)


def test_chi_single_point_value():
    got = nonlinearity_scale(wl.DoubleWell(a=1.0, b=1.0), (2.0 - 1e-9, 2.0 + 1e-9))
    assert got == pytest.approx(math.sqrt(0.5), rel=1e-6)


def test_reference_rates():
    omega, lam = reference_rates(wl.Harmonic(omega=2.0))
    assert omega == 2.0 and lam is None
    omega, lam = reference_rates(wl.Inverted(lambda0=0.5))
    assert omega is None and lam == 0.5
    omega, lam = reference_rates(wl.DoubleWell(a=2.0, b=1.0), mass=1.0)
    assert omega == pytest.approx(2.0)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: wl.Harmonic(omega=0.0),
        lambda: wl.Inverted(lambda0=-1.0),
        lambda: wl.DoubleWell(a=0.0, b=1.0),
        lambda: wl.DoubleWell(a=1.0, b=-0.1),
        lambda: wl.DrivenDoubleWell(a=1.0, b=1.0, amplitude=-0.1, drive_omega=1.0),
        lambda: wl.DrivenDoubleWell(a=1.0, b=1.0, amplitude=0.1, drive_omega=0.0),
    ],
)
def test_invalid_parameters_rejected(factory):
    with pytest.raises(ConfigError):
        factory()
