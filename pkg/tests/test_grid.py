import numpy as np
import pytest

import wignerlab as wl
from wignerlab.errors import ConfigError


def test_basic_grid_spacing():
    g = wl.make_grid(256, 256, -10, 10, -10, 10, hbar=1.0, mass=1.0)
    assert g.dx == pytest.approx(0.078125)
    assert g.dp == pytest.approx(0.078125)
    assert g.x[0] == -10 and g.x[-1] == pytest.approx(10 - g.dx)
    assert g.cell_area > 0


def test_spectral_axes_match_fft_layout():
    g = wl.make_grid(64, 128, -5, 5, -8, 8)
    assert np.allclose(g.k, 2 * np.pi * np.fft.fftfreq(64, g.dx))
    assert np.allclose(g.s, 2 * np.pi * np.fft.fftfreq(128, g.dp))


@pytest.mark.parametrize("bad_n", [100, 15, 17, 0, -64])
def test_non_power_of_two_rejected(bad_n):
    with pytest.raises(ConfigError, match="nx must be a power of two"):
        wl.make_grid(bad_n, 64, -1, 1, -1, 1)


def test_np_validated_independently():
    with pytest.raises(ConfigError, match="np"):
        wl.make_grid(64, 48, -1, 1, -1, 1)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(hbar=0.0), "hbar"),
        (dict(hbar=-1.0), "hbar"),
        (dict(mass=0.0), "mass"),
        (dict(x_max=-2.0), "x_max"),
        (dict(p_max=-2.0), "p_max"),
    ],
)
def test_invalid_scalars_name_the_field(kwargs, field):
    base = dict(nx=64, np=64, x_min=-1, x_max=1, p_min=-1, p_max=1, hbar=1.0, mass=1.0)
    base.update(kwargs)
    with pytest.raises(ConfigError) as err:
        wl.make_grid(**base)
    assert err.value.field == field


def test_hbar_zero_message():
    with pytest.raises(ConfigError, match="hbar must be positive"):
        wl.make_grid(64, 64, -1, 1, -1, 1, hbar=0.0)
