"""Discretized phase-space rectangle with spectral metadata.

The grid is periodic in both x and p. Axes are uniform; the conjugate
frequency axes (k for x, s for p) follow the FFT layout, in angular units,
so that exp(i*k*x) and exp(i*s*p) are the elementary modes.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field

import numpy as _np

from .errors import ConfigError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(eq=False)
class PhaseSpaceGrid:
    nx: int
    np: int
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    hbar: float
    mass: float

    x: _np.ndarray = field(init=False, repr=False)
    p: _np.ndarray = field(init=False, repr=False)
    k: _np.ndarray = field(init=False, repr=False)
    s: _np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("nx", "np"):
            try:
                n = operator.index(getattr(self, name))
            except TypeError:
                raise ConfigError(name, f"{name} must be an integer") from None
            if not _is_power_of_two(n) or n < 16:
                raise ConfigError(name, f"{name} must be a power of two and at least 16")
            setattr(self, name, int(n))
        if not self.x_max > self.x_min:
            raise ConfigError("x_max", "x_max must exceed x_min")
        if not self.p_max > self.p_min:
            raise ConfigError("p_max", "p_max must exceed p_min")
        if not self.hbar > 0:
            raise ConfigError("hbar", "hbar must be positive")
        if not self.mass > 0:
            raise ConfigError("mass", "mass must be positive")

        self.x = self.x_min + self.dx * _np.arange(self.nx)
        self.p = self.p_min + self.dp * _np.arange(self.np)
        self.k = 2.0 * _np.pi * _np.fft.fftfreq(self.nx, d=self.dx)
        self.s = 2.0 * _np.pi * _np.fft.fftfreq(self.np, d=self.dp)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.np

    @property
    def cell_area(self) -> float:
        return self.dx * self.dp

    def compatible_with(self, other: "PhaseSpaceGrid") -> bool:
        return (
            self.nx == other.nx
            and self.np == other.np
            and self.x_min == other.x_min
            and self.x_max == other.x_max
            and self.p_min == other.p_min
            and self.p_max == other.p_max
            and self.hbar == other.hbar
            and self.mass == other.mass
        )


def make_grid(
    nx: int,
    np: int,
    x_min: float,
    x_max: float,
    p_min: float,
    p_max: float,
    hbar: float = 1.0,
    mass: float = 1.0,
) -> PhaseSpaceGrid:
    """Validate and build a grid with precomputed axes and frequencies."""
    return PhaseSpaceGrid(
        nx=nx, np=np,
        x_min=float(x_min), x_max=float(x_max),
        p_min=float(p_min), p_max=float(p_max),
        hbar=float(hbar), mass=float(mass),
    )
