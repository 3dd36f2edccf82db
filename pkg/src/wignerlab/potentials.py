"""Analytic potential families and their derivatives.

All families are polynomials in x (plus an additive dipole drive), so any
odd derivative needed by a bracket kernel is available in closed form.
The nonlinearity length chi = sqrt|V' / V'''| quantifies where the force is
dominated by its linear part; quadratic potentials have chi = +inf and all
quantum corrections to the Liouville flow vanish for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Free:
    """V = 0: pure kinetic streaming."""

    def value(self, x, t=0.0, mass=1.0):
        return np.zeros_like(np.asarray(x, dtype=float))

    def derivative(self, x, order, t=0.0, mass=1.0):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Harmonic:
    """V = (1/2) m omega^2 x^2."""

    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigError("omega", "omega must be positive")

    def value(self, x, t=0.0, mass=1.0):
        return 0.5 * mass * self.omega**2 * np.asarray(x) ** 2

    def derivative(self, x, order, t=0.0, mass=1.0):
        x = np.asarray(x, dtype=float)
        if order == 1:
            return mass * self.omega**2 * x
        if order == 2:
            return np.full_like(x, mass * self.omega**2)
        return np.zeros_like(x)


@dataclass(frozen=True)
class Inverted:
    """V = -(1/2) m lambda0^2 x^2; exponential instability at rate lambda0."""

    lambda0: float

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ConfigError("lambda0", "lambda0 must be positive")

    def value(self, x, t=0.0, mass=1.0):
        return -0.5 * mass * self.lambda0**2 * np.asarray(x) ** 2

    def derivative(self, x, order, t=0.0, mass=1.0):
        x = np.asarray(x, dtype=float)
        if order == 1:
            return -mass * self.lambda0**2 * x
        if order == 2:
            return np.full_like(x, -mass * self.lambda0**2)
        return np.zeros_like(x)


@dataclass(frozen=True)
class DoubleWell:
    """V = -(a/2) x^2 + (b/4) x^4, wells at x = +-sqrt(a/b)."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("a", "a must be positive")
        if self.b <= 0:
            raise ConfigError("b", "b must be positive")

    def value(self, x, t=0.0, mass=1.0):
        x = np.asarray(x)
        return -0.5 * self.a * x**2 + 0.25 * self.b * x**4

    def derivative(self, x, order, t=0.0, mass=1.0):
        x = np.asarray(x, dtype=float)
        if order == 1:
            return -self.a * x + self.b * x**3
        if order == 2:
            return -self.a + 3 * self.b * x**2
        if order == 3:
            return 6 * self.b * x
        if order == 4:
            return np.full_like(x, 6.0 * self.b)
        return np.zeros_like(x)


@dataclass(frozen=True)
class DrivenDoubleWell:
    """Double well with an additive dipole drive x * F cos(omega_d t)."""

    a: float
    b: float
    amplitude: float
    drive_omega: float

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("a", "a must be positive")
        if self.b <= 0:
            raise ConfigError("b", "b must be positive")
        if self.amplitude < 0:
            raise ConfigError("amplitude", "drive amplitude must be nonnegative")
        if self.drive_omega <= 0:
            raise ConfigError("drive_omega", "drive frequency must be positive")

    def _static(self) -> DoubleWell:
        return DoubleWell(self.a, self.b)

    def drive_force(self, t) -> float:
        return self.amplitude * math.cos(self.drive_omega * t)

    def value(self, x, t=0.0, mass=1.0):
        x = np.asarray(x)
        return self._static().value(x) + x * self.drive_force(t)

    def derivative(self, x, order, t=0.0, mass=1.0):
        d = self._static().derivative(x, order)
        if order == 1:
            d = d + self.drive_force(t)
        return d


PotentialModel = Free | Harmonic | Inverted | DoubleWell | DrivenDoubleWell


def evaluate(model: PotentialModel, x, t: float = 0.0, mass: float = 1.0):
    """Return (V, V', V''') at x and time t."""
    return (
        model.value(x, t, mass),
        model.derivative(x, 1, t, mass),
        model.derivative(x, 3, t, mass),
    )


def is_quadratic(model: PotentialModel) -> bool:
    return isinstance(model, (Free, Harmonic, Inverted))


def nonlinearity_scale(
    model: PotentialModel,
    x_range: tuple[float, float],
    t: float = 0.0,
    mass: float = 1.0,
    samples: int = 4097,
) -> float:
    """Median of sqrt|V'/V'''| over the range, restricted to V''' != 0.

    Quadratic potentials return +inf: the bracket corrections vanish
    identically, so no finite nonlinearity length exists.
    """
    if is_quadratic(model):
        return math.inf
    lo, hi = x_range
    if not hi > lo:
        raise ConfigError("x_range", "range must have positive length")
    x = np.linspace(lo, hi, samples)
    v1 = np.asarray(model.derivative(x, 1, t, mass), dtype=float)
    v3 = np.asarray(model.derivative(x, 3, t, mass), dtype=float)
    mask = np.abs(v3) > 0
    if not mask.any():
        return math.inf
    chi = np.sqrt(np.abs(v1[mask] / v3[mask]))
    return float(np.median(chi))


def reference_rates(model: PotentialModel, mass: float = 1.0) -> tuple[float | None, float | None]:
    """(omega_ref, lambda_ref) for time-step stability checks.

    omega_ref is the fastest oscillation rate of the scenario, lambda_ref
    the instability rate when the model has one.
    """
    if isinstance(model, Free):
        return None, None
    if isinstance(model, Harmonic):
        return model.omega, None
    if isinstance(model, Inverted):
        return None, model.lambda0
    if isinstance(model, DoubleWell):
        return math.sqrt(2 * model.a / mass), None
    if isinstance(model, DrivenDoubleWell):
        return max(math.sqrt(2 * model.a / mass), model.drive_omega), None
    raise ConfigError("potential", f"unknown model {type(model).__name__}")
