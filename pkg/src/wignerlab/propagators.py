"""Split-operator steppers for Wigner dynamics.

Every sub-flow is applied exactly in the representation where it is
diagonal:

* kinetic shear  x -> x + (p/m) dt      phase in (k, p) space
* potential kick                        multiplier in (x, s) space
* momentum diffusion exp(-D s^2 dt)     multiplier in (x, s) space
* friction  W -> e^{2 g dt} W(x, p e^{2 g dt})   band-limited resample in p

The full-quantum potential multiplier uses the nonlocal rate
    [V(x + hbar*s/2) - V(x - hbar*s/2)] / hbar,
whose Taylor series in s starts with the classical term s*V'(x) followed by
odd-order corrections weighted by hbar^(2n) / (4^n (2n+1)!). The classical
(Liouville) stepper keeps only the first term; the truncated variant keeps
the series through a requested order and exists for diagnosing the series.

A composite step is a Strang splitting: half kinetic, full potential, full
diffusion, full friction, half kinetic. Adjacent kinetic half-steps between
unobserved steps are fused into one full step; kinetic flows compose
exactly, so this changes nothing but rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import spectral
from .errors import ConfigError, NumericsError, ResolutionError
from .fields import WignerField, field_norm, moments as compute_moments
from .grid import PhaseSpaceGrid
from .potentials import DrivenDoubleWell, PotentialModel, reference_rates

NORM_DRIFT_TOL = 1e-6
STABILITY_FACTOR = 0.1


@dataclass(frozen=True)
class EnvironmentModel:
    """Momentum diffusion D, relaxation rate gamma, optional temperature."""

    D: float = 0.0
    gamma: float = 0.0
    temperature: float | None = None

    def __post_init__(self):
        if self.D < 0:
            raise ConfigError("D", "diffusion coefficient must be nonnegative")
        if self.gamma < 0:
            raise ConfigError("gamma", "relaxation rate must be nonnegative")

    def check_consistency(self, mass: float, k_b: float = 1.0) -> None:
        """With a temperature supplied, D = 2 m gamma k_B T must hold."""
        if self.temperature is None:
            return
        expected = 2.0 * mass * self.gamma * k_b * self.temperature
        if abs(self.D - expected) > 1e-9 * max(1.0, abs(self.D), abs(expected)):
            raise ConfigError(
                "D",
                f"D = {self.D!r} inconsistent with 2*m*gamma*k_B*T = {expected!r}",
            )


BRACKETS = ("poisson", "moyal", "moyal_truncated")


@dataclass(frozen=True)
class EvolutionSpec:
    bracket: str = "moyal"
    n_max: int | None = None  # truncation order for moyal_truncated
    environment: EnvironmentModel | None = None
    dt: float = 0.01
    n_steps: int = 1
    record_every: int = 1

    def __post_init__(self):
        if self.bracket not in BRACKETS:
            raise ConfigError("bracket", f"bracket must be one of {BRACKETS}")
        if self.bracket == "moyal_truncated":
            if self.n_max is None or self.n_max < 1:
                raise ConfigError("n_max", "moyal_truncated requires n_max >= 1")
        if not self.dt > 0:
            raise ConfigError("dt", "dt must be positive")
        if self.n_steps < 1:
            raise ConfigError("n_steps", "n_steps must be at least 1")
        if self.record_every < 1:
            raise ConfigError("record_every", "record_every must be at least 1")

    def check_stability(self, model: PotentialModel, mass: float) -> None:
        """Enforce dt <= 0.1 * min(1/lambda_ref, 2 pi / omega_ref)."""
        omega_ref, lambda_ref = reference_rates(model, mass)
        bounds = []
        if lambda_ref:
            bounds.append(1.0 / lambda_ref)
        if omega_ref:
            bounds.append(2.0 * math.pi / omega_ref)
        if bounds and self.dt > STABILITY_FACTOR * min(bounds):
            raise ConfigError(
                "dt",
                f"dt = {self.dt} exceeds the stability bound "
                f"{STABILITY_FACTOR * min(bounds):.6g} for this scenario",
            )


# ---------------------------------------------------------------------------
# kernels


def _symmetrize_nyquist(multiplier: np.ndarray, axis: int) -> np.ndarray:
    """Replace the unpaired Nyquist slice by its real part.

    A real field carries a single self-conjugate Nyquist bin per axis;
    rotating it by a complex phase would leak amplitude into the imaginary
    part. Using the real part of the multiplier there keeps every step an
    exact real-to-real map, at the price of an error confined to the
    Nyquist mode, which resolved states populate only at their spectral
    tail level.
    """
    n = multiplier.shape[axis]
    index = (slice(None),) * axis + (n // 2,)
    multiplier[index] = multiplier[index].real
    return multiplier


def _kinetic_phase(grid: PhaseSpaceGrid, dt: float) -> np.ndarray:
    # shear x -> x + (p/m) dt: multiply the k-spectrum by exp(-i k p dt / m)
    phase = np.exp(-1j * np.outer(grid.k, grid.p) * (dt / grid.mass))
    return _symmetrize_nyquist(phase, axis=0)


def _bracket_rate(
    grid: PhaseSpaceGrid,
    model: PotentialModel,
    bracket: str,
    t: float,
    n_max: int | None,
) -> np.ndarray:
    """Generator of the potential flow in (x, s); shape (nx, np)."""
    x = grid.x[:, None]
    s = grid.s[None, :]
    hbar, m = grid.hbar, grid.mass
    if bracket == "moyal":
        shift = 0.5 * hbar * s
        return (model.value(x + shift, t, m) - model.value(x - shift, t, m)) / hbar
    if bracket == "poisson":
        return model.derivative(x, 1, t, m) * s
    if bracket == "moyal_truncated":
        rate = model.derivative(x, 1, t, m) * s
        for n in range(1, n_max + 1):
            order = 2 * n + 1
            coeff = hbar ** (2 * n) / (4.0**n * math.factorial(order))
            rate = rate + coeff * model.derivative(x, order, t, m) * s**order
        return rate
    raise ConfigError("bracket", f"unknown bracket {bracket!r}")


def potential_multiplier(
    grid: PhaseSpaceGrid,
    model: PotentialModel,
    bracket: str,
    t: float,
    dt: float,
    n_max: int | None = None,
) -> np.ndarray:
    mult = np.exp(1j * dt * _bracket_rate(grid, model, bracket, t, n_max))
    return _symmetrize_nyquist(mult, axis=1)


def _apply_p_spectrum(values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    out = spectral.fft(values.astype(np.complex128), axis=1)
    out *= multiplier
    return spectral.ifft(out, axis=1).real


def _apply_x_spectrum(values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    out = spectral.fft(values.astype(np.complex128), axis=0)
    out *= multiplier
    return spectral.ifft(out, axis=0).real


# ---------------------------------------------------------------------------
# public single steps


def step_kinetic(field: WignerField, dt: float) -> WignerField:
    """Exact free-streaming shear over dt."""
    if dt == 0.0:
        return field.copy()
    values = _apply_x_spectrum(field.values, _kinetic_phase(field.grid, dt))
    return WignerField(field.grid, values)


def step_potential(
    field: WignerField,
    model: PotentialModel,
    bracket: str,
    t: float,
    dt: float,
    n_max: int | None = None,
) -> WignerField:
    """Exact potential kick over dt with the requested bracket."""
    if dt == 0.0:
        return field.copy()
    mult = potential_multiplier(field.grid, model, bracket, t, dt, n_max)
    return WignerField(field.grid, _apply_p_spectrum(field.values, mult))


def step_decoherence(field: WignerField, D: float, dt: float) -> WignerField:
    """Exact momentum-diffusion flow: damp the s-spectrum by exp(-D s^2 dt)."""
    if D < 0:
        raise ConfigError("D", "diffusion coefficient must be nonnegative")
    if D == 0.0 or dt == 0.0:
        return field.copy()
    damp = np.exp(-D * field.grid.s**2 * dt)[None, :]
    return WignerField(field.grid, _apply_p_spectrum(field.values, damp))


def _friction_matrix(grid: PhaseSpaceGrid, gamma: float, dt: float) -> np.ndarray:
    c = math.exp(2.0 * gamma * dt)
    q = grid.p * c  # pullback sample points
    return (c / grid.np) * np.exp(1j * np.outer(grid.s, q - grid.p_min))


def step_friction(field: WignerField, gamma: float, dt: float) -> WignerField:
    """Exact relaxation flow W -> e^{2 g dt} W(x, p e^{2 g dt}).

    The contraction samples the trigonometric interpolant at stretched
    momenta; mass too close to the p boundary would wrap around.
    """
    if gamma < 0:
        raise ConfigError("gamma", "relaxation rate must be nonnegative")
    if gamma == 0.0 or dt == 0.0:
        return field.copy()
    w = field.values
    peak = np.abs(w).max()
    if peak > 0:
        edge = max(np.abs(w[:, 0]).max(), np.abs(w[:, -1]).max())
        if edge > 1e-8 * peak:
            raise ResolutionError(
                f"momentum-boundary amplitude {edge / peak:.3e} of peak; "
                "friction would wrap significant mass around the p boundary"
            )
    emat = _friction_matrix(field.grid, gamma, dt)
    out = spectral.fft(w.astype(np.complex128), axis=1) @ emat
    return WignerField(field.grid, np.ascontiguousarray(out.real))


def first_correction_ratio(field: WignerField, model: PotentialModel, t: float = 0.0) -> float:
    """Size of the leading quantum correction relative to the classical term.

    Returns ||(hbar^2/24) V''' d^3W/dp^3|| / ||V' dW/dp|| in the grid L2
    norm, with spectral p-derivatives. For a packet of momentum width
    sigma_p in a region of nonlinearity length chi this scales as
    (hbar / (chi sigma_p))^2.
    """
    g = field.grid
    spec_p = spectral.fft(field.values.astype(np.complex128), axis=1)
    i_s = 1j * g.s[None, :]
    d1 = spectral.ifft(spec_p * i_s, axis=1).real
    d3 = spectral.ifft(spec_p * i_s**3, axis=1).real
    v1 = np.asarray(model.derivative(g.x, 1, t, g.mass), dtype=float)[:, None]
    v3 = np.asarray(model.derivative(g.x, 3, t, g.mass), dtype=float)[:, None]
    num = g.hbar**2 / 24.0 * math.sqrt(float(((v3 * d3) ** 2).sum()) * g.cell_area)
    den = math.sqrt(float(((v1 * d1) ** 2).sum()) * g.cell_area)
    if den < 1e-300:
        raise NumericsError("first-correction ratio undefined: classical term vanishes")
    return num / den


# ---------------------------------------------------------------------------
# composite evolution


@dataclass
class ObserverSpec:
    """What to record along a run beyond the standard diagnostics."""

    fringe_separation: float | None = None
    correction_ratio: bool = False
    snapshot_every: int | None = None
    snapshot_sink: Callable[[int, float, WignerField], None] | None = None


@dataclass
class _StaticKernels:
    kinetic_half: np.ndarray
    kinetic_full: np.ndarray
    potential_static: np.ndarray  # includes the diffusion damping
    friction: np.ndarray | None


def _build_kernels(
    grid: PhaseSpaceGrid,
    model: PotentialModel,
    spec: EvolutionSpec,
) -> tuple[_StaticKernels, DrivenDoubleWell | None]:
    driven = model if isinstance(model, DrivenDoubleWell) else None
    static_model = model if driven is None else model._static()
    pot = potential_multiplier(grid, static_model, spec.bracket, 0.0, spec.dt, spec.n_max)
    env = spec.environment
    if env is not None and env.D > 0:
        pot = pot * np.exp(-env.D * grid.s**2 * spec.dt)[None, :]
    friction = None
    if env is not None and env.gamma > 0:
        friction = _friction_matrix(grid, env.gamma, spec.dt)
    kinetic_half = _kinetic_phase(grid, spec.dt / 2)
    return (
        _StaticKernels(
            kinetic_half=kinetic_half,
            # squared half-step multiplier, not exp(.. dt): keeps the fused
            # path identical to two half steps including the Nyquist row
            kinetic_full=kinetic_half * kinetic_half,
            potential_static=pot,
            friction=friction,
        ),
        driven,
    )


def _fringe_amplitude(values: np.ndarray, grid: PhaseSpaceGrid, s_index: int) -> float:
    spec_p = spectral.fft(values.astype(np.complex128), axis=1)
    return float(np.sqrt((np.abs(spec_p[:, s_index]) ** 2).sum() * grid.dx))


def fringe_s_index(grid: PhaseSpaceGrid, separation: float) -> int:
    """Index of the s bin closest to separation/hbar."""
    target = separation / grid.hbar
    if target > np.abs(grid.s).max():
        raise ConfigError(
            "fringe_separation",
            f"fringe frequency {target:.4g} exceeds the resolvable s range",
        )
    return int(np.argmin(np.abs(grid.s - target)))


def evolve(
    field: WignerField,
    model: PotentialModel,
    spec: EvolutionSpec,
    observers: ObserverSpec | None = None,
):
    """Run the composite Strang propagator and record diagnostics.

    Returns a TrajectoryRecord with one row per recorded step (step 0 and
    the final step always included). Aborts with NumericsError on NaN/Inf
    or when the norm drifts by more than 1e-6.
    """
    from .diagnostics import TrajectoryRecord, purity_of_values

    obs = observers or ObserverSpec()
    grid = field.grid
    spec.check_stability(model, grid.mass)
    if spec.environment is not None:
        spec.environment.check_consistency(grid.mass)

    kernels, driven = _build_kernels(grid, model, spec)
    dt = spec.dt

    record_steps = set(range(0, spec.n_steps + 1, spec.record_every))
    record_steps.add(spec.n_steps)
    snapshot_steps: set[int] = set()
    if obs.snapshot_every:
        snapshot_steps = set(range(0, spec.n_steps + 1, obs.snapshot_every))
        snapshot_steps.add(spec.n_steps)
    boundary_steps = record_steps | snapshot_steps

    s_index = None
    if obs.fringe_separation is not None:
        s_index = fringe_s_index(grid, obs.fringe_separation)

    rows: dict[str, list] = {key: [] for key in (
        "time", "mean_x", "mean_p", "mean_x2", "mean_p2", "mean_xp",
        "norm", "purity", "linear_entropy", "negativity_volume",
    )}
    if s_index is not None:
        rows["fringe_contrast"] = []
    if obs.correction_ratio:
        rows["correction_ratio"] = []
    fringe_baseline: float | None = None

    def measure(step: int, values: np.ndarray) -> None:
        nonlocal fringe_baseline
        t = step * dt
        if not np.isfinite(values).all():
            raise NumericsError("non-finite Wigner values", step=step)
        current = WignerField(grid, values)
        norm = field_norm(current)
        if abs(norm - 1.0) > NORM_DRIFT_TOL:
            raise NumericsError(f"norm drifted to {norm!r}", step=step)
        mom = compute_moments(current)
        pur = purity_of_values(values, grid)
        w_abs_int = float(np.abs(values).sum() * grid.cell_area)
        rows["time"].append(t)
        rows["mean_x"].append(mom.x)
        rows["mean_p"].append(mom.p)
        rows["mean_x2"].append(mom.xx)
        rows["mean_p2"].append(mom.pp)
        rows["mean_xp"].append(mom.xp)
        rows["norm"].append(norm)
        rows["purity"].append(pur)
        rows["linear_entropy"].append(-math.log(pur))
        rows["negativity_volume"].append(max(w_abs_int - norm, 0.0))
        if s_index is not None:
            amp = _fringe_amplitude(values, grid, s_index)
            if fringe_baseline is None:
                if amp == 0.0:
                    raise NumericsError("fringe amplitude is zero at t = 0")
                fringe_baseline = amp
            rows["fringe_contrast"].append(amp / fringe_baseline)
        if obs.correction_ratio:
            rows["correction_ratio"].append(first_correction_ratio(current, model, t))
        if step in snapshot_steps and obs.snapshot_sink is not None:
            obs.snapshot_sink(step, t, current.copy())

    values = field.values.copy()
    if 0 in boundary_steps:
        measure(0, values)

    pending_full_kinetic = False
    for i in range(spec.n_steps):
        if pending_full_kinetic:
            values = _apply_x_spectrum(values, kernels.kinetic_full)
            pending_full_kinetic = False
        else:
            values = _apply_x_spectrum(values, kernels.kinetic_half)

        if driven is not None:
            t_mid = (i + 0.5) * dt
            drive = np.exp(1j * dt * driven.drive_force(t_mid) * grid.s)
            drive[grid.np // 2] = drive[grid.np // 2].real
            mult = kernels.potential_static * drive[None, :]
        else:
            mult = kernels.potential_static
        values = _apply_p_spectrum(values, mult)

        if kernels.friction is not None:
            values = (spectral.fft(values.astype(np.complex128), axis=1) @ kernels.friction).real

        step = i + 1
        if step in boundary_steps or step == spec.n_steps:
            values = _apply_x_spectrum(values, kernels.kinetic_half)
            measure(step, values)
        else:
            pending_full_kinetic = True

    columns = {key: np.asarray(col, dtype=float) for key, col in rows.items()}
    times = columns.pop("time")
    return TrajectoryRecord(times=times, columns=columns)
