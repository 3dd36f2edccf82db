"""Closed-form timescale estimators, the Gaussian covariance oracle, a
tangent-map Lyapunov measurement, and the Hyperion worked example.

Timescales implemented:

* chaotic correspondence breakdown   t = (1/lambda) ln(chi sigma_p / hbar)
* action-based variant               t = (1/lambda) ln(A0 / hbar)
* integrable breakdown               t = (1/Omega) (A0 / hbar)^alpha
* fringe decay time                  tau = hbar^2 / (D dx^2)
* critical dispersion                sigma_c = sqrt(2 D / lambda)
* coherence length                   l = hbar / sigma_c
* equilibration time                 t_eq = (H_eq / H0) / Hdot, and the
  variant (1/lambda) (H_eq / H0); they coincide only when Hdot = lambda.

The covariance oracle integrates the exact mean/covariance equations of
motion for quadratic potentials with momentum diffusion and optional
friction; it is the ground truth the grid propagator is tested against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AlreadyQuantumError, ConfigError, UnsupportedModelError, WignerLabError
from .potentials import Harmonic, Inverted, PotentialModel

SECONDS_PER_DAY = 86400.0
SECONDS_PER_YEAR = 365.25 * SECONDS_PER_DAY
HBAR_SI = 1.0545718e-34  # J s
K_B_SI = 1.380649e-23    # J / K


# ---------------------------------------------------------------------------
# closed-form timescales


def _require_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if value is None or not value > 0:
            raise ConfigError(name, f"{name} must be positive (got {value!r})")


def t_hbar_chaotic(lam: float, chi: float, sigma_p: float, hbar: float) -> float:
    """(1/lambda) ln(chi sigma_p / hbar); logarithmic in 1/hbar."""
    _require_positive(lam=lam, chi=chi, sigma_p=sigma_p, hbar=hbar)
    ratio = chi * sigma_p / hbar
    if ratio <= 1.0:
        raise AlreadyQuantumError(
            f"chi*sigma_p = {chi * sigma_p:.6g} does not exceed hbar = {hbar:.6g}"
        )
    return math.log(ratio) / lam


def t_r(lam: float, action: float, hbar: float) -> float:
    """(1/lambda) ln(A0 / hbar). lambda = 0 returns the +inf sentinel."""
    _require_positive(action=action, hbar=hbar)
    if lam < 0:
        raise ConfigError("lam", "lambda must be nonnegative")
    if action < hbar:
        raise AlreadyQuantumError(f"A0 = {action:.6g} below hbar = {hbar:.6g}")
    if lam == 0.0:
        return math.inf
    return math.log(action / hbar) / lam


def t_hbar_integrable(omega: float, action: float, hbar: float, alpha: float) -> float:
    """(1/Omega) (A0 / hbar)^alpha; alpha is a free positive power."""
    _require_positive(omega=omega, action=action, hbar=hbar, alpha=alpha)
    return (action / hbar) ** alpha / omega


@dataclass(frozen=True)
class DecoherenceTime:
    primary: float                 # hbar^2 / (D dx^2): the operational fringe-decay time
    thermal_form: float | None     # tau_R (lambda_dB / dx)^2 when (gamma, m, T) supplied
    consistent: bool | None
    note: str

    def __float__(self) -> float:
        return self.primary


def decoherence_time(
    D: float,
    separation: float,
    hbar: float,
    gamma: float | None = None,
    mass: float | None = None,
    temperature: float | None = None,
    k_b: float = 1.0,
) -> DecoherenceTime:
    """Fringe-decay time of a superposition separated by `separation`.

    The primary form hbar^2 / (D separation^2) is exactly the inverse rate
    at which momentum diffusion damps the cos(p separation / hbar) fringe.
    When (gamma, mass, temperature) are supplied the thermal form
    tau_R (lambda_dB / separation)^2 is evaluated as well; the two agree
    exactly when D = 2 m gamma k_B T.
    """
    _require_positive(D=D, separation=separation, hbar=hbar)
    primary = hbar**2 / (D * separation**2)
    thermal = None
    consistent = None
    note = (
        "primary form hbar^2/(D dx^2) is the measured fringe-decay time; "
        "a formulation with an extra 1/gamma prefactor is dimensionally "
        "inconsistent with the thermal form and is not used"
    )
    if gamma is not None and mass is not None and temperature is not None:
        _require_positive(gamma=gamma, mass=mass, temperature=temperature)
        lambda_db = math.sqrt(hbar**2 / (2.0 * mass * k_b * temperature))
        thermal = (1.0 / gamma) * (lambda_db / separation) ** 2
        consistent = abs(thermal - primary) <= 1e-9 * primary
        if not consistent:
            note += (
                f"; thermal form {thermal:.6g} differs from primary {primary:.6g} "
                "because D != 2 m gamma k_B T"
            )
    return DecoherenceTime(primary=primary, thermal_form=thermal, consistent=consistent, note=note)


def sigma_c(D: float, lam: float) -> float:
    """Critical dispersion sqrt(2 D / lambda): the momentum scale below
    which diffusion damps structure faster than squeezing regenerates it.
    The steady packet width along the contracting direction is half this."""
    _require_positive(D=D, lam=lam)
    return math.sqrt(2.0 * D / lam)


def coherence_length(D: float, lam: float, hbar: float) -> float:
    """hbar / sigma_c: largest distance over which coherence survives."""
    _require_positive(hbar=hbar)
    return hbar / sigma_c(D, lam)


@dataclass(frozen=True)
class EquilibrationTime:
    rate_form: float       # (H_eq / H0) / Hdot
    lyapunov_form: float   # (1/lambda) (H_eq / H0)


def t_eq(h_eq: float, h0: float, hdot: float, lam: float | None = None) -> EquilibrationTime:
    """Both published forms of the equilibration time; they coincide when
    the entropy rate equals the Lyapunov exponent."""
    _require_positive(h_eq=h_eq, h0=h0, hdot=hdot)
    if lam is None:
        lam = hdot
    _require_positive(lam=lam)
    ratio = h_eq / h0
    return EquilibrationTime(rate_form=ratio / hdot, lyapunov_form=ratio / lam)


def entropy_rate_profile(t, lam: float, sigma0_sq: float, sigma_c_sq: float):
    """Entropy production rate lambda / (1 + (sigma0^2/sigma_c^2 - 1) e^{-2 lambda t}).

    sigma0_sq is the initial variance along the contracting direction and
    sigma_c_sq the steady variance it relaxes to. With sigma_c_sq = D/(2 lambda)
    this reproduces the exact solvable-model rate up to cross-covariance
    corrections; the widely quoted sigma_c^2 = 2D/lambda convention only
    changes the transient, not the late-time limit lambda.
    """
    _require_positive(lam=lam, sigma0_sq=sigma0_sq, sigma_c_sq=sigma_c_sq)
    t = np.asarray(t, dtype=float)
    return lam / (1.0 + (sigma0_sq / sigma_c_sq - 1.0) * np.exp(-2.0 * lam * t))


# ---------------------------------------------------------------------------
# Gaussian covariance oracle


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray        # (x, p)
    covariance: np.ndarray  # 2x2 symmetric positive definite

    def validated(self, hbar: float) -> "GaussianState":
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (2, 2) or abs(cov[0, 1] - cov[1, 0]) > 1e-12 * max(1.0, abs(cov[0, 1])):
            raise ConfigError("covariance", "covariance must be 2x2 symmetric")
        det = float(np.linalg.det(cov))
        if det < (hbar / 2) ** 2 * (1.0 - 1e-9):
            raise ConfigError(
                "covariance",
                f"det Sigma = {det:.6g} below the physical bound (hbar/2)^2 = {(hbar / 2) ** 2:.6g}",
            )
        return self


def _flow_matrix(model: PotentialModel, mass: float, gamma: float) -> np.ndarray:
    if isinstance(model, Harmonic):
        curvature = mass * model.omega**2
    elif isinstance(model, Inverted):
        curvature = -mass * model.lambda0**2
    else:
        raise UnsupportedModelError(
            f"covariance oracle supports quadratic potentials only, not {type(model).__name__}"
        )
    return np.array([[0.0, 1.0 / mass], [-curvature, -2.0 * gamma]])


@dataclass
class OracleTrajectory:
    times: np.ndarray
    means: np.ndarray        # (n, 2)
    covariances: np.ndarray  # (n, 2, 2)
    entropy: np.ndarray      # linear entropy ln(2 sqrt(det Sigma) / hbar)

    def variance_along(self, direction: np.ndarray) -> np.ndarray:
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return np.einsum("i,nij,j->n", d, self.covariances, d)

    def hdot(self) -> np.ndarray:
        return np.gradient(self.entropy, self.times)


def gaussian_oracle(
    model: PotentialModel,
    environment,
    initial: GaussianState,
    times,
    hbar: float,
    mass: float = 1.0,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> OracleTrajectory:
    """Integrate the exact mean/covariance equations for quadratic models.

    d mu / dt   = A mu
    d Sigma /dt = A Sigma + Sigma A^T + Q,   Q = diag(0, 2 D)

    with A the linearized flow including the -2 gamma momentum damping.
    Solved with an adaptive high-order integrator at tight tolerance so it
    can serve as ground truth for the grid propagator.
    """
    times = np.asarray(times, dtype=float)
    D = getattr(environment, "D", 0.0) if environment is not None else 0.0
    gamma = getattr(environment, "gamma", 0.0) if environment is not None else 0.0
    initial = initial.validated(hbar)
    A = _flow_matrix(model, mass, gamma)
    Q = np.array([[0.0, 0.0], [0.0, 2.0 * D]])

    def rhs(t, y):
        mu = y[:2]
        S = y[2:].reshape(2, 2)
        dmu = A @ mu
        dS = A @ S + S @ A.T + Q
        return np.concatenate([dmu, dS.ravel()])

    y0 = np.concatenate([np.asarray(initial.mean, dtype=float), np.asarray(initial.covariance, dtype=float).ravel()])
    sol = solve_ivp(
        rhs, (float(times[0]), float(times[-1])), y0,
        t_eval=times, method="DOP853", rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise WignerLabError(f"oracle integration failed: {sol.message}")
    means = sol.y[:2].T
    covs = sol.y[2:].T.reshape(-1, 2, 2)
    dets = np.linalg.det(covs)
    if np.any(dets <= 0):
        raise WignerLabError("oracle covariance lost positive definiteness")
    entropy = np.log(2.0 * np.sqrt(dets) / hbar)
    return OracleTrajectory(times=times, means=means, covariances=covs, entropy=entropy)


# ---------------------------------------------------------------------------
# tangent-map Lyapunov estimate


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    low_confidence: bool
    segment_rates: np.ndarray

    def __float__(self) -> float:
        return self.value


def classical_lyapunov(
    model: PotentialModel,
    x0: float,
    p0: float,
    duration: float,
    mass: float = 1.0,
    dt: float = 2e-3,
    segment_time: float = 1.0,
    discard_fraction: float = 0.1,
) -> LyapunovEstimate:
    """Largest Lyapunov exponent by tangent-map integration.

    Integrates the trajectory and the linearized deviation with RK4,
    renormalizing the deviation once per segment; the exponent is the mean
    log-stretch per unit time over segments after a discarded transient,
    with the standard error across segments. The flag is raised when the
    segment scatter exceeds half the mean.
    """
    if duration <= 0 or dt <= 0 or segment_time <= 0:
        raise ConfigError("duration", "duration, dt and segment_time must be positive")
    steps_per_segment = max(1, round(segment_time / dt))
    n_segments = max(1, int(duration / (steps_per_segment * dt)))

    def deriv(state, t):
        x, p, dx, dp = state
        v1 = float(model.derivative(x, 1, t, mass))
        v2 = float(model.derivative(x, 2, t, mass))
        return np.array([p / mass, -v1, dp / mass, -v2 * dx])

    state = np.array([x0, p0, 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)])
    t = 0.0
    rates = []
    for _ in range(n_segments):
        for _ in range(steps_per_segment):
            k1 = deriv(state, t)
            k2 = deriv(state + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = deriv(state + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = deriv(state + dt * k3, t + dt)
            state = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
        stretch = math.hypot(state[2], state[3])
        if not np.isfinite(stretch) or stretch <= 0:
            raise WignerLabError("tangent vector degenerated during integration")
        rates.append(math.log(stretch) / (steps_per_segment * dt))
        state[2:] /= stretch
    rates = np.asarray(rates)
    keep = rates[int(len(rates) * discard_fraction):]
    value = float(keep.mean())
    stderr = float(keep.std(ddof=1) / math.sqrt(len(keep))) if len(keep) > 1 else math.inf
    low_confidence = not (stderr <= 0.5 * abs(value))
    return LyapunovEstimate(value=value, stderr=stderr, low_confidence=low_confidence, segment_rates=keep)


# ---------------------------------------------------------------------------
# macroscopic scenario report


@dataclass(frozen=True)
class MacroScenario:
    """Inputs for the macroscopic breakdown-time estimate.

    The action is the product of the kinetic energy (1/2) m v^2 and the
    characteristic period, a deliberate overestimate of the action of the
    internal (tumbling) motion.
    """

    name: str
    mass: float                 # kg
    velocity: float             # m/s
    period: float               # s
    lyapunov_rate: float        # 1/s; may be 0 for the infinite-t_r sentinel
    hbar: float = HBAR_SI
    temperature: float | None = None
    separation: float | None = None

    def __post_init__(self):
        for name in ("mass", "velocity", "period", "hbar"):
            value = getattr(self, name)
            if value is None or not value > 0:
                raise ConfigError(name, f"{name} must be positive (got {value!r})")
        if self.lyapunov_rate is None or self.lyapunov_rate < 0:
            raise ConfigError("lyapunov_rate", "lyapunov_rate must be nonnegative")

    def action(self) -> float:
        a0 = 0.5 * self.mass * self.velocity**2 * self.period
        if a0 < 1e3 * self.hbar:
            warnings.warn(
                f"scenario action {a0:.3e} is not large compared to hbar; "
                "the macroscopic estimate is outside its regime",
                stacklevel=2,
            )
        return a0


@dataclass
class MacroReport:
    scenario_name: str
    action: float
    log_action_ratio: float      # ln(A0 / hbar)
    t_r_seconds: float
    t_r_years: float
    reference_t_r_years: float | None
    reference_log_ratio: float | None

    def to_text(self) -> str:
        lines = [
            f"scenario:        {self.scenario_name}",
            f"action A0:       {self.action:.6e} J s",
            f"ln(A0/hbar):     {self.log_action_ratio:.2f}"
            + (f"   (reference ~{self.reference_log_ratio:.0f})" if self.reference_log_ratio else ""),
            f"t_r:             {self.t_r_seconds:.6e} s = {self.t_r_years:.2f} yr"
            + (f"   (reference ~{self.reference_t_r_years:.0f} yr)" if self.reference_t_r_years else ""),
        ]
        if self.reference_t_r_years and math.isfinite(self.t_r_years):
            lines.append(
                f"ratio to ref:    {self.t_r_years / self.reference_t_r_years:.2f}"
            )
        return "\n".join(lines)


def hyperion_report(
    scenario: MacroScenario,
    reference_t_r_years: float | None = 20.0,
    reference_log_ratio: float | None = 100.0,
) -> MacroReport:
    """Breakdown-time estimate for a macroscopic tumbling body.

    Computes A0 = (1/2) m v^2 * period and t_r = ln(A0/hbar) / lambda and
    reports the computed logarithm next to the commonly quoted reference
    values for the chaotically tumbling moon scenario.
    """
    a0 = scenario.action()
    log_ratio = math.log(a0 / scenario.hbar)
    if scenario.lyapunov_rate == 0.0:
        t_seconds = math.inf
    else:
        t_seconds = log_ratio / scenario.lyapunov_rate
    return MacroReport(
        scenario_name=scenario.name,
        action=a0,
        log_action_ratio=log_ratio,
        t_r_seconds=t_seconds,
        t_r_years=t_seconds / SECONDS_PER_YEAR,
        reference_t_r_years=reference_t_r_years,
        reference_log_ratio=reference_log_ratio,
    )
