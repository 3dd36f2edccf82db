"""Run configuration files.

The dialect is flat, sectioned, text-based key/value with `#` comments.
Keys carry their units explicitly (dt_time, D_p2_per_time, ...), values
are plain numbers or words, and there is no quoting or nesting, so configs
diff cleanly and parse identically everywhere.

Example::

    [grid]
    nx = 256
    np = 256
    x_min_length = -10
    x_max_length = 10
    p_min_momentum = -10
    p_max_momentum = 10
    hbar_action = 1.0
    mass = 1.0

    [potential]
    kind = harmonic
    omega_per_time = 1.0

    [initial_state]
    kind = gaussian
    sigma_x_length = 0.7071067811865476
    sigma_p_momentum = 0.7071067811865476

    [evolution]
    bracket = moyal
    dt_time = 0.0314159265358979
    n_steps = 2000
    record_every = 10
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .errors import ConfigError
from .grid import PhaseSpaceGrid, make_grid
from .potentials import DoubleWell, DrivenDoubleWell, Free, Harmonic, Inverted, PotentialModel
from .propagators import EnvironmentModel, EvolutionSpec
from .states import CatSpec, GaussianSpec, InitialStateSpec

SWEEP_PARAMETERS = ("hbar", "D", "dt", "drive_amplitude")


class _Required:
    pass


class _Missing:
    pass


_REQUIRED = _Required()
_MISSING = _Missing()


class _Section:
    def __init__(self, name: str, data: dict[str, str]):
        self.name = name
        self.data = data
        self.seen: set[str] = set()

    def _raw(self, key: str, required: bool):
        self.seen.add(key)
        if key in self.data:
            return self.data[key]
        if required:
            raise ConfigError(f"{self.name}.{key}", "required key is missing")
        return _MISSING

    def floatv(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default is _REQUIRED)
        if raw is _MISSING:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key}", f"expected a number, got {raw!r}") from None

    def intv(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default is _REQUIRED)
        if raw is _MISSING:
            return default
        try:
            return int(raw, 10)
        except ValueError:
            raise ConfigError(f"{self.name}.{key}", f"expected an integer, got {raw!r}") from None

    def strv(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default is _REQUIRED)
        return default if raw is _MISSING else str(raw)

    def boolv(self, key: str, default=False):
        raw = self._raw(key, False)
        if raw is _MISSING:
            return default
        lowered = str(raw).strip().lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{self.name}.{key}", f"expected a boolean, got {raw!r}")

    def reject_unknown(self) -> None:
        unknown = set(self.data) - self.seen
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"{self.name}.{key}", "unknown key")


def parse_sections(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",),
        comment_prefixes=("#", ";"),
        interpolation=None,
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", f"parse failure: {exc}") from None
    return {name: dict(parser[name]) for name in parser.sections()}


def render_sections(sections: dict[str, dict[str, str]]) -> str:
    out = io.StringIO()
    for name, data in sections.items():
        out.write(f"[{name}]\n")
        for key, value in data.items():
            out.write(f"{key} = {value}\n")
        out.write("\n")
    return out.getvalue()


@dataclass
class OutputOptions:
    trajectory_csv: str = "trajectory.csv"
    snapshot_every: int = 0
    heatmap: bool = False


@dataclass
class RunConfig:
    grid: PhaseSpaceGrid
    potential: PotentialModel
    state: InitialStateSpec
    evolution: EvolutionSpec
    outputs: OutputOptions
    sections: dict[str, dict[str, str]]
    raw_text: str

    def with_override(self, parameter: str, value: float) -> "RunConfig":
        """New config with one swept parameter replaced."""
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError("sweep.parameter", f"parameter must be one of {SWEEP_PARAMETERS}")
        sections = {name: dict(data) for name, data in self.sections.items()}
        if parameter == "hbar":
            sections["grid"]["hbar_action"] = repr(float(value))
        elif parameter == "D":
            sections.setdefault("environment", {})["D_p2_per_time"] = repr(float(value))
        elif parameter == "dt":
            # hold the total evolved time fixed across the sweep
            old_dt = float(sections["evolution"]["dt_time"])
            old_steps = int(sections["evolution"]["n_steps"])
            steps = max(1, round(old_dt * old_steps / float(value)))
            sections["evolution"]["dt_time"] = repr(float(value))
            sections["evolution"]["n_steps"] = str(steps)
        elif parameter == "drive_amplitude":
            sections["potential"]["drive_amplitude_force"] = repr(float(value))
        text = render_sections(sections)
        return build_run_config(sections, text)

    def with_bracket(self, bracket: str) -> "RunConfig":
        """New config with the evolution bracket replaced (for paired runs)."""
        sections = {name: dict(data) for name, data in self.sections.items()}
        sections["evolution"]["bracket"] = bracket
        text = render_sections(sections)
        return build_run_config(sections, text)


def _build_grid(sec: _Section) -> PhaseSpaceGrid:
    grid = make_grid(
        nx=sec.intv("nx"),
        np=sec.intv("np"),
        x_min=sec.floatv("x_min_length"),
        x_max=sec.floatv("x_max_length"),
        p_min=sec.floatv("p_min_momentum"),
        p_max=sec.floatv("p_max_momentum"),
        hbar=sec.floatv("hbar_action", 1.0),
        mass=sec.floatv("mass", 1.0),
    )
    sec.reject_unknown()
    return grid


def _build_potential(sec: _Section) -> PotentialModel:
    kind = sec.strv("kind")
    if kind == "free":
        model = Free()
    elif kind == "harmonic":
        model = Harmonic(omega=sec.floatv("omega_per_time"))
    elif kind == "inverted":
        model = Inverted(lambda0=sec.floatv("lambda0_per_time"))
    elif kind == "double_well":
        model = DoubleWell(a=sec.floatv("a_quadratic"), b=sec.floatv("b_quartic"))
    elif kind == "driven_double_well":
        model = DrivenDoubleWell(
            a=sec.floatv("a_quadratic"),
            b=sec.floatv("b_quartic"),
            amplitude=sec.floatv("drive_amplitude_force"),
            drive_omega=sec.floatv("drive_omega_per_time"),
        )
    else:
        raise ConfigError("potential.kind", f"unknown potential kind {kind!r}")
    sec.reject_unknown()
    return model


def _build_state(sec: _Section) -> InitialStateSpec:
    kind = sec.strv("kind")
    if kind == "gaussian":
        spec = GaussianSpec(
            x0=sec.floatv("x0_length", 0.0),
            p0=sec.floatv("p0_momentum", 0.0),
            sigma_x=sec.floatv("sigma_x_length"),
            sigma_p=sec.floatv("sigma_p_momentum"),
            correlation=sec.floatv("xp_correlation", 0.0),
        )
    elif kind == "cat":
        spec = CatSpec(
            separation=sec.floatv("separation_length"),
            x0=sec.floatv("x0_length", 0.0),
            p0=sec.floatv("p0_momentum", 0.0),
            sigma_x=sec.floatv("sigma_x_length"),
            sigma_p=sec.floatv("sigma_p_momentum", None),
            relative_phase=sec.floatv("relative_phase_rad", 0.0),
        )
    else:
        raise ConfigError("initial_state.kind", f"unknown state kind {kind!r}")
    sec.reject_unknown()
    return spec


def _build_environment(sec: _Section | None) -> EnvironmentModel | None:
    if sec is None:
        return None
    env = EnvironmentModel(
        D=sec.floatv("D_p2_per_time", 0.0),
        gamma=sec.floatv("gamma_per_time", 0.0),
        temperature=sec.floatv("temperature_energy", None),
    )
    sec.reject_unknown()
    return env


def _build_evolution(sec: _Section, environment: EnvironmentModel | None) -> EvolutionSpec:
    spec = EvolutionSpec(
        bracket=sec.strv("bracket", "moyal"),
        n_max=sec.intv("n_max", None),
        environment=environment,
        dt=sec.floatv("dt_time"),
        n_steps=sec.intv("n_steps"),
        record_every=sec.intv("record_every", 1),
    )
    sec.reject_unknown()
    return spec


def _build_outputs(sec: _Section | None) -> OutputOptions:
    if sec is None:
        return OutputOptions()
    opts = OutputOptions(
        trajectory_csv=sec.strv("trajectory_csv", "trajectory.csv"),
        snapshot_every=sec.intv("snapshot_every", 0),
        heatmap=sec.boolv("heatmap", False),
    )
    sec.reject_unknown()
    if opts.snapshot_every < 0:
        raise ConfigError("outputs.snapshot_every", "must be nonnegative")
    return opts


def _qualify(section: str, exc: ConfigError) -> ConfigError:
    if "." in exc.field:
        return exc
    return ConfigError(f"{section}.{exc.field}", str(exc).split(": ", 1)[-1])


def build_run_config(sections: dict[str, dict[str, str]], raw_text: str) -> RunConfig:
    for required in ("grid", "potential", "initial_state", "evolution"):
        if required not in sections:
            raise ConfigError(required, "required section is missing")
    try:
        grid = _build_grid(_Section("grid", sections["grid"]))
    except ConfigError as exc:
        raise _qualify("grid", exc) from None
    try:
        potential = _build_potential(_Section("potential", sections["potential"]))
    except ConfigError as exc:
        raise _qualify("potential", exc) from None
    try:
        state = _build_state(_Section("initial_state", sections["initial_state"]))
    except ConfigError as exc:
        raise _qualify("initial_state", exc) from None
    env_data = sections.get("environment")
    try:
        environment = _build_environment(
            _Section("environment", env_data) if env_data is not None else None
        )
        if environment is not None:
            environment.check_consistency(grid.mass)
    except ConfigError as exc:
        raise _qualify("environment", exc) from None
    try:
        evolution = _build_evolution(_Section("evolution", sections["evolution"]), environment)
        evolution.check_stability(potential, grid.mass)
    except ConfigError as exc:
        raise _qualify("evolution", exc) from None
    outputs_data = sections.get("outputs")
    try:
        outputs = _build_outputs(
            _Section("outputs", outputs_data) if outputs_data is not None else None
        )
    except ConfigError as exc:
        raise _qualify("outputs", exc) from None
    return RunConfig(
        grid=grid,
        potential=potential,
        state=state,
        evolution=evolution,
        outputs=outputs,
        sections=sections,
        raw_text=raw_text,
    )


def load_run_config(path_or_text: str, is_text: bool = False) -> RunConfig:
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    return build_run_config(parse_sections(text), text)


@dataclass
class SweepConfig:
    base: RunConfig
    parameter: str
    values: list[float]
    paired: bool
    lyapunov: dict | None = None  # seed/duration for the tangent-map reference
    moment_threshold: float = 0.1

    def member(self, index: int) -> RunConfig:
        return self.base.with_override(self.parameter, self.values[index])


def load_sweep_config(path_or_text: str, is_text: bool = False) -> SweepConfig:
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    sections = parse_sections(text)
    if "sweep" not in sections:
        raise ConfigError("sweep", "required section is missing")
    sec = _Section("sweep", sections["sweep"])
    parameter = sec.strv("parameter")
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError("sweep.parameter", f"parameter must be one of {SWEEP_PARAMETERS}")
    raw_values = sec.strv("values")
    try:
        values = [float(v) for v in raw_values.replace(",", " ").split()]
    except ValueError:
        raise ConfigError("sweep.values", f"expected a list of numbers, got {raw_values!r}") from None
    if len(values) < 2:
        raise ConfigError("sweep.values", "need at least 2 values")
    positive_required = parameter in ("hbar", "dt")
    for v in values:
        if positive_required and v <= 0:
            raise ConfigError("sweep.values", f"{parameter} values must be positive")
        if v < 0:
            raise ConfigError("sweep.values", "values must be nonnegative")
    paired = sec.boolv("paired", False)
    moment_threshold = sec.floatv("moment_threshold", 0.1)
    lyapunov: dict | None = None
    lyap_keys = {
        "x0": sec.floatv("lyapunov_x0_length", None),
        "p0": sec.floatv("lyapunov_p0_momentum", None),
        "duration": sec.floatv("lyapunov_duration_time", None),
        "dt": sec.floatv("lyapunov_dt_time", None),
    }
    if any(v is not None for v in lyap_keys.values()):
        lyapunov = {k: v for k, v in lyap_keys.items() if v is not None}
    sec.reject_unknown()
    base_sections = {name: data for name, data in sections.items() if name != "sweep"}
    base = build_run_config(base_sections, render_sections(base_sections))
    return SweepConfig(
        base=base, parameter=parameter, values=values, paired=paired,
        lyapunov=lyapunov, moment_threshold=moment_threshold,
    )


# ---------------------------------------------------------------------------
# scenario files for the estimator CLI


def load_scenario(path_or_text: str, is_text: bool = False):
    """MacroScenario plus optional reference values from a scenario file."""
    from .estimators import HBAR_SI, MacroScenario, SECONDS_PER_DAY

    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    sections = parse_sections(text)
    if "scenario" not in sections:
        raise ConfigError("scenario", "required section is missing")
    sec = _Section("scenario", sections["scenario"])
    lyapunov_inverse_days = sec.floatv("lyapunov_inverse_days")
    if lyapunov_inverse_days <= 0:
        raise ConfigError("scenario.lyapunov_inverse_days", "must be positive")
    scenario = MacroScenario(
        name=sec.strv("name"),
        mass=sec.floatv("mass_kg"),
        velocity=sec.floatv("speed_m_per_s"),
        period=sec.floatv("period_days") * SECONDS_PER_DAY,
        lyapunov_rate=1.0 / (lyapunov_inverse_days * SECONDS_PER_DAY),
        hbar=sec.floatv("hbar_Js", HBAR_SI),
    )
    reference_t_r_years = sec.floatv("reference_t_r_years", None)
    reference_log_action = sec.floatv("reference_log_action", None)
    sec.reject_unknown()
    return scenario, reference_t_r_years, reference_log_action
