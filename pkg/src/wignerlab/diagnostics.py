"""Observables, entropy, divergence metrics, and timescale detectors.

The entropy used throughout is the linear entropy H = -ln((2 pi hbar)
integral W^2), i.e. -ln Tr rho^2. It is computable by quadrature on the
Wigner field, and its production-rate behavior (logarithm of the occupied
phase-space volume) is what the timescale arguments rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError, WignerLabError
from .fields import WignerField, field_norm
from .grid import PhaseSpaceGrid
from .potentials import PotentialModel

NORM_CONTRACT_TOL = 1e-6


# ---------------------------------------------------------------------------
# trajectory record

#: serialization order; optional columns appear only when recorded
COLUMN_ORDER = (
    "mean_x", "mean_p", "mean_x2", "mean_p2", "mean_xp",
    "norm", "purity", "linear_entropy", "negativity_volume",
    "fringe_contrast", "correction_ratio",
)


@dataclass
class TrajectoryRecord:
    """Time series of diagnostics recorded along a run."""

    times: np.ndarray
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        n = self.times.size
        for key, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.size != n:
                raise ValueError(f"column {key!r} length {col.size} != {n} times")
            self.columns[key] = col

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]

    def covariance(self, i: int) -> np.ndarray:
        """Second-moment covariance matrix at row i."""
        c = self.columns
        vx = c["mean_x2"][i] - c["mean_x"][i] ** 2
        vp = c["mean_p2"][i] - c["mean_p"][i] ** 2
        cxp = c["mean_xp"][i] - c["mean_x"][i] * c["mean_p"][i]
        return np.array([[vx, cxp], [cxp, vp]])

    def validate(self) -> None:
        if np.any(np.diff(self.times) <= 0):
            raise WignerLabError("record times must be strictly increasing")
        if np.any(np.abs(self.columns["norm"] - 1.0) > NORM_CONTRACT_TOL):
            raise WignerLabError("record norm drifts beyond tolerance")
        pur = self.columns["purity"]
        if np.any(pur <= 0) or np.any(pur > 1.0 + 1e-6):
            raise WignerLabError("record purity outside (0, 1 + 1e-6]")

    def ordered_columns(self) -> list[str]:
        return [key for key in COLUMN_ORDER if key in self.columns]

    def to_csv(self, path) -> None:
        """One row per recorded time; floats use shortest round-trip repr."""
        names = self.ordered_columns()
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(",".join(["time"] + names) + "\n")
            for i in range(len(self)):
                cells = [repr(float(self.times[i]))]
                cells += [repr(float(self.columns[n][i])) for n in names]
                fh.write(",".join(cells) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryRecord":
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip().split(",")
            data = [
                [float(cell) for cell in line.strip().split(",")]
                for line in fh
                if line.strip()
            ]
        arr = np.asarray(data, dtype=float)
        if header[0] != "time":
            raise WignerLabError(f"unexpected CSV header {header!r}")
        columns = {name: arr[:, j + 1] for j, name in enumerate(header[1:])}
        return cls(times=arr[:, 0], columns=columns)


# ---------------------------------------------------------------------------
# scalar observables


def purity_of_values(values: np.ndarray, grid: PhaseSpaceGrid) -> float:
    return float(2.0 * math.pi * grid.hbar * (values**2).sum() * grid.cell_area)


def purity(field: WignerField) -> float:
    """(2 pi hbar) * integral of W^2; equals Tr rho^2, 1 for pure states."""
    norm = field_norm(field)
    if abs(norm - 1.0) > NORM_CONTRACT_TOL:
        raise WignerLabError(f"purity requires a normalized field (norm = {norm!r})")
    return purity_of_values(field.values, field.grid)


def linear_entropy(field: WignerField) -> float:
    """-ln purity, in nats; 0 for pure states."""
    p = purity(field)
    if p <= 0:
        raise NumericsError(f"purity {p!r} is not positive")
    return -math.log(p)


def negativity_volume(field: WignerField) -> float:
    """integral |W| - 1: total weight of negative regions, doubled."""
    g = field.grid
    return max(float(np.abs(field.values).sum() * g.cell_area) - field_norm(field), 0.0)


def fringe_contrast(
    field: WignerField,
    separation: float,
    baseline: float | None = None,
) -> float:
    """Spectral amplitude of the cat-fringe mode at s = separation/hbar.

    With a baseline (the t = 0 amplitude) the result is the normalized
    contrast; without one the raw amplitude is returned.
    """
    from .propagators import _fringe_amplitude, fringe_s_index

    amp = _fringe_amplitude(field.values, field.grid, fringe_s_index(field.grid, separation))
    if baseline is None:
        return amp
    if baseline == 0.0:
        raise NumericsError("fringe baseline amplitude is zero")
    return amp / baseline


# ---------------------------------------------------------------------------
# divergence between paired runs


@dataclass
class DivergenceRecord:
    times: np.ndarray
    rel_mean_x: np.ndarray
    rel_mean_x2: np.ndarray
    rel_mean_p2: np.ndarray
    field_l2: np.ndarray | None = None  # populated when snapshots align

    def series(self, metric: str) -> np.ndarray:
        return getattr(self, metric)


def _relative_difference(a: np.ndarray, b: np.ndarray, scale: np.ndarray) -> np.ndarray:
    floor = np.maximum(scale, 1e-300)
    return np.abs(a - b) / floor


def divergence(
    quantum: TrajectoryRecord,
    classical: TrajectoryRecord,
    fields_quantum: list[WignerField] | None = None,
    fields_classical: list[WignerField] | None = None,
) -> DivergenceRecord:
    """Per-time relative moment differences, plus L2 field distance when
    matching snapshot lists are supplied.

    First moments are scaled by the RMS position; second moments by the
    larger of the two values.
    """
    if quantum.times.shape != classical.times.shape or not np.array_equal(
        quantum.times, classical.times
    ):
        raise WignerLabError("divergence requires identical time axes")
    q, c = quantum.columns, classical.columns
    rms_x = np.sqrt(np.maximum(np.maximum(q["mean_x2"], c["mean_x2"]), 0.0))
    rel_x = _relative_difference(q["mean_x"], c["mean_x"], rms_x)
    rel_x2 = _relative_difference(q["mean_x2"], c["mean_x2"], np.maximum(q["mean_x2"], c["mean_x2"]))
    rel_p2 = _relative_difference(q["mean_p2"], c["mean_p2"], np.maximum(q["mean_p2"], c["mean_p2"]))
    field_l2 = None
    if fields_quantum is not None and fields_classical is not None:
        if len(fields_quantum) != len(fields_classical):
            raise WignerLabError("snapshot lists differ in length")
        from .fields import l2_distance

        field_l2 = np.asarray(
            [l2_distance(a, b) for a, b in zip(fields_quantum, fields_classical)]
        )
    return DivergenceRecord(
        times=quantum.times.copy(),
        rel_mean_x=rel_x,
        rel_mean_x2=rel_x2,
        rel_mean_p2=rel_p2,
        field_l2=field_l2,
    )


# ---------------------------------------------------------------------------
# detectors and fits


@dataclass(frozen=True)
class BreakdownResult:
    reached: bool
    time: float  # first crossing, or the last record time when not reached

    def __repr__(self):
        state = "reached" if self.reached else "not reached by"
        return f"BreakdownResult({state} t = {self.time:.6g})"


def breakdown_time(times: np.ndarray, series: np.ndarray, threshold: float) -> BreakdownResult:
    """First crossing of threshold, linearly interpolated between samples."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if times.size != series.size or times.size == 0:
        raise WignerLabError("times and series must be equal-length and nonempty")
    above = series >= threshold
    if above[0]:
        return BreakdownResult(True, float(times[0]))
    idx = np.argmax(above)
    if not above[idx]:
        return BreakdownResult(False, float(times[-1]))
    t0, t1 = times[idx - 1], times[idx]
    y0, y1 = series[idx - 1], series[idx]
    if y1 == y0:
        return BreakdownResult(True, float(t1))
    frac = (threshold - y0) / (y1 - y0)
    return BreakdownResult(True, float(t0 + frac * (t1 - t0)))


@dataclass
class EntropyRateFit:
    rate: float
    intercept: float
    residual_rms: float
    window_times: np.ndarray
    hdot_times: np.ndarray  # centered-difference grid (full record)
    hdot: np.ndarray


def entropy_rate_fit(
    record: TrajectoryRecord,
    window: tuple[float, float],
    column: str = "linear_entropy",
) -> EntropyRateFit:
    """Least-squares entropy slope on [t0, t1], with the pointwise rate
    series (centered differences over the full record) for profile checks.
    """
    t0, t1 = window
    mask = (record.times >= t0) & (record.times <= t1)
    if mask.sum() < 8:
        raise WignerLabError(f"window [{t0}, {t1}] contains {int(mask.sum())} samples; need >= 8")
    t = record.times[mask]
    h = record[column][mask]
    if np.ptp(t) == 0:
        raise WignerLabError("degenerate fit window")
    slope, intercept = np.polyfit(t, h, 1)
    resid = h - (slope * t + intercept)
    hdot = np.gradient(record[column], record.times)
    return EntropyRateFit(
        rate=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        window_times=t,
        hdot_times=record.times.copy(),
        hdot=hdot,
    )


# ---------------------------------------------------------------------------
# contracting width


def stable_direction(model: PotentialModel, x: float, t: float = 0.0, mass: float = 1.0) -> np.ndarray:
    """Unit vector along the contracting eigendirection of the linearized
    flow at position x. Requires a locally unstable potential (V'' < 0).
    """
    v2 = float(np.asarray(model.derivative(np.asarray([x]), 2, t, mass))[0])
    if v2 >= 0:
        raise WignerLabError(
            f"linearization at x = {x:.6g} has no contracting direction (V'' = {v2:.6g} >= 0)"
        )
    lam = math.sqrt(-v2 / mass)
    vec = np.array([1.0, -mass * lam])
    return vec / np.linalg.norm(vec)


@dataclass
class ContractingWidth:
    times: np.ndarray
    width: np.ndarray            # std of the field along the stable direction
    sigma_c_estimate: np.ndarray  # critical-dispersion estimate, 2 * width

    def final_variance(self) -> float:
        return float(self.width[-1] ** 2)


def contracting_width(
    record: TrajectoryRecord,
    model: PotentialModel,
    mass: float,
    t_eval: float = 0.0,
) -> ContractingWidth:
    """Width of the state along the contracting direction of the local flow.

    The direction comes from the linearization at the instantaneous
    centroid. In the steady squeezing-vs-diffusion balance the width
    approaches half the critical dispersion sqrt(2 D / |lambda|), so the
    reported sigma_c estimate is twice the measured width.
    """
    widths = np.empty(len(record))
    for i in range(len(record)):
        direction = stable_direction(model, float(record["mean_x"][i]), t_eval, mass)
        cov = record.covariance(i)
        var = float(direction @ cov @ direction)
        if var <= 0:
            raise NumericsError(f"non-positive variance along stable direction at row {i}")
        widths[i] = math.sqrt(var)
    return ContractingWidth(
        times=record.times.copy(),
        width=widths,
        sigma_c_estimate=2.0 * widths,
    )
