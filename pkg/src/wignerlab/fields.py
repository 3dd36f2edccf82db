"""Wigner fields on a grid, plus the (x,s) spectral representation.

The (x,s) representation diagonalizes both the potential kernel and the
momentum-diffusion generator: with W(x,p) expanded over exp(i*s*p) modes,
a potential step and a diffusion step are pointwise multipliers.

Conventions for to_xs/from_xs follow the continuum transform
    Wxs(x, s) = integral W(x, p) exp(-i*s*p) dp,
including the dp weight and the p_min reference phase, so that a field
carrying a cos(p*delta/hbar) modulation shows real spectral peaks at
s = +-delta/hbar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import NumericsError
from .grid import PhaseSpaceGrid

#: tolerated relative imaginary residue when returning to the real field
IMAG_RESIDUE_TOL = 1e-10


@dataclass
class WignerField:
    grid: PhaseSpaceGrid
    values: np.ndarray  # real, shape (nx, np), indexed (x, p)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.nx, self.grid.np):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.np})"
            )

    def copy(self) -> "WignerField":
        return WignerField(self.grid, self.values.copy())

    def norm(self) -> float:
        return field_norm(self)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def field_norm(field: WignerField) -> float:
    """Total integral of W over the phase-space rectangle."""
    return float(field.values.sum() * field.grid.cell_area)


def to_xs(field: WignerField) -> np.ndarray:
    """Spectral representation over (x, s); complex, shape (nx, np)."""
    g = field.grid
    raw = spectral.fft(field.values.astype(np.complex128), axis=1)
    phase = np.exp(-1j * g.s * g.p_min)
    return g.dp * raw * phase[None, :]


def from_xs(wxs: np.ndarray, grid: PhaseSpaceGrid) -> WignerField:
    """Invert to_xs. The imaginary residue must stay below tolerance."""
    phase = np.exp(1j * grid.s * grid.p_min)
    raw = np.asarray(wxs, dtype=np.complex128) * phase[None, :] / grid.dp
    out = spectral.ifft(raw, axis=1)
    scale = float(np.abs(out.real).max())
    residue = float(np.abs(out.imag).max())
    if scale > 0 and residue > IMAG_RESIDUE_TOL * max(scale, 1.0):
        raise NumericsError(
            f"imaginary residue {residue:.3e} exceeds tolerance after inverse transform"
        )
    return WignerField(grid, np.ascontiguousarray(out.real))


def marginals(field: WignerField) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum densities, each integrating to the field norm."""
    g = field.grid
    x_density = field.values.sum(axis=1) * g.dp
    p_density = field.values.sum(axis=0) * g.dx
    return x_density, p_density


@dataclass(frozen=True)
class Moments:
    norm: float
    x: float
    p: float
    xx: float   # <x^2>
    pp: float   # <p^2>
    xp: float   # <xp>, symmetric by construction on a Wigner field

    def covariance(self) -> np.ndarray:
        return np.array([
            [self.xx - self.x**2, self.xp - self.x * self.p],
            [self.xp - self.x * self.p, self.pp - self.p**2],
        ])


def moments(field: WignerField) -> Moments:
    g = field.grid
    w = field.values
    a = g.cell_area
    wx = w.sum(axis=1)
    wp = w.sum(axis=0)
    norm = float(w.sum() * a)
    return Moments(
        norm=norm,
        x=float((g.x * wx).sum() * a),
        p=float((g.p * wp).sum() * a),
        xx=float((g.x**2 * wx).sum() * a),
        pp=float((g.p**2 * wp).sum() * a),
        xp=float((g.x @ w @ g.p) * a),
    )


def l2_distance(a: WignerField, b: WignerField, relative: bool = True) -> float:
    """L2 field distance; relative variant is scaled by the L2 norm of a."""
    if not a.grid.compatible_with(b.grid):
        raise ValueError("fields live on incompatible grids")
    area = a.grid.cell_area
    diff = float(np.sqrt(((a.values - b.values) ** 2).sum() * area))
    if not relative:
        return diff
    scale = float(np.sqrt((a.values**2).sum() * area))
    return diff / scale if scale > 0 else diff


def boundary_tail_fraction(field: WignerField) -> float:
    """Largest |W| on the outermost grid ring relative to the global peak."""
    w = np.abs(field.values)
    peak = w.max()
    if peak == 0:
        return 0.0
    edge = max(w[0, :].max(), w[-1, :].max(), w[:, 0].max(), w[:, -1].max())
    return float(edge / peak)
