"""Initial Wigner states: Gaussian packets and two-packet superpositions.

A Gaussian with covariance
    Sigma = [[sx^2, r*sx*sp], [r*sx*sp, sp^2]]
is physical when sqrt(det Sigma) >= hbar/2; equality is a pure state.

The cat is built as the exact pure superposition of two packets at
x0 +- separation/2 (each with the minimum-uncertainty momentum width
hbar/(2*sigma_x)), whose interference term oscillates as
cos((p - p0)*separation/hbar + phase). If a larger sigma_p is requested,
the pure cat is convolved in p by multiplying its s-spectrum with a
Gaussian, which is the exact action of momentum diffusion and therefore
keeps the state physical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import DomainTooSmallError, UnphysicalStateError
from .fields import WignerField, boundary_tail_fraction, field_norm
from .grid import PhaseSpaceGrid

#: relative tail level allowed at the grid boundary
BOUNDARY_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class GaussianSpec:
    x0: float = 0.0
    p0: float = 0.0
    sigma_x: float = 1.0
    sigma_p: float = 1.0
    correlation: float = 0.0  # Pearson rho of the (x, p) covariance


@dataclass(frozen=True)
class CatSpec:
    separation: float  # distance between the two packet centers
    x0: float = 0.0
    p0: float = 0.0
    sigma_x: float = 1.0
    sigma_p: float | None = None  # default: pure, hbar/(2 sigma_x)
    relative_phase: float = 0.0


InitialStateSpec = GaussianSpec | CatSpec


def _check_tails(field: WignerField) -> None:
    tail = boundary_tail_fraction(field)
    if tail > BOUNDARY_TAIL_TOL:
        raise DomainTooSmallError(
            f"state boundary tail {tail:.3e} exceeds {BOUNDARY_TAIL_TOL:.0e}; "
            "enlarge the grid extents"
        )


def _gaussian_values(grid: PhaseSpaceGrid, spec: GaussianSpec) -> np.ndarray:
    sx, sp, r = spec.sigma_x, spec.sigma_p, spec.correlation
    if sx <= 0 or sp <= 0:
        raise UnphysicalStateError("sigma_x and sigma_p must be positive")
    if not -1.0 < r < 1.0:
        raise UnphysicalStateError("correlation must lie strictly inside (-1, 1)")
    det = (sx * sp) ** 2 * (1.0 - r**2)
    if np.sqrt(det) < grid.hbar / 2 * (1.0 - 1e-12):
        raise UnphysicalStateError(
            f"sqrt(det Sigma) = {np.sqrt(det):.6g} violates the bound hbar/2 = {grid.hbar / 2:.6g}"
        )
    u = (grid.x - spec.x0)[:, None]
    v = (grid.p - spec.p0)[None, :]
    # exponent of the inverse covariance quadratic form
    q = (u**2 / sx**2 - 2 * r * u * v / (sx * sp) + v**2 / sp**2) / (2 * (1 - r**2))
    return np.exp(-q) / (2 * np.pi * np.sqrt(det))


def _cat_values(grid: PhaseSpaceGrid, spec: CatSpec) -> np.ndarray:
    if spec.separation <= 0:
        raise UnphysicalStateError("separation must be positive")
    sx = spec.sigma_x
    if sx <= 0:
        raise UnphysicalStateError("sigma_x must be positive")
    sp_pure = grid.hbar / (2 * sx)
    sp = sp_pure if spec.sigma_p is None else spec.sigma_p
    if sp < sp_pure * (1.0 - 1e-9):
        raise UnphysicalStateError(
            f"sigma_p = {sp:.6g} below the pure-packet width hbar/(2 sigma_x) = {sp_pure:.6g}"
        )

    half = spec.separation / 2
    gx_plus = np.exp(-((grid.x - spec.x0 - half) ** 2) / (2 * sx**2))
    gx_minus = np.exp(-((grid.x - spec.x0 + half) ** 2) / (2 * sx**2))
    gx_mid = np.exp(-((grid.x - spec.x0) ** 2) / (2 * sx**2))
    gp = np.exp(-((grid.p - spec.p0) ** 2) / (2 * sp_pure**2))
    fringe = np.cos((grid.p - spec.p0) * spec.separation / grid.hbar + spec.relative_phase)

    w = (gx_plus + gx_minus)[:, None] * gp[None, :]
    w = w + 2.0 * gx_mid[:, None] * (gp * fringe)[None, :]

    if sp > sp_pure:
        # broaden in p by the exact diffusion factor exp(-v s^2 / 2)
        v = sp**2 - sp_pure**2
        spec_p = spectral.fft(w.astype(np.complex128), axis=1)
        spec_p *= np.exp(-v * grid.s**2 / 2)[None, :]
        w = spectral.ifft(spec_p, axis=1).real
    return w


def make_state(grid: PhaseSpaceGrid, spec: InitialStateSpec) -> WignerField:
    """Build a normalized Wigner field from a state specification."""
    if isinstance(spec, GaussianSpec):
        values = _gaussian_values(grid, spec)
    elif isinstance(spec, CatSpec):
        values = _cat_values(grid, spec)
    else:
        raise TypeError(f"unknown state spec {type(spec).__name__}")
    field = WignerField(grid, values)
    _check_tails(field)
    field.values /= field_norm(field)
    return field
