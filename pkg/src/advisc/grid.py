"""Periodic 1D grid, field containers, and translated exact solutions.

All containers are immutable after construction: the wrapped numpy arrays
are defensive copies with the writeable flag cleared, so instances can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def _frozen_array(values, n_expected: int | None = None) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    if out.ndim != 1:
        raise ValueError(f"expected a 1D sequence, got shape {out.shape}")
    if n_expected is not None and out.shape[0] != n_expected:
        raise ValueError(
            f"length {out.shape[0]} does not match grid with {n_expected} cells"
        )
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite entries violate the finite-value contract")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid of ``n_cells`` cells of width ``dx``.

    Cell center i sits at x_i = (i + 1/2) * dx; face i+1/2 (between cells
    i and i+1 mod n) sits at x = (i + 1) * dx. Indices wrap modulo n_cells.
    The domain length is defined as n_cells * dx.
    """

    n_cells: int
    dx: float

    def __post_init__(self) -> None:
        if int(self.n_cells) != self.n_cells or self.n_cells < 3:
            raise ValueError("n_cells must be an integer >= 3 (stencils need two neighbors)")
        if not (np.isfinite(self.dx) and self.dx > 0):
            raise ValueError("dx must be positive and finite")

    @property
    def length(self) -> float:
        return self.n_cells * self.dx

    @property
    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def face_positions(self) -> np.ndarray:
        """Position of face i+1/2 for i = 0 .. n_cells-1."""
        return (np.arange(self.n_cells) + 1.0) * self.dx


def make_grid(n_cells: int, length: float) -> Grid1D:
    """Build a periodic grid with dx = length / n_cells."""
    if not (np.isfinite(length) and length > 0):
        raise ValueError("length must be positive and finite")
    if int(n_cells) != n_cells or n_cells < 3:
        raise ValueError("n_cells must be an integer >= 3")
    return Grid1D(n_cells=int(n_cells), dx=length / n_cells)


@dataclass(frozen=True)
class CellField:
    """Cell-centered values at one time level. Entries must be finite."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, self.grid.n_cells))


@dataclass(frozen=True)
class FaceViscosity:
    """Face viscosity coefficients; entry i holds mu at face i+1/2."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, self.grid.n_cells))


@dataclass(frozen=True)
class SpaceTimeViscosity:
    """Per-step stack of face viscosities: row n is the field applied at step n."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self) -> None:
        out = np.array(self.values, dtype=float, copy=True)
        if out.ndim != 2 or out.shape[1] != self.grid.n_cells:
            raise ValueError(
                f"expected shape (n_steps, {self.grid.n_cells}), got {out.shape}"
            )
        if not np.all(np.isfinite(out)):
            raise ValueError("non-finite entries violate the finite-value contract")
        out.setflags(write=False)
        object.__setattr__(self, "values", out)

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    def at_step(self, n: int) -> FaceViscosity:
        return FaceViscosity(self.values[n], self.grid)


@dataclass(frozen=True)
class HatProfile:
    """Unit hat profile: value ``amplitude`` strictly inside (lo, hi), else 0.

    Edge coordinates sit in the physical domain; values at exactly lo or hi
    are 0 (strict inequalities).
    """

    lo: float = 0.4
    hi: float = 0.6
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and np.isfinite(self.amplitude)):
            raise ValueError("hat parameters must be finite")
        if not (0.0 <= self.lo < self.hi):
            raise ValueError("hat edges must satisfy 0 <= lo < hi")


def exact_solution(profile: HatProfile, grid: Grid1D, c: float, t: float) -> CellField:
    """Analytic translated-hat solution sampled at cell centers.

    The hat translates with speed c on the periodic domain; sampling maps
    x_i - c*t into [0, length) and applies the strict-inequality profile.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    length = grid.length
    if profile.hi > length:
        raise ValueError("hat edges must lie inside the periodic domain")
    frac = np.mod(grid.cell_centers - c * t, length)
    inside = (profile.lo < frac) & (frac < profile.hi)
    return CellField(np.where(inside, profile.amplitude, 0.0), grid)


def sine_solution(
    grid: Grid1D, c: float, t: float, wavenumber: int = 1, amplitude: float = 1.0
) -> CellField:
    """Translating sine wave sampled at cell centers (smooth test profile)."""
    x = grid.cell_centers
    phase = 2.0 * np.pi * wavenumber * (x - c * t) / grid.length
    return CellField(amplitude * np.sin(phase), grid)


def periodic_shift(field: CellField, k: int) -> CellField:
    """Circular shift by k cells: out[i] = in[(i - k) mod n]."""
    return CellField(np.roll(field.values, k), field.grid)


ExactProvider = Callable[[float], CellField]


def hat_provider(profile: HatProfile, grid: Grid1D, c: float) -> ExactProvider:
    """Callable t -> exact translated hat field, for loss evaluation."""

    def provider(t: float) -> CellField:
        return exact_solution(profile, grid, c, t)

    return provider


def sine_provider(
    grid: Grid1D, c: float, wavenumber: int = 1, amplitude: float = 1.0
) -> ExactProvider:
    """Callable t -> exact translated sine field."""

    def provider(t: float) -> CellField:
        return sine_solution(grid, c, t, wavenumber=wavenumber, amplitude=amplitude)

    return provider
