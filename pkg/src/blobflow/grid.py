"""Uniform 1-D cell grids, nonnegative cell-average densities, and the
built-in initial data generators."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np

logger = logging.getLogger("blobflow")


@dataclass(frozen=True)
class Grid:
    """Uniform partition of the interval (r1, r2) into n_cells cells.

    Cell i (0-based) spans [r1 + i*dx, r1 + (i+1)*dx] and is centered at
    r1 + (i + 1/2)*dx; the n_cells + 1 interfaces r1 + i*dx partition
    [r1, r2] exactly.
    """

    r1: float
    r2: float
    n_cells: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.r1) and np.isfinite(self.r2)):
            raise ValueError("grid endpoints must be finite")
        if not self.r2 > self.r1:
            raise ValueError(f"need r2 > r1, got ({self.r1}, {self.r2})")
        if self.n_cells < 2:
            raise ValueError(f"need at least 2 cells, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.r2 - self.r1) / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        x = self.r1 + (np.arange(self.n_cells) + 0.5) * self.dx
        x.setflags(write=False)
        return x

    @cached_property
    def interfaces(self) -> np.ndarray:
        x = self.r1 + np.arange(self.n_cells + 1) * self.dx
        x.setflags(write=False)
        return x

    @property
    def length(self) -> float:
        return self.r2 - self.r1


def make_grid(r1: float, r2: float, n_cells: int) -> Grid:
    """Build a uniform grid; rejects non-finite endpoints, r2 <= r1, n < 2."""
    return Grid(float(r1), float(r2), int(n_cells))


@dataclass(frozen=True)
class Density:
    """Nonnegative cell averages on a Grid (units mass/length).

    Immutable after construction; the value array is marked read-only.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < 0.0):
            raise ValueError(f"density values must be nonnegative (min {v.min():.3e})")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def mass(rho: Density) -> float:
    """Total mass sum(u_i) * dx."""
    return float(np.sum(rho.values) * rho.grid.dx)


# ---------------------------------------------------------------------------
# Initial data


@dataclass(frozen=True)
class Gaussian:
    """Normal profile with the given mean and standard deviation, unit mass."""

    mean: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        z = (x - self.mean) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class Parabola:
    """Compactly supported cap (1 - x^2)_+ , mass 4/3."""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(1.0 - x * x, 0.0)


@dataclass(frozen=True)
class UniformPlusConstant:
    """Constant profile 1/|domain| + c."""

    c: float = 0.0

    def __post_init__(self) -> None:
        if self.c < 0:
            raise ValueError("c must be nonnegative")


@dataclass(frozen=True)
class RandomPiecewise:
    """One independent uniform [0, 1) value per cell.

    Values are drawn from a Philox counter-based generator keyed by `seed`,
    so identical (seed, grid) pairs reproduce byte-identical densities.
    """

    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class FromFile:
    """Exact cell averages read from a snapshot CSV (see blobflow.io)."""

    path: str


InitialDatum = Union[Gaussian, Parabola, UniformPlusConstant, RandomPiecewise, FromFile]


def sample_initial(datum: InitialDatum, grid: Grid) -> Density:
    """Sample an initial datum onto a grid as cell averages.

    Analytic profiles are evaluated at cell midpoints (second-order
    consistent with the scheme); FromFile reads stored averages and requires
    the file grid to match. Negative inputs are clamped to zero with a
    warning.
    """
    if isinstance(datum, (Gaussian, Parabola)):
        values = datum(grid.centers)
    elif isinstance(datum, UniformPlusConstant):
        values = np.full(grid.n_cells, 1.0 / grid.length + datum.c)
    elif isinstance(datum, RandomPiecewise):
        rng = np.random.Generator(np.random.Philox(key=int(datum.seed)))
        values = rng.random(grid.n_cells)
    elif isinstance(datum, FromFile):
        values = _read_file_values(datum.path, grid)
    else:
        raise TypeError(f"unknown initial datum {datum!r}")

    values = np.asarray(values, dtype=np.float64)
    n_neg = int(np.count_nonzero(values < 0.0))
    if n_neg:
        logger.warning("clamped %d negative initial values to 0", n_neg)
        values = np.maximum(values, 0.0)
    return Density(grid, values)


def _read_file_values(path: str, grid: Grid) -> np.ndarray:
    from .io import read_snapshot

    if not Path(path).is_file():
        raise FileNotFoundError(path)
    file_grid, values, _t = read_snapshot(path)
    same = (
        file_grid.n_cells == grid.n_cells
        and abs(file_grid.r1 - grid.r1) <= 1e-12 * max(1.0, abs(grid.r1))
        and abs(file_grid.r2 - grid.r2) <= 1e-12 * max(1.0, abs(grid.r2))
    )
    if not same:
        raise ValueError(
            f"file grid ({file_grid.r1}, {file_grid.r2}, {file_grid.n_cells}) does not "
            f"match requested grid ({grid.r1}, {grid.r2}, {grid.n_cells})"
        )
    return values
