"""Convergence-rate studies: paired local/nonlocal runs over a list of
kernel widths, exact Wasserstein distances per snapshot, and log-log slope
fits over a chosen window."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .grid import Density, Grid, InitialDatum, sample_initial
from .scheme import ModelConfig, TimeControls, simulate_density
from .wasserstein import w2

logger = logging.getLogger("blobflow")


class ResolutionViolationError(ValueError):
    """Grid spacing exceeds the smallest kernel width in the sweep."""

    def __init__(self, dx: float, min_eps: float):
        self.dx = dx
        self.min_eps = min_eps
        super().__init__(
            f"dx={dx:.6g} exceeds the smallest kernel width {min_eps:.6g}; "
            "refine the grid or pass allow_coarse=True"
        )


class InsufficientPointsError(ValueError):
    pass


class NonPositiveDistanceError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    """One convergence study: a base model run at every kernel width in
    `epsilons` against the same local reference, all from one shared
    sampled initial density."""

    epsilons: tuple[float, ...]
    base: ModelConfig
    grid: Grid
    datum: InitialDatum
    controls: TimeControls
    fit_window: tuple[float, float]

    def __post_init__(self) -> None:
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise ValueError("epsilons must be non-empty")
        if any(e <= 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if list(eps) != sorted(eps) or len(set(eps)) != len(eps):
            raise ValueError("epsilons must be strictly increasing")
        lo, hi = self.fit_window
        if not (lo <= hi and lo >= eps[0] - 1e-15 and hi <= eps[-1] + 1e-15):
            raise ValueError(f"fit window {self.fit_window} not inside [{eps[0]}, {eps[-1]}]")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "fit_window", (float(lo), float(hi)))


@dataclass(frozen=True)
class ConvergenceReport:
    """(time, epsilon, w2) triples plus per-time fitted log-log slopes
    (time, slope, intercept, r_squared)."""

    entries: tuple[tuple[float, float, float], ...]
    slopes: tuple[tuple[float, float, float, float], ...]


def fit_slope(
    points: list[tuple[float, float]],
    window: tuple[float, float],
) -> tuple[float, float, float]:
    """Least-squares slope of log(w2) against log(eps) inside the window.

    Returns (slope, intercept, r_squared); the intercept is the empirical
    stand-in for the rate constant.  Natural logarithms.
    """
    lo, hi = window
    selected = [(e, w) for e, w in points if lo <= e <= hi]
    if len(selected) < 3:
        raise InsufficientPointsError(
            f"need at least 3 points in window [{lo}, {hi}], found {len(selected)}"
        )
    if any(w <= 0 for _, w in selected):
        raise NonPositiveDistanceError("zero distance inside the fit window")
    x = np.log([e for e, _ in selected])
    y = np.log([w for _, w in selected])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_sq = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r_sq


def _run_case(args) -> tuple[float | None, list[tuple[float, np.ndarray]]]:
    values, grid, cfg, controls = args
    snaps = simulate_density(Density(grid, values), cfg, controls)
    return cfg.epsilon, [(t, d.values) for t, d in snaps]


def run_sweep(
    sweep: SweepConfig,
    jobs: int = 1,
    allow_coarse: bool = False,
) -> ConvergenceReport:
    """Run the local reference and every kernel-width case, then reduce to a
    deterministic report ordered by (time, epsilon).

    The grid must resolve the smallest width (dx <= min eps) unless
    allow_coarse is set.  Cases are independent; jobs > 1 runs them in a
    process pool without affecting the result.
    """
    dx = sweep.grid.dx
    if not allow_coarse and dx > min(sweep.epsilons):
        raise ResolutionViolationError(dx, min(sweep.epsilons))

    rho0 = sample_initial(sweep.datum, sweep.grid)
    local_cfg = replace(sweep.base, epsilon=None)
    cases = [(rho0.values, sweep.grid, local_cfg, sweep.controls)] + [
        (rho0.values, sweep.grid, replace(sweep.base, epsilon=e), sweep.controls)
        for e in sweep.epsilons
    ]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_case, cases))
    else:
        results = [_run_case(c) for c in cases]

    by_eps = {eps: snaps for eps, snaps in results}
    local_snaps = by_eps.pop(None)
    local_at = {t: Density(sweep.grid, v) for t, v in local_snaps}

    entries: list[tuple[float, float, float]] = []
    for eps in sweep.epsilons:
        for t, values in by_eps[eps]:
            dist = w2(Density(sweep.grid, values), local_at[t])
            entries.append((t, eps, dist))
    entries.sort(key=lambda e: (e[0], e[1]))

    slopes: list[tuple[float, float, float, float]] = []
    for t in sorted({t for t, _, _ in entries}):
        points = [(e, v) for tt, e, v in entries if tt == t]
        _warn_non_monotone(t, points, sweep.fit_window)
        try:
            slope, intercept, r_sq = fit_slope(points, sweep.fit_window)
        except (InsufficientPointsError, NonPositiveDistanceError):
            continue  # typically t = 0, where every distance is exactly 0
        slopes.append((t, slope, intercept, r_sq))

    return ConvergenceReport(entries=tuple(entries), slopes=tuple(slopes))


def _warn_non_monotone(t: float, points, window: tuple[float, float]) -> None:
    inside = [(e, w) for e, w in points if window[0] <= e <= window[1]]
    for (e0, w0), (e1, w1) in zip(inside, inside[1:]):
        if w1 < w0 * (1.0 - 0.05):
            logger.warning(
                "w2 not non-decreasing in eps at t=%g: w2(%g)=%g > w2(%g)=%g",
                t, e0, w0, e1, w1,
            )


def detect_boundary_contact(
    snapshots: list[tuple[float, Density]],
    threshold: float = 1e-6,
) -> float | None:
    """First snapshot time at which either boundary cell exceeds the
    threshold; None if the support never reaches the boundary."""
    for t, rho in snapshots:
        if max(rho.values[0], rho.values[-1]) > threshold:
            return t
    return None
