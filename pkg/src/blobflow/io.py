"""File formats: snapshot CSVs, diagnostics CSVs, sweep reports, manifests.

All floats are written with 17 significant digits so files round-trip
exactly through float64.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .diagnostics import DiagnosticsRecord
from .grid import Density, Grid, make_grid


def _fmt(x: float) -> str:
    return f"{x:.17g}"


_HEADER_RE = re.compile(
    r"^#\s*r1=(?P<r1>\S+)\s+r2=(?P<r2>\S+)\s+n=(?P<n>\d+)\s+t=(?P<t>\S+)\s*$"
)


def write_snapshot(path: str | Path, rho: Density, t: float) -> None:
    """Write `# r1=.. r2=.. n=.. t=..` then one `x,u` row per cell."""
    g = rho.grid
    lines = [f"# r1={_fmt(g.r1)} r2={_fmt(g.r2)} n={g.n_cells} t={_fmt(t)}"]
    for x, u in zip(g.centers, rho.values):
        lines.append(f"{_fmt(x)},{_fmt(u)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path: str | Path) -> tuple[Grid, np.ndarray, float]:
    """Parse a snapshot file back into (grid, values, time)."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty snapshot file")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ValueError(f"{path}: malformed snapshot header: {lines[0]!r}")
    try:
        r1, r2, t = float(m["r1"]), float(m["r2"]), float(m["t"])
        n = int(m["n"])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed snapshot header values") from exc
    grid = make_grid(r1, r2, n)
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: expected {n} rows, found {len(lines) - 1}")
    values = np.empty(n)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed row {i}: {ln!r}")
        x, u = float(parts[0]), float(parts[1])
        if abs(x - grid.centers[i]) > 1e-9 * max(1.0, abs(x)):
            raise ValueError(f"{path}: row {i} center {x} does not match grid")
        values[i] = u
    return grid, values, t


def write_diagnostics(path: str | Path, records: Iterable[DiagnosticsRecord]) -> None:
    lines = ["time,mass,linf,E,Eeps,entropy,m2,gap"]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.time,
                    r.mass,
                    r.linf,
                    r.energy_local,
                    r.energy_nonlocal,
                    r.entropy,
                    r.second_moment,
                    r.energy_gap,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_report_csv(path: str | Path, entries: Iterable[tuple[float, float, float]]) -> None:
    lines = ["time,epsilon,w2"]
    lines += [f"{_fmt(t)},{_fmt(e)},{_fmt(w)}" for t, e, w in entries]
    Path(path).write_text("\n".join(lines) + "\n")


def write_fits_csv(path: str | Path, slopes: Iterable[tuple[float, float, float, float]]) -> None:
    lines = ["time,slope,intercept,r2"]
    lines += [f"{_fmt(t)},{_fmt(s)},{_fmt(c)},{_fmt(r)}" for t, s, c, r in slopes]
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_data(path: str | Path, entries: Iterable[tuple[float, float, float]]) -> None:
    """log10-log10 points per time, for external plotting tools."""
    lines = ["time,log10_epsilon,log10_w2"]
    for t, e, w in entries:
        if w > 0:
            lines.append(f"{_fmt(t)},{_fmt(np.log10(e))},{_fmt(np.log10(w))}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
