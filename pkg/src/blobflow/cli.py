"""Command-line front end: single runs, convergence sweeps, distance
queries between snapshot files, and the built-in verification suite.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver failure, 4 resolution guard, 5 metric/mass error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time as _time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, io
from .diagnostics import record
from .grid import (
    FromFile,
    Gaussian,
    InitialDatum,
    Parabola,
    RandomPiecewise,
    UniformPlusConstant,
    make_grid,
)
from .harness import ResolutionViolationError, SweepConfig, run_sweep
from .kernel import BoundaryCondition, kernel_matrix
from .scheme import (
    ModelConfig,
    NegativeDensityError,
    NonFiniteStateError,
    TimeControls,
    simulate,
)
from .verify import run_all
from .wasserstein import MassMismatchError, ZeroMassError, w2
from .grid import Density

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_RESOLUTION = 4
EXIT_METRIC = 5


def _parse_datum(spec: str) -> InitialDatum:
    if spec == "gauss":
        return Gaussian()
    if spec == "parabola":
        return Parabola()
    if spec.startswith("uniform+"):
        return UniformPlusConstant(float(spec[len("uniform+"):]))
    if spec.startswith("random:"):
        seed = int(spec[len("random:"):])
        env = os.environ.get("BLOBFLOW_SEED")
        if env is not None:
            seed = int(env)
        return RandomPiecewise(seed)
    if spec.startswith("file:"):
        return FromFile(spec[len("file:"):])
    raise ValueError(f"unknown datum spec {spec!r} "
                     "(expected gauss|parabola|uniform+C|random:SEED|file:PATH)")


def _datum_to_dict(datum: InitialDatum) -> dict:
    if isinstance(datum, Gaussian):
        return {"type": "gauss", "mean": datum.mean, "sigma": datum.sigma}
    if isinstance(datum, Parabola):
        return {"type": "parabola"}
    if isinstance(datum, UniformPlusConstant):
        return {"type": "uniform", "c": datum.c}
    if isinstance(datum, RandomPiecewise):
        return {"type": "random", "seed": int(datum.seed)}
    if isinstance(datum, FromFile):
        return {"type": "file", "path": datum.path}
    raise TypeError(f"unknown datum {datum!r}")


def _datum_from_dict(d: dict) -> InitialDatum:
    kind = d["type"]
    if kind == "gauss":
        return Gaussian(d.get("mean", 0.0), d.get("sigma", 1.0))
    if kind == "parabola":
        return Parabola()
    if kind == "uniform":
        return UniformPlusConstant(d["c"])
    if kind == "random":
        return RandomPiecewise(d["seed"])
    if kind == "file":
        return FromFile(d["path"])
    raise ValueError(f"unknown datum type {kind!r}")


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", nargs=2, type=float, metavar=("R1", "R2"),
                   default=[-10.0, 10.0], help="domain endpoints (default: -10 10)")
    p.add_argument("--cells", type=int, default=1024, help="number of cells (default: 1024)")
    p.add_argument("--datum", default="gauss",
                   help="gauss|parabola|uniform+C|random:SEED|file:PATH (default: gauss)")
    p.add_argument("--bc", choices=["noflux", "periodic"], default="noflux",
                   help="boundary condition (default: noflux)")
    p.add_argument("--drift", action="store_true", help="add the confining drift term d/dx(x u)")
    p.add_argument("--order", type=int, choices=[1, 2], default=2,
                   help="reconstruction order (default: 2)")
    p.add_argument("--theta", type=float, default=1.5,
                   help="minmod limiter parameter in [1,2] (default: 1.5)")
    p.add_argument("--dt", type=float, default=None, help="fixed time step")
    p.add_argument("--cfl", type=float, default=None,
                   help="adaptive CFL number in (0,1); default 0.5 when --dt is absent")
    p.add_argument("--t-end", type=float, default=1.0, help="final time (default: 1.0)")
    p.add_argument("--snapshots", default=None,
                   help="comma-separated snapshot times (default: t-end)")
    p.add_argument("--out", default="blobflow_out", help="output directory (default: blobflow_out)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blobflow",
                                     description="1-D finite-volume porous-medium / blob-method solver")
    parser.add_argument("--version", action="version", version=f"blobflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single PDE run")
    _add_common_run_flags(run)
    run.add_argument("--epsilon", default="local",
                     help="kernel width, or 'local' for the limit model (default: local)")
    run.add_argument("--dump-matrix", action="store_true",
                     help="also write the dense kernel matrix (nonlocal runs, <=64 cells)")
    run.add_argument("--manifest", default=None,
                     help="re-run the configuration stored in a manifest file")

    sweep = sub.add_parser("sweep", help="kernel-width convergence study")
    _add_common_run_flags(sweep)
    sweep.add_argument("--eps-list", default=None, help="comma-separated kernel widths")
    sweep.add_argument("--eps-range", nargs=3, type=float, metavar=("LO", "HI", "COUNT"),
                       default=None, help="log-spaced widths (count >= 3)")
    sweep.add_argument("--fit-window", nargs=2, type=float, metavar=("LO", "HI"),
                       default=None, help="slope-fit window (default: [min eps, max eps])")
    sweep.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: min(#eps, cpu count))")
    sweep.add_argument("--allow-coarse", action="store_true",
                       help="allow dx > min(eps) (under-resolution studies)")

    dist = sub.add_parser("w2", help="Wasserstein distance between two snapshot files")
    dist.add_argument("file_a")
    dist.add_argument("file_b")

    sub.add_parser("verify", help="run the built-in verification suite")
    return parser


def _controls_from_args(args) -> TimeControls:
    if args.dt is not None and args.cfl is not None:
        raise ValueError("pass only one of --dt / --cfl")
    if args.snapshots is None:
        snaps = (args.t_end,)
    else:
        snaps = tuple(sorted(float(s) for s in args.snapshots.split(",") if s.strip()))
    kwargs = {"dt": args.dt} if args.dt is not None else {"cfl": args.cfl if args.cfl is not None else 0.5}
    return TimeControls(t_end=args.t_end, snapshot_times=snaps, **kwargs)


def _model_from_args(args, epsilon: float | None) -> ModelConfig:
    return ModelConfig(
        epsilon=epsilon,
        drift=args.drift,
        bc=BoundaryCondition(args.bc),
        order=args.order,
        theta=args.theta,
    )


def _manifest_common(grid, datum, cfg: ModelConfig, controls: TimeControls) -> dict:
    time_block: dict = {"t_end": controls.t_end, "snapshot_times": list(controls.snapshot_times)}
    if controls.dt is not None:
        time_block["dt"] = controls.dt
    else:
        time_block["cfl"] = controls.cfl
    return {
        "version": __version__,
        "grid": {"r1": grid.r1, "r2": grid.r2, "n_cells": grid.n_cells},
        "datum": _datum_to_dict(datum),
        "model": {
            "epsilon": cfg.epsilon,
            "drift": cfg.drift,
            "bc": cfg.bc.value,
            "order": cfg.order,
            "theta": cfg.theta,
        },
        "time": time_block,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }


def _setup_from_manifest(m: dict):
    grid = make_grid(m["grid"]["r1"], m["grid"]["r2"], m["grid"]["n_cells"])
    datum = _datum_from_dict(m["datum"])
    mdl = m["model"]
    cfg = ModelConfig(
        epsilon=mdl["epsilon"],
        drift=mdl["drift"],
        bc=BoundaryCondition(mdl["bc"]),
        order=mdl["order"],
        theta=mdl["theta"],
    )
    tm = m["time"]
    kwargs = {"dt": tm["dt"]} if "dt" in tm else {"cfl": tm["cfl"]}
    controls = TimeControls(t_end=tm["t_end"], snapshot_times=tuple(tm["snapshot_times"]), **kwargs)
    return grid, datum, cfg, controls


def _cmd_run(args) -> int:
    started = _time.monotonic()
    try:
        if args.manifest is not None:
            grid, datum, cfg, controls = _setup_from_manifest(io.read_manifest(args.manifest))
        else:
            grid = make_grid(args.domain[0], args.domain[1], args.cells)
            datum = _parse_datum(args.datum)
            epsilon = None if args.epsilon == "local" else float(args.epsilon)
            cfg = _model_from_args(args, epsilon)
            controls = _controls_from_args(args)
        if args.dump_matrix:
            if cfg.epsilon is None:
                raise ValueError("--dump-matrix needs a nonlocal run (--epsilon VALUE)")
            if grid.n_cells > 64:
                raise ValueError("--dump-matrix is limited to 64 cells")
    except (ValueError, TypeError, KeyError, FileNotFoundError) as exc:
        print(f"blobflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        snapshots = simulate(datum, grid, cfg, controls)
    except (NegativeDensityError, NonFiniteStateError, RuntimeError) as exc:
        print(f"blobflow: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    for k, (t, rho) in enumerate(snapshots):
        io.write_snapshot(out / f"snapshot_{k:03d}.csv", rho, t)
    io.write_diagnostics(out / "diagnostics.csv", [record(t, rho, cfg) for t, rho in snapshots])
    if args.dump_matrix:
        np.savetxt(out / "kernel_matrix.csv", kernel_matrix(grid, cfg.epsilon, cfg.bc),
                   delimiter=",", fmt="%.17g")
    manifest = _manifest_common(grid, datum, cfg, controls)
    manifest["kind"] = "run"
    manifest["elapsed_seconds"] = _time.monotonic() - started
    io.write_manifest(out / "manifest.json", manifest)
    print(f"wrote {len(snapshots)} snapshots to {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    started = _time.monotonic()
    try:
        grid = make_grid(args.domain[0], args.domain[1], args.cells)
        datum = _parse_datum(args.datum)
        base = _model_from_args(args, epsilon=None)
        controls = _controls_from_args(args)
        if (args.eps_list is None) == (args.eps_range is None):
            raise ValueError("pass exactly one of --eps-list / --eps-range")
        if args.eps_list is not None:
            epsilons = tuple(sorted(float(s) for s in args.eps_list.split(",") if s.strip()))
        else:
            lo, hi, count = args.eps_range
            if count < 3 or count != int(count):
                raise ValueError("--eps-range count must be an integer >= 3")
            epsilons = tuple(np.geomspace(lo, hi, int(count)))
        window = tuple(args.fit_window) if args.fit_window else (epsilons[0], epsilons[-1])
        sweep = SweepConfig(epsilons=epsilons, base=base, grid=grid, datum=datum,
                            controls=controls, fit_window=window)
    except (ValueError, TypeError) as exc:
        print(f"blobflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    jobs = args.jobs if args.jobs is not None else min(len(epsilons), os.cpu_count() or 1)
    try:
        report = run_sweep(sweep, jobs=max(jobs, 1), allow_coarse=args.allow_coarse)
    except ResolutionViolationError as exc:
        print(f"blobflow: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except (NegativeDensityError, NonFiniteStateError, RuntimeError) as exc:
        print(f"blobflow: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_report_csv(out / "report.csv", report.entries)
    io.write_fits_csv(out / "fits.csv", report.slopes)
    io.write_plot_data(out / "plot_data.csv", report.entries)
    manifest = _manifest_common(grid, datum, base, controls)
    manifest["kind"] = "sweep"
    manifest["sweep"] = {"epsilons": list(epsilons), "fit_window": list(window)}
    manifest["elapsed_seconds"] = _time.monotonic() - started
    io.write_manifest(out / "manifest.json", manifest)
    for t, slope, intercept, r_sq in report.slopes:
        print(f"t={t:g}: slope {slope:.3f} intercept {intercept:.3f} r2 {r_sq:.4f}")
    print(f"wrote report to {out}")
    return EXIT_OK


def _cmd_w2(args) -> int:
    try:
        grid_a, values_a, _ = io.read_snapshot(args.file_a)
        grid_b, values_b, _ = io.read_snapshot(args.file_b)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"blobflow: cannot read snapshot: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        dist = w2(Density(grid_a, values_a), Density(grid_b, values_b))
    except (MassMismatchError, ZeroMassError) as exc:
        print(f"blobflow: {exc}", file=sys.stderr)
        return EXIT_METRIC
    print(f"{dist:.17g}")
    return EXIT_OK


def _cmd_verify() -> int:
    results = run_all()
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    if args.command == "w2":
        return _cmd_w2(args)
    if args.command == "verify":
        return _cmd_verify()
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
