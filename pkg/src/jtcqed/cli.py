"""Command-line front end.

Subcommands::

    jtcqed run <config.ini>          run a single configured task
    jtcqed preset <name> [--out DIR] run a bundled preset
    jtcqed presets                   list bundled presets

Every run writes its CSV plus a manifest echoing the resolved configuration,
the library version, wall-clock time and per-task provenance notes. CSV
bodies are byte-identical across repeated runs of the same configuration;
manifests differ only in their timing fields. ``JTCQED_WORKERS`` sets the
worker count for grid sweeps.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import functools
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import (
    eigen_row,
    g2,
    imbalance,
    power_spectrum,
    spectrum_peaks,
)
from .config import ConfigError, RunConfig, config_from_mapping, load_config
from .dynamics import build_liouvillian, steady_state
from .errors import JTCQEDError
from .hilbert import DensityMatrix, SpaceSpec, basis_ket
from .model import build_dimensionless_hamiltonian
from .presets import PRESETS, preset_table

USAGE_EXIT = 2
NUMERICAL_EXIT = 3

EIGEN_COUNT = 5  # fixed by the eigenscan CSV schema: delta,E1..E5


def _workers() -> int:
    raw = os.environ.get("JTCQED_WORKERS", "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigError(f"JTCQED_WORKERS must be an integer, got {raw!r}") from exc
    if count < 1:
        raise ConfigError("JTCQED_WORKERS must be >= 1")
    return count


def _fmt(value: float, precision: int) -> str:
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.{precision - 1}e}"


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _write_csv(path: str, header: list[str], rows, precision: int):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(float(v), precision) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_manifest(csv_path: str, cfg: RunConfig, notes: dict, elapsed: float):
    manifest = {
        "config": cfg.resolved(),
        "library_version": __version__,
        "wall_clock_seconds": elapsed,
        "notes": notes,
        "output": os.path.basename(csv_path),
    }
    root, _ = os.path.splitext(csv_path)
    _write_atomic(root + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _space(cfg: RunConfig) -> SpaceSpec:
    return SpaceSpec(fock_dims=cfg.fock_dims, qubit_count=1)


def _initial_state(cfg: RunConfig, space: SpaceSpec) -> DensityMatrix:
    parts = [p.strip() for p in cfg.initial_state.split(",")]
    if len(parts) != 3:
        raise ConfigError("initial_state must be 'n1,n2,q' with q one of e/g")
    try:
        n1, n2 = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad initial_state occupations: {exc}") from exc
    if parts[2] not in ("e", "g"):
        raise ConfigError("initial_state qubit level must be 'e' or 'g'")
    ket = basis_ket(space, [n1, n2], [parts[2]])
    return DensityMatrix.from_pure(space, ket)


def _liouvillian(cfg: RunConfig, space: SpaceSpec):
    h = build_dimensionless_hamiltonian(
        space, cfg.k, cfg.delta,
        include_quadratic=cfg.include_quadratic,
        j_override=cfg.j_override,
    )
    return build_liouvillian(h, cfg.dissipation)


def _run_eigenscan(cfg: RunConfig) -> tuple[list[str], list, dict]:
    space = _space(cfg)
    deltas = np.sort(np.asarray(cfg.delta_grid, dtype=float))
    point = functools.partial(
        eigen_row,
        cfg.k,
        count=EIGEN_COUNT,
        space=space,
        include_quadratic=cfg.include_quadratic,
        j_override=cfg.j_override,
    )
    workers = _workers()
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            energies = list(pool.map(point, deltas))
    else:
        energies = [point(d) for d in deltas]
    rows = [[d, *e] for d, e in zip(deltas, energies)]
    header = ["delta"] + [f"E{i + 1}" for i in range(EIGEN_COUNT)]
    return header, rows, {"workers": workers, "grid_points": int(deltas.size)}


def _run_spectrum(cfg: RunConfig) -> tuple[list[str], list, dict]:
    space = _space(cfg)
    liouvillian = _liouvillian(cfg, space)
    rho_ss = steady_state(liouvillian)
    series = power_spectrum(
        liouvillian,
        rho_ss,
        mode="privileged",
        tau_max=cfg.tau_max,
        n_samples=cfg.n_samples,
        ordering=cfg.correlation_ordering,
    )
    rows = list(zip(series.omegas, series.values))
    peaks = spectrum_peaks(series, min_relative_prominence=0.01)
    notes = {
        "warnings": list(series.warnings),
        "steady_state_purity": rho_ss.purity(),
        "frequency_resolution": series.metadata["frequency_resolution"],
        "peaks": [{"omega": w, "power": p} for w, p in peaks],
    }
    return ["omega", "power"], rows, notes


def _run_g2(cfg: RunConfig) -> tuple[list[str], list, dict]:
    # The coherence pipelines are transient: the reference time is the
    # configured initial state (t* = 0), so g2(0) reflects its statistics
    # (a one-photon start reads exactly zero). The settle-search reference
    # remains available through the library API for stationary analyses.
    space = _space(cfg)
    liouvillian = _liouvillian(cfg, space)
    rho0 = _initial_state(cfg, space)
    taus = np.asarray(cfg.times, dtype=float)
    series_r = g2(
        liouvillian, rho0, target="resonator", taus=taus,
        normalization=cfg.g2_normalization, reference=(0.0, rho0),
    )
    series_q = g2(
        liouvillian, rho0, target="qubit", taus=taus,
        normalization=cfg.g2_normalization, reference=(0.0, rho0),
    )
    rows = list(zip(taus, series_r.values, series_q.values))
    notes = {
        "t_star": 0.0,
        "reference_policy": "initial_state",
        "normalization": cfg.g2_normalization,
        "reference_occupation_resonator": series_r.metadata["reference_occupation"],
        "reference_occupation_qubit": series_q.metadata["reference_occupation"],
    }
    return ["tau", "g2_resonator", "g2_qubit"], rows, notes


def _run_imbalance(cfg: RunConfig) -> tuple[list[str], list, dict]:
    space = _space(cfg)
    liouvillian = _liouvillian(cfg, space)
    rho0 = _initial_state(cfg, space)
    times = np.asarray(cfg.times, dtype=float)
    series = imbalance(liouvillian, rho0, times, rtol=cfg.rtol, atol=cfg.atol)
    rows = list(zip(series.times, series.n1, series.n2, series.z))
    tail = series.z[int(0.8 * series.z.size):]
    tail = tail[np.isfinite(tail)]
    notes = {
        "trace_drift": series.metadata["trace_drift"],
        "long_window_fraction": 0.2,
        "z_long_mean": float(tail.mean()) if tail.size else None,
        "z_long_min": float(tail.min()) if tail.size else None,
        "z_long_max": float(tail.max()) if tail.size else None,
    }
    return ["t", "n1", "n2", "z"], rows, notes


_RUNNERS = {
    "eigenscan": _run_eigenscan,
    "spectrum": _run_spectrum,
    "g2": _run_g2,
    "imbalance": _run_imbalance,
}


def execute(cfg: RunConfig, out_dir: str | None = None) -> str:
    """Run one configured task; returns the CSV path."""
    start = time.perf_counter()
    header, rows, notes = _RUNNERS[cfg.task](cfg)
    csv_path = cfg.output_path
    if out_dir is not None and not os.path.isabs(csv_path):
        csv_path = os.path.join(out_dir, csv_path)
    _write_csv(csv_path, header, rows, cfg.precision)
    _write_manifest(csv_path, cfg, notes, time.perf_counter() - start)
    return csv_path


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    path = execute(cfg)
    print(path)
    return 0


def _cmd_preset(args) -> int:
    preset = PRESETS.get(args.name)
    if preset is None:
        raise ConfigError(
            f"unknown preset {args.name!r}; run 'jtcqed presets' for the inventory"
        )
    out_dir = args.out or "."
    for _, mapping in preset.runs:
        cfg = config_from_mapping(mapping)
        path = execute(cfg, out_dir=out_dir)
        print(path)
    return 0


def _cmd_presets(_args) -> int:
    print(preset_table())
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jtcqed",
        description="Two-resonator Jahn-Teller circuit-QED simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a task from a config file")
    run.add_argument("config", help="path to an INI-style run configuration")
    run.set_defaults(handler=_cmd_run)

    preset = sub.add_parser("preset", help="run a bundled preset")
    preset.add_argument("name", help="preset name (see 'jtcqed presets')")
    preset.add_argument("--out", help="output directory (default: current)", default=None)
    preset.set_defaults(handler=_cmd_preset)

    listing = sub.add_parser("presets", help="list bundled presets")
    listing.set_defaults(handler=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return USAGE_EXIT
    except (JTCQEDError, ValueError, np.linalg.LinAlgError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report), file=sys.stderr)
        return NUMERICAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
