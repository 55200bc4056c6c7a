"""Command-line front end: figure-data pipelines and validation suites.

Every command is deterministic given (config, seed) and writes diff-able
CSV/JSON data files rather than rendered images. Exit codes: 0 success,
2 configuration error, 3 validation failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import presets
from .detection import fringe, interferometer_clicks
from .estimation import CalibrationModel, UnidentifiableError, estimate_phase
from .fock import TruncationError, required_n_max, simulate_fock
from .gaussian import InterferometerConfig, InvalidStateError
from .metrology import (
    ACCOUNTINGS,
    BracketError,
    fisher_sweep,
    interferometer_model,
    max_fisher,
    noon_fisher_per_photon,
    photons_through_sample,
    threshold_noon,
    threshold_tm,
    threshold_tm_numeric,
)
from .simkit import TrackingScenario, run_tracking, sensitivity_report

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

_CONFIG_KEYS = (
    "r1",
    "r2",
    "eta_h",
    "eta_v",
    "eta_internal",
    "overlap",
    "phase_offset",
    "snl_per_photon",
)
_SCENARIO_KEYS = (
    "phase_schedule",
    "window",
    "repetition_rate",
    "repeats",
    "seed",
    "branch",
    "branch_margin",
)


class ConfigError(Exception):
    pass


class ValidationFailure(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_table(out_dir: Path, name: str, fmt: str, columns, rows) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    else:
        path = out_dir / f"{name}.json"
        payload = {"columns": list(columns), "rows": [[v for v in row] for row in rows]}
        path.write_text(json.dumps(payload, indent=1, sort_keys=True))
    return path


def _load_config_file(path: str):
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    unknown = set(data) - {"interferometer", "scenario"}
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    cfg = None
    scenario = None
    if "interferometer" in data:
        section = data["interferometer"]
        bad = set(section) - set(_CONFIG_KEYS)
        if bad:
            raise ConfigError(f"unknown interferometer keys: {sorted(bad)}")
        try:
            cfg = InterferometerConfig(**section)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid interferometer section: {exc}") from exc
    if "scenario" in data:
        section = dict(data["scenario"])
        bad = set(section) - set(_SCENARIO_KEYS)
        if bad:
            raise ConfigError(f"unknown scenario keys: {sorted(bad)}")
        if "phase_schedule" in section:
            section["phase_schedule"] = tuple(tuple(item) for item in section["phase_schedule"])
        if "branch" in section and section["branch"] is not None:
            section["branch"] = tuple(section["branch"])
        try:
            scenario = TrackingScenario(**section)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario section: {exc}") from exc
    return cfg, scenario


def _resolve_config(args, default: InterferometerConfig | None = None) -> InterferometerConfig:
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise ConfigError("give either --preset or --config, not both")
    if getattr(args, "config", None):
        cfg, _ = _load_config_file(args.config)
        if cfg is None:
            raise ConfigError("config file has no 'interferometer' section")
        return cfg
    if default is not None:
        return default
    return InterferometerConfig(r1=0.59, r2=0.59)


def _phi_grid(args) -> np.ndarray:
    if args.phi_steps < 2:
        raise ConfigError(f"need at least 2 grid points, got {args.phi_steps}")
    if not 0.0 <= args.phi_min < args.phi_max <= math.pi + 1e-12:
        raise ConfigError("phase grid must satisfy 0 <= phi-min < phi-max <= pi")
    return np.linspace(args.phi_min, args.phi_max, args.phi_steps)


def cmd_sweep(args) -> int:
    if args.preset and args.preset != "fig3":
        raise ConfigError(f"sweep supports preset 'fig3', got {args.preset!r}")
    cfg = _resolve_config(args, presets.fringe_config() if args.preset else None)
    grid = _phi_grid(args)
    probs = fringe(cfg, grid)
    rows = [[p, *probs[i]] for i, p in enumerate(grid)]
    path = _write_table(Path(args.out), "sweep", args.format, ("phi", "p00", "p01", "p10", "p11"), rows)
    p11 = probs[:, 3]
    vis = (p11.max() - p11.min()) / (p11.max() + p11.min())
    print(f"wrote {path}")
    print(f"p11 fringe visibility: {vis:.4f}")
    return EXIT_OK


def _fisher_preset_rows(args):
    if args.preset == "fig1b":
        table = presets.fig1b_table()
        return ("n_bar", "dphi_tm", "dphi_noon", "dphi_snl"), [list(r) for r in table], "fisher_fig1b"
    if args.preset == "fig3c":
        rows = []
        for r in np.round(np.arange(0.11, 0.5901, 0.04), 4):
            cfg = InterferometerConfig(r1=float(r), r2=float(r))
            n_through = photons_through_sample(cfg, args.accounting)
            _, fmax = max_fisher(interferometer_model(cfg), h=args.h)
            rows.append([float(r), n_through, fmax, fmax / n_through])
        return (
            ("r", "mean_photons_through_sample", "max_fisher_per_trial", "max_fisher_per_photon"),
            rows,
            "fisher_fig3c",
        )
    raise ConfigError(f"fisher supports presets 'fig3', 'fig3c', 'fig1b', got {args.preset!r}")


def cmd_fisher(args) -> int:
    if args.preset in ("fig1b", "fig3c"):
        columns, rows, name = _fisher_preset_rows(args)
        path = _write_table(Path(args.out), name, args.format, columns, rows)
        print(f"wrote {path}")
        return EXIT_OK
    if args.preset and args.preset != "fig3":
        raise ConfigError(f"fisher supports presets 'fig3', 'fig3c', 'fig1b', got {args.preset!r}")
    cfg = _resolve_config(args, presets.fringe_config() if args.preset else None)
    grid = _phi_grid(args)
    reports = fisher_sweep(cfg, grid, h=args.h, accounting=args.accounting)
    rows = [
        [
            rep.phi,
            rep.fisher_per_trial,
            rep.mean_photons_through_sample,
            rep.fisher_per_photon,
            rep.snl_per_photon,
            rep.enhancement_db,
        ]
        for rep in reports
    ]
    columns = (
        "phi",
        "fisher_per_trial",
        "mean_photons_through_sample",
        "fisher_per_photon",
        "snl_per_photon",
        "enhancement_db",
    )
    path = _write_table(Path(args.out), "fisher", args.format, columns, rows)
    phi_star, f_star = max_fisher(interferometer_model(cfg), h=args.h)
    n_through = photons_through_sample(cfg, args.accounting)
    print(f"wrote {path}")
    print(f"max Fisher per photon: {f_star / n_through:.4f} rad^-2 at phi = {phi_star:.4f}")
    print(f"SNL baseline: {cfg.snl_per_photon:.4f} rad^-2 per photon")
    print(f"ideal 5-photon NOON baseline: {noon_fisher_per_photon(5, 1.0):.4f} rad^-2 per photon")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    if args.preset and args.preset != "fig1c":
        raise ConfigError(f"thresholds supports preset 'fig1c', got {args.preset!r}")
    base = InterferometerConfig(r1=0.0, r2=0.0)
    tm_rows = []
    for n_bar in args.nbar:
        closed = threshold_tm(n_bar)
        numeric = threshold_tm_numeric(base, n_bar) if not args.skip_numeric else math.nan
        tm_rows.append([n_bar, closed, numeric])
    out = Path(args.out)
    path_tm = _write_table(out, "thresholds_tm", args.format, ("n_bar", "eta_tm", "eta_tm_numeric"), tm_rows)
    noon_rows = [
        [n, threshold_noon(n), noon_fisher_per_photon(n, 1.0)] for n in range(1, args.noon_max + 1)
    ]
    path_noon = _write_table(
        out, "thresholds_noon", args.format, ("n_photons", "eta_noon", "fisher_per_photon_ideal"), noon_rows
    )
    print(f"wrote {path_tm}")
    print(f"wrote {path_noon}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cal = CalibrationModel.from_json(args.calibration)
    branch = (args.branch_lo, args.branch_hi)
    rows = []
    with open(args.counts, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"window_index", "n00", "n01", "n10", "n11"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ConfigError(f"counts file must have columns {sorted(needed)}")
        for record in reader:
            counts = [int(record[k]) for k in ("n00", "n01", "n10", "n11")]
            try:
                est = estimate_phase(counts, cal, branch)
                rows.append(
                    [
                        int(record["window_index"]),
                        est.phi_est,
                        est.objective_value,
                        int(est.low_information),
                    ]
                )
            except UnidentifiableError:
                rows.append([int(record["window_index"]), math.nan, math.nan, 1])
    path = _write_table(
        Path(args.out),
        "estimates",
        args.format,
        ("window_index", "phi_est", "objective_value", "low_information"),
        rows,
    )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_track(args) -> int:
    if args.preset and args.preset != "fig4":
        raise ConfigError(f"track supports preset 'fig4', got {args.preset!r}")
    if args.preset:
        cfg = presets.tracking_config()
        scenario = presets.fig4_scenario(seed=0 if args.seed is None else args.seed)
    else:
        if not args.config:
            raise ConfigError("track needs --preset fig4 or --config with a scenario section")
        cfg, scenario = _load_config_file(args.config)
        if cfg is None or scenario is None:
            raise ConfigError("track config must contain interferometer and scenario sections")
        if args.seed is not None and args.seed != scenario.seed:
            scenario = replace(scenario, seed=args.seed)
    cal = CalibrationModel.from_config(cfg)
    run = run_tracking(scenario, cfg, cal)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run.to_csv(out / "tracking.csv")
    run.to_json(out / "tracking_summary.json")
    cal.to_json(out / "calibration.json")
    report = sensitivity_report(run, accounting=args.accounting)
    (out / "sensitivity.json").write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True))
    print(f"wrote {out / 'tracking.csv'}")
    print(f"trials per window (assumed repetition rate): {run.trials_per_window}")
    best = report.best()
    if best is not None:
        print(
            f"best phase {best.phi_set:.4f}: dphi = {best.dphi:.3e} rad, "
            f"{best.enhancement_db:.2f} dB beyond SNL"
        )
        print(
            "reference values for comparison (rate-dependent, informational): "
            "3.56 dB, dphi = 0.002 rad"
        )
    return EXIT_OK


def cmd_validate(args) -> int:
    grid = np.linspace(0.0, math.pi, args.phi_steps)
    cases = [(0.3, 1.0), (0.3, 0.75), (0.59, 1.0), (0.59, 0.75)]
    rows = []
    worst = 0.0
    for r, eta in cases:
        cfg = InterferometerConfig(r1=r, r2=r, eta_h=eta, eta_v=eta)
        n_max = required_n_max(2 * r, args.budget)
        dev = 0.0
        for phi in grid:
            gauss = interferometer_clicks(cfg, phi).as_array()
            fock = simulate_fock(cfg, phi, n_max, budget=args.budget).as_array()
            dev = max(dev, float(np.abs(gauss - fock).max()))
        rows.append([r, eta, n_max, dev])
        worst = max(worst, dev)
        print(f"r={r} eta={eta} n_max={n_max}: max |delta p| = {dev:.3e}")
    _write_table(Path(args.out), "validate", args.format, ("r", "eta", "n_max", "max_delta_p"), rows)
    print(f"overall max |delta p| = {worst:.3e} (tolerance {args.tol:.1e})")
    if worst > args.tol:
        raise ValidationFailure(f"oracle deviation {worst:.3e} exceeds tolerance {args.tol:.1e}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, grid: bool = False) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--preset", help="bundled figure preset")
    parser.add_argument("--out", default="squint_out", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    if grid:
        parser.add_argument("--phi-min", type=float, default=0.0)
        parser.add_argument("--phi-max", type=float, default=math.pi)
        parser.add_argument("--phi-steps", type=int, default=361)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squint", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="tabulate the four click fringes over phase")
    _add_common(p, grid=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fisher", help="Fisher information per trial and per photon")
    _add_common(p, grid=True)
    p.add_argument("--accounting", choices=ACCOUNTINGS, default="single-pass")
    p.add_argument("--h", type=float, default=1e-4, help="central-difference step")
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("thresholds", help="loss thresholds of this scheme vs NOON states")
    _add_common(p)
    p.add_argument("--nbar", type=float, nargs="+", default=[0.1, 0.5, 0.78, 1.0, 2.0, 3.0])
    p.add_argument("--noon-max", type=int, default=20)
    p.add_argument("--skip-numeric", action="store_true", help="omit the bisection column")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("estimate", help="re-estimate phases from a counts file")
    _add_common(p)
    p.add_argument("--counts", required=True, help="CSV with window counts (tracking schema)")
    p.add_argument("--calibration", required=True, help="calibration JSON")
    p.add_argument("--branch-lo", type=float, required=True)
    p.add_argument("--branch-hi", type=float, required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("track", help="Monte Carlo phase-tracking replay")
    _add_common(p)
    p.add_argument("--accounting", choices=ACCOUNTINGS, default="single-pass")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("validate", help="Gaussian vs Fock oracle equivalence suite")
    _add_common(p)
    p.add_argument("--phi-steps", type=int, default=73)
    p.add_argument("--budget", type=float, default=1e-8, help="oracle truncation budget")
    p.add_argument("--tol", type=float, default=1e-6, help="max allowed |delta p|")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (
        TruncationError,
        BracketError,
        InvalidStateError,
        UnidentifiableError,
        ValueError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
