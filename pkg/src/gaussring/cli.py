"""Command-line entry point: calibration, scenarios, sweeps, ensembles,
SET studies and engine comparisons with reproducible, manifest-stamped
exports.

Every run writes ``manifest.json`` capturing the resolved configuration,
package version, seed and coupling, so re-running from a manifest
reproduces all numeric outputs.  Figure generation is deliberately out of
scope; all artifacts are data files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

import gaussring
from gaussring.analysis import jsa_fidelity, jta, schmidt
from gaussring.engine import (
    CALIBRATION_TARGET,
    CalibrationError,
    calibrate_coupling,
    resonance_lineshapes,
    run_scenario,
)
from gaussring.gaussdyn import NonlinearCoupling
from gaussring.lingrid import KGrid
from gaussring.model import ModelError, SolverError
from gaussring.montecarlo import EnsembleConfig, run_ensemble, sample_defects
from gaussring.ringscene import (
    ResonanceDefects,
    RingDefectParams,
    build_fwm_scenario,
)
from gaussring.settom import run_set_study, write_comparisons

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CALIBRATION = 4


class ConfigError(ValueError):
    """Raised for malformed CLI configuration."""


def _grid_from_args(args) -> KGrid:
    return KGrid.default(args.grid_points, args.grid_span)


def _load_defects(path: str | None) -> RingDefectParams:
    if path is None:
        return RingDefectParams()
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario config {path}: {exc}") from exc
    try:
        return RingDefectParams.from_dict(raw.get("defects", raw))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed defect parameters in {path}: {exc}") from exc


def _coupling_from_args(args) -> NonlinearCoupling:
    if getattr(args, "lambda_scalar", None) is not None:
        return NonlinearCoupling(args.lambda_scalar)
    path = getattr(args, "calibration", None)
    if path is None:
        raise ConfigError(
            "no coupling given: pass --calibration FILE or --lambda-scalar X"
        )
    try:
        with open(path) as fh:
            cal = json.load(fh)
        return NonlinearCoupling(float(cal["lambda"]))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read calibration {path}: {exc}") from exc


def _write_manifest(out: str, args, extra: dict) -> None:
    manifest = {
        "command": args.command,
        "version": gaussring.__version__,
        "grid": {"n_points": args.grid_points, "span": args.grid_span},
        "engine": getattr(args, "engine", None),
        "seed": getattr(args, "seed", None),
        "csv_format": "full double precision via repr, scientific notation",
    }
    manifest.update(extra)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def _write_rows(path: str, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        w.writerows(rows)


def _export_jsa_jta(out: str, tag: str, jsa, velocities) -> None:
    jsa.export_csv(os.path.join(out, f"jsa_{tag}.csv"))
    jsa.export_manifest(os.path.join(out, f"jsa_{tag}.manifest.json"))
    t = jta(jsa, velocities)
    with open(os.path.join(out, f"jta_{tag}.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_signal", "t_idler", "re", "im"])
        for a, ts in enumerate(t.t_signal):
            for b, ti in enumerate(t.t_idler):
                z = t.values[a, b]
                w.writerow([repr(float(ts)), repr(float(ti)),
                            repr(float(z.real)), repr(float(z.imag))])


def _pair_velocities(run, pair: str) -> tuple[float, float]:
    from gaussring.engine import PAIR_CHANNELS

    d = run.derived_signal
    ch_s, ch_i = PAIR_CHANNELS[pair]
    return (d.V[d.channel_index(ch_s)], d.V[d.channel_index(ch_i)])


def cmd_calibrate(args) -> int:
    grid = _grid_from_args(args)
    coupling = calibrate_coupling(grid, target=args.target,
                                  tolerance=args.tolerance, engine=args.engine)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "calibration.json"), "w") as fh:
        json.dump({"lambda": coupling.lambda_scalar, "target": args.target,
                   "tolerance": args.tolerance, "engine": args.engine,
                   "grid": grid.to_dict()}, fh, indent=2)
    _write_manifest(args.out, args, {"lambda": coupling.lambda_scalar})
    print(f"calibrated lambda = {coupling.lambda_scalar!r}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    grid = _grid_from_args(args)
    coupling = _coupling_from_args(args)
    defects = _load_defects(args.config)
    run = run_scenario(build_fwm_scenario(defects), coupling, grid,
                       engine=args.engine)
    os.makedirs(args.out, exist_ok=True)
    metrics = run.metrics()
    metrics.update({f"{res}_{f}": (None if st is None else getattr(st, f))
                    for res, st in resonance_lineshapes(defects, grid).items()
                    for f in ("center", "linewidth", "min_transmission")})
    _write_rows(os.path.join(args.out, "metrics.csv"),
                list(metrics.keys()), [metrics])
    run.pump.transmitted.export_csv(os.path.join(args.out, "pump_transmitted.csv"))
    run.pump.intracavity.export_csv(os.path.join(args.out, "pump_intracavity.csv"))
    for pair in ("ff", "bb", "fb", "bf"):
        if metrics.get(f"purity_{pair}") is None:
            continue
        _export_jsa_jta(args.out, pair, run.jsa(pair), _pair_velocities(run, pair))
    _write_manifest(args.out, args, {
        "lambda": coupling.lambda_scalar,
        "defects": defects.to_dict(),
        "metrics_columns": list(metrics.keys()),
    })
    return EXIT_OK


def _sweep_defects(parameter: str, value: float) -> RingDefectParams:
    try:
        target, field = parameter.split(".")
    except ValueError as exc:
        raise ConfigError(f"bad sweep parameter {parameter!r}; "
                          "expected e.g. pump.g or all.g") from exc
    resonances = ("pump", "signal", "idler") if target == "all" else (target,)
    valid = {f.name for f in dataclasses.fields(ResonanceDefects)}
    if field not in valid or (target != "all"
                              and target not in ("pump", "signal", "idler")):
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    return RingDefectParams(**{r: ResonanceDefects(**{field: value})
                               for r in resonances})


def _parse_values(spec: str) -> np.ndarray:
    if spec.startswith("lin:"):
        lo, hi, num = spec[4:].split(":")
        return np.linspace(float(lo), float(hi), int(num))
    return np.array([float(v) for v in spec.split(",")])


def cmd_sweep(args) -> int:
    grid = _grid_from_args(args)
    coupling = _coupling_from_args(args)
    values = _parse_values(args.values)
    export_idx = (set(int(i) for i in args.export_points.split(","))
                  if args.export_points else set())
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for i, val in enumerate(values):
        defects = _sweep_defects(args.parameter, val)
        run = run_scenario(build_fwm_scenario(defects), coupling, grid,
                           engine=args.engine)
        m = run.metrics()
        row = {"index": i, "parameter": args.parameter, "value": val}
        row.update(m)
        rows.append(row)
        if i in export_idx:
            for pair in ("ff", "bb", "fb"):
                if m.get(f"purity_{pair}") is None:
                    continue
                _export_jsa_jta(args.out, f"{args.parameter}_{i}_{pair}",
                                run.jsa(pair), _pair_velocities(run, pair))
    _write_rows(os.path.join(args.out, "sweep.csv"), list(rows[0].keys()), rows)
    _write_manifest(args.out, args, {
        "lambda": coupling.lambda_scalar, "parameter": args.parameter,
        "values": [float(v) for v in values],
        "exported_points": sorted(export_idx),
        "sweep_columns": list(rows[0].keys()),
    })
    return EXIT_OK


def cmd_ensemble(args) -> int:
    grid = _grid_from_args(args)
    coupling = _coupling_from_args(args)
    config = EnsembleConfig(n_samples=args.samples, seed=args.seed,
                            engine=args.engine)
    report = run_ensemble(config, coupling, grid, n_workers=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(os.path.join(args.out, "ensemble.csv"))
    report.write_json(os.path.join(args.out, "ensemble.json"))
    _write_manifest(args.out, args, {
        "lambda": coupling.lambda_scalar,
        "ensemble_config": config.to_dict(),
        "histogram_binning": {"suggested_bins": 50, "range": "data-driven"},
    })
    print(json.dumps(report.aggregates(), indent=2))
    return EXIT_OK


def cmd_set_study(args) -> int:
    grid = _grid_from_args(args)
    coupling = _coupling_from_args(args)
    config = EnsembleConfig(n_samples=args.samples, seed=args.seed,
                            engine=args.engine)
    comparisons = run_set_study(config, coupling, grid)
    os.makedirs(args.out, exist_ok=True)
    write_comparisons(comparisons,
                      os.path.join(args.out, "set_study.csv"),
                      os.path.join(args.out, "set_study.json"))
    _write_manifest(args.out, args, {
        "lambda": coupling.lambda_scalar,
        "ensemble_config": config.to_dict(),
    })
    return EXIT_OK


def cmd_perturb_compare(args) -> int:
    grid = _grid_from_args(args)
    coupling = _coupling_from_args(args)
    config = EnsembleConfig(n_samples=args.samples, seed=args.seed,
                            engine="perturbative")
    report = run_ensemble(config, coupling, grid)
    ok = report.successful
    purities = [s.purity_ff for s in ok]
    picks = {"best": ok[int(np.argmax(purities))],
             "worst": ok[int(np.argmin(purities))]}
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for tag, sample in picks.items():
        scenario = build_fwm_scenario(sample.defects)
        full = run_scenario(scenario, coupling, grid, engine="full")
        pert = run_scenario(scenario, coupling, grid, engine="perturbative")
        fid = jsa_fidelity(full.jsa("ff"), pert.jsa("ff"))
        rows.append({
            "case": tag, "sample": sample.index, "fidelity": fid,
            "purity_full": schmidt(full.jsa("ff")).purity,
            "purity_perturbative": schmidt(pert.jsa("ff")).purity,
        })
        print(f"{tag} (sample {sample.index}): fidelity {fid!r}")
    _write_rows(os.path.join(args.out, "perturb_compare.csv"),
                list(rows[0].keys()), rows)
    _write_manifest(args.out, args, {"lambda": coupling.lambda_scalar,
                                     "ensemble_config": config.to_dict()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gaussring",
        description="Coupled-cavity Gaussian photon-pair source simulator",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, engine_default="full"):
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--grid-points", type=int, default=201)
        sp.add_argument("--grid-span", type=float, default=2515.01)
        sp.add_argument("--engine", choices=("full", "perturbative"),
                        default=engine_default)
        sp.add_argument("--seed", type=int, default=0)

    def coupling_opts(sp):
        sp.add_argument("--calibration", help="calibration.json from calibrate")
        sp.add_argument("--lambda-scalar", type=float,
                        help="explicit coupling value (overrides calibration)")

    sp = sub.add_parser("calibrate", help="fit the nonlinear coupling scale")
    common(sp)
    sp.add_argument("--target", type=float, default=CALIBRATION_TARGET)
    sp.add_argument("--tolerance", type=float, default=1e-5)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("scenario", help="single device scenario")
    common(sp)
    coupling_opts(sp)
    sp.add_argument("--config", help="JSON file with defect parameters")
    sp.set_defaults(func=cmd_scenario)

    sp = sub.add_parser("sweep", help="sweep one defect parameter")
    common(sp)
    coupling_opts(sp)
    sp.add_argument("--parameter", required=True,
                    help="e.g. pump.g, idler.g, all.g")
    sp.add_argument("--values", required=True,
                    help="comma list or lin:lo:hi:num")
    sp.add_argument("--export-points", default="",
                    help="comma list of sweep indices to export JSA/JTA for")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("ensemble", help="stochastic defect ensemble")
    common(sp)
    coupling_opts(sp)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("set-study", help="stimulated-tomography bias study")
    common(sp, engine_default="perturbative")
    coupling_opts(sp)
    sp.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_set_study)

    sp = sub.add_parser("perturb-compare",
                        help="first-order vs full fidelity on extreme samples")
    common(sp)
    coupling_opts(sp)
    sp.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_perturb_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (SolverError, ModelError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
