"""Batch command-line front end: ``triwave scan|fit|verify``.

Exit codes: 0 success, 1 verification failure, 2 configuration/schema
error, 3 scan failure budget exceeded, 4 fit evaluation budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, MaxEvaluationsExceeded
from .fit import FitDataset, FitProblem, fit_rates
from .model import TWO_PI
from .io import (config_sha256, load_fit_config, load_scan_config,
                 read_map_csv, template_from_meta, write_map_csv,
                 write_map_json, write_map_pgm)
from .scan import run_scan
from .verify import run_suites
from .version import __version__


def _build_parser():
    p = argparse.ArgumentParser(
        prog="triwave",
        description="Coherent three-wave mixing on a driven cyclic "
                    "three-level emitter: scans, fits, self-verification.")
    p.add_argument("--version", action="version", version=f"triwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("scan", help="compute an emission map from a config file")
    ps.add_argument("--config", required=True, help="scan config (JSON)")
    ps.add_argument("--out", default=".", help="output directory")
    ps.add_argument("--jobs", type=int, default=1, help="worker threads")
    ps.add_argument("--verbatim-hamiltonian", action="store_true",
                    help="use the published operator forms instead of the "
                         "corrected rotating frame")
    ps.add_argument("--log-heatmap", action="store_true",
                    help="log-normalize the PGM heatmap")

    pf = sub.add_parser("fit", help="fit rates/gains to measured map CSVs")
    pf.add_argument("data", nargs="*", help="map CSV files (scan schema)")
    pf.add_argument("--config", required=True, help="fit config (JSON)")
    pf.add_argument("--out", default=".", help="output directory")
    pf.add_argument("--jobs", type=int, default=1)
    pf.add_argument("--verbatim-hamiltonian", action="store_true")

    pv = sub.add_parser("verify", help="run the oracle self-verification suites")
    pv.add_argument("--quick", action="store_true",
                    help="reduced grids/samples, finishes in under a minute")
    pv.add_argument("--jobs", type=int, default=1)
    pv.add_argument("--mutate", choices=("none", "dissipator-sign"),
                    default="none",
                    help="inject a deliberate model defect (negative control)")
    return p


def cmd_scan(args) -> int:
    try:
        cfg = load_scan_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    emap = run_scan(cfg["template"], cfg["grid"], cfg["rates"],
                    verbatim=args.verbatim_hamiltonian, jobs=args.jobs)
    emap.meta["config_sha256"] = config_sha256(cfg["raw"])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = out / cfg["basename"]
    write_map_csv(base.with_suffix(".csv"), emap)
    write_map_json(base.with_suffix(".json"), emap)
    write_map_pgm(base.with_suffix(".pgm"), emap, log_scale=args.log_heatmap)
    print(f"wrote {base}.csv, {base}.json, {base}.pgm "
          f"({emap.n_missing()} missing cells)")

    n_cells = emap.values.size
    budget = float(cfg["raw"].get("failure_budget_fraction", 0.001))
    if emap.n_missing() > budget * n_cells:
        print(f"failure budget exceeded: {emap.n_missing()}/{n_cells} cells "
              f"failed (budget {budget:.1%})", file=sys.stderr)
        return 3
    return 0


def cmd_fit(args) -> int:
    try:
        cfg = load_fit_config(args.config)
        if not args.data:
            raise ConfigError("no data files given (pass map CSVs as arguments)")
        datasets = []
        for fname in args.data:
            grid, values, meta = read_map_csv(fname)
            override = cfg["overrides"].get(Path(fname).name, {})
            merged = dict(meta)
            merged.update({k: v for k, v in override.items() if k != "file"})
            template = template_from_meta(merged, fname)
            datasets.append(FitDataset(template=template, grid=grid,
                                       values=values, name=Path(fname).name))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    problem = FitProblem(datasets=datasets, verbatim=args.verbatim_hamiltonian,
                         jobs=args.jobs)
    opt = cfg["optimizer"]
    code = 0
    try:
        result = fit_rates(problem, cfg["init_rates"],
                           max_evaluations=opt["max_evaluations"],
                           restarts=opt["restarts"], seed=opt["seed"])
    except MaxEvaluationsExceeded as exc:
        result = exc.result
        code = 4
        print(f"warning: {exc}", file=sys.stderr)

    report = {
        "format": "triwave-fit",
        "version": __version__,
        "config_sha256": config_sha256(cfg["raw"]),
        "rates_MHz": result.rates_mhz(),
        "gains": result.gains,
        "residual": result.residual,
        "n_evaluations": result.n_evaluations,
        "n_iterations": result.n_iterations,
        "converged": result.converged,
        "budget_exhausted": not result.converged,
        "confidence_halfwidths_log": result.confidence,
        "datasets": [
            {
                "file": ds.name,
                "scheme": ds.template.scheme.value,
                "omega_first_MHz": ds.template.omega_first / TWO_PI,
                "omega_second_MHz": ds.template.omega_second / TWO_PI,
                "n_cells": int(ds.values.size),
                "n_missing": int((~np.isfinite(ds.values)).sum()),
            }
            for ds in datasets
        ],
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "fit_report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {report_path}")
    for name, mhz in result.rates_mhz().items():
        print(f"  {name}/2pi = {mhz:.4f} MHz")
    for label, gain in result.gains.items():
        print(f"  G{label} = {gain:.6g}")
    return code


def cmd_verify(args) -> int:
    results = run_suites(quick=args.quick, jobs=args.jobs, mutate=args.mutate)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name:22s} [{res.seconds:6.2f}s] {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} suites passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "scan":
        return cmd_scan(args)
    if args.command == "fit":
        return cmd_fit(args)
    return cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
