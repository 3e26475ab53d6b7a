"""Command-line front end: ``eigs``, ``roc``, ``sweep`` and ``calibrate``.

Each run writes its CSV/JSON outputs plus ``manifest.json`` into ``--out``.
Passing that manifest back through ``--config`` reproduces the CSVs byte for
byte. Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config_file, parse_list, resolve
from .errors import ConfigError, NumericError
from .montecarlo import (
    bootstrap_auc_se,
    calibrate,
    campaign_seed,
    CALIBRATION,
    default_workers,
    eigen_profile,
    sweep_overlap,
    sweep_snr,
)
from .signal_model import Hypothesis

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

log = logging.getLogger("eigsense")


def fmt(x) -> str:
    return f"{float(x):.12g}"


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: Path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, allow_nan=True)
        fh.write("\n")


def cmd_eigs(cfg: RunConfig, out: Path, workers: int) -> list:
    profile = eigen_profile(cfg.scenario(), cfg.realizations)
    cols = [profile["R", Hypothesis.H0], profile["R", Hypothesis.H1],
            profile["Rprime", Hypothesis.H0], profile["Rprime", Hypothesis.H1]]
    n_rows = max(len(c) for c in cols)
    rows = [[i + 1] + [fmt(c[i]) if i < len(c) else "" for c in cols] for i in range(n_rows)]
    path = out / "eigs.csv"
    write_csv(path, ["index", "mean_eig_R_H0", "mean_eig_R_H1",
                     "mean_eig_Rprime_H0", "mean_eig_Rprime_H1"], rows)
    return [path]


def cmd_roc(cfg: RunConfig, out: Path, workers: int, bootstrap: int = 0) -> list:
    curves = sweep_overlap(cfg.campaign(), workers=workers)
    rows = []
    summary = []
    for curve in curves:
        rows.extend([curve.detector.value, curve.p, fmt(pf), fmt(pd)]
                    for pf, pd in zip(curve.pf, curve.pd))
        entry = {"detector": curve.detector.value, "p": curve.p, "auc": float(fmt(curve.auc))}
        if bootstrap:
            se = bootstrap_auc_se(curve.h0_stats, curve.h1_stats, bootstrap, seed=cfg.seed)
            entry["auc_bootstrap_se"] = float(fmt(se))
        summary.append(entry)
    csv_path, json_path = out / "roc.csv", out / "auc.json"
    write_csv(csv_path, ["detector", "p", "pf", "pd"], rows)
    write_json(json_path, {"snr_db": cfg.snr_db, "signal_variance": cfg.signal_variance,
                           "trials": cfg.trials, "curves": summary})
    return [csv_path, json_path]


def cmd_sweep(cfg: RunConfig, out: Path, workers: int) -> list:
    results = sweep_snr(cfg.campaign(with_snr_grid=True), workers=workers)
    records = [(r.detector.value, r.p, snr, pd, r.gamma, r.trials)
               for r in results for snr, pd in zip(r.snr_db, r.pd)]
    if cfg.axis == "p":
        records.sort(key=lambda rec: (cfg.detectors.index(rec[0]), cfg.snr_db.index(rec[2]),
                                      cfg.p.index(rec[1])))
    rows = [[d, p, fmt(snr), fmt(pd), fmt(g), t] for d, p, snr, pd, g, t in records]
    path = out / "sweep.csv"
    write_csv(path, ["detector", "p", "snr_db", "pd", "gamma", "trials"], rows)
    return [path]


def cmd_calibrate(cfg: RunConfig, out: Path, workers: int) -> list:
    gammas = calibrate(cfg.campaign(), workers=workers)
    seed = campaign_seed(cfg.seed, CALIBRATION)
    table = [{"detector": det.value, "p": p, "M": cfg.sensors, "N": cfg.samples,
              "alpha": cfg.pfa, "gamma": float(fmt(g)), "trials": cfg.trials,
              "master_seed": cfg.seed, "calibration_seed": seed}
             for (det, p), g in gammas.items()]
    path = out / "thresholds.json"
    write_json(path, {"stacking": cfg.stacking, "field": cfg.field, "thresholds": table})
    return [path]


COMMANDS = {"eigs": cmd_eigs, "roc": cmd_roc, "sweep": cmd_sweep, "calibrate": cmd_calibrate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML/JSON config file or a run manifest")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per hypothesis")
    common.add_argument("--detector", dest="detectors",
                        help="rlrt, glrt, mme, eme, a comma list of them, or all")
    common.add_argument("--p", help="overlap numbers, e.g. 1,2 or 1:7")
    common.add_argument("--snr-db", dest="snr_db", help="SNR values in dB, e.g. -13 or -20:0:1")
    common.add_argument("--pfa", type=float, help="target false-alarm probability")
    common.add_argument("--sensors", type=int, help="number of sensors M")
    common.add_argument("--samples", type=int, help="samples per sensor N")
    common.add_argument("--field", choices=["real", "complex"])
    common.add_argument("--stacking", choices=["horizontal", "vertical"],
                        help="subgroup concatenation axis of the combinatorial matrix")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: CPU count)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="eigsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    eigs = sub.add_parser("eigs", parents=[common], help="mean eigenvalue profiles of R and R'")
    eigs.add_argument("--realizations", type=int)
    roc = sub.add_parser("roc", parents=[common], help="ROC curves per detector and p")
    roc.add_argument("--bootstrap", type=int, default=0,
                     help="bootstrap replicates for the AUC standard error (0: skip)")
    sweep = sub.add_parser("sweep", parents=[common], help="Pd versus SNR at a fixed Pf")
    sweep.add_argument("--axis", choices=["snr", "p"])
    sub.add_parser("calibrate", parents=[common], help="thresholds for a target Pf")
    return parser


def _overrides(args) -> dict:
    ov = {}
    for key in ("seed", "trials", "pfa", "sensors", "samples", "field", "stacking"):
        ov[key] = getattr(args, key)
    ov["realizations"] = getattr(args, "realizations", None)
    ov["axis"] = getattr(args, "axis", None)
    if args.p is not None:
        ov["p"] = parse_list(args.p, int)
    if args.snr_db is not None:
        ov["snr_db"] = parse_list(args.snr_db, float)
    if args.detectors is not None:
        ov["detectors"] = [d.strip() for d in args.detectors.split(",") if d.strip()]
    return ov


def run(args) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    cfg = resolve(args.command, file_values, _overrides(args))
    workers = default_workers() if args.workers is None else args.workers
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    extra = {"bootstrap": args.bootstrap} if args.command == "roc" else {}
    paths = COMMANDS[args.command](cfg, out, workers, **extra)
    manifest = {
        "tool": "eigsense",
        "version": __version__,
        "command": args.command,
        "config": cfg.to_dict(),
        "master_seed": cfg.seed,
        "workers": workers,
        "duration_s": round(time.perf_counter() - t0, 3),
        "outputs": [p.name for p in paths],
    }
    write_json(out / "manifest.json", manifest)
    log.info("wrote %s", ", ".join(str(p) for p in paths + [out / "manifest.json"]))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())
