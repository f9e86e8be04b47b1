"""Command-line front end: ``lfamg {verify-compat,compare,track,sweep}``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 on configuration errors.  Reports go to ``--out-json``/``--out-csv``, then
to the paths in the config's ``outputs`` section, then to
``$LFAMG_OUTPUT_DIR/<command>.{json,csv}`` (current directory if unset).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import CSV_COLUMNS, csv_row, run_sweep, run_track, run_verify_compat
from .linear import SizeGuardError

OUTPUT_DIR_ENV = "LFAMG_OUTPUT_DIR"
EXIT_OK, EXIT_MATH, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("lfamg")


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def results_json(results) -> str:
    """Deterministic serialization of the result payload (no metadata)."""
    return json.dumps(_clean(results), sort_keys=True, indent=2, ensure_ascii=False)


def write_json(path: Path, command: str, results) -> None:
    metadata = {
        "command": command,
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    payload = {"metadata": metadata, "results": _clean(results)}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(rows))


def _output_path(flag, configured, command: str, ext: str) -> Path:
    if flag:
        return Path(flag)
    if configured:
        return Path(configured)
    return Path(os.environ.get(OUTPUT_DIR_ENV) or ".") / f"{command}.{ext}"


def _with_seed(cfg: ExperimentConfig, seed) -> ExperimentConfig:
    if seed is None:
        return cfg
    return dataclasses.replace(cfg.with_override("run.seed", seed), sweep=cfg.sweep)


def cmd_verify_compat(cfg: ExperimentConfig, args) -> int:
    code = EXIT_OK
    results = []
    for point in cfg.expand():
        reports = run_verify_compat(point)
        failed = [r for r in reports if not r.verdict]
        for r in reports:
            log.info("%-40s %s", r.name, "compatible" if r.verdict else "NOT compatible")
        if failed:
            first = failed[0]
            print(f"verify-compat: {first.name} is not LFA-compatible "
                  f"(operator defect {first.operator_defect:.3e}, invariance defect {first.invariance_defect:.3e}, "
                  f"basis vector {first.worst_basis_vector})", file=sys.stderr)
            code = EXIT_MATH
        results.append({"config": _plain_config(point), "pairs": [r.to_dict() for r in reports],
                        "passed": not failed})
    write_json(_output_path(args.out_json, cfg.outputs.json, "verify-compat", "json"), "verify-compat", results)
    return code


def cmd_track(cfg: ExperimentConfig, args) -> int:
    code = EXIT_OK
    results = []
    for point in cfg.expand():
        report = run_track(point)
        print(f"track: {report.iterator} max defect {report.max_defect:.3e} over {report.steps} steps"
              + ("" if report.asserted else " (mismatched initial data, not asserted)"))
        if not report.passed:
            code = EXIT_MATH
        results.append({"config": _plain_config(point), **report.to_dict()})
    write_json(_output_path(args.out_json, cfg.outputs.json, "track", "json"), "track", results)
    return code


def cmd_compare(cfg: ExperimentConfig, args, command: str = "compare") -> int:
    sweep = run_sweep(cfg, workers=max(1, args.workers))
    rows, results, code = [], [], EXIT_OK
    for point, report in zip(sweep.configs, sweep.reports):
        rows.append(csv_row(point, report))
        results.append(report.to_dict())
        for check in report.extra["checks"]:
            if not check["passed"]:
                code = EXIT_MATH
                print(f"{command}: check '{check['name']}' failed ({check['value']:.3e} > {check['bound']:.1e}) "
                      f"for d={point.problem.d} n={point.problem.n} bc={point.problem.bc}", file=sys.stderr)
        log.info("rho_lfa=%.6f rho_dense_bc=%s rho_observed=%.6f", report.rho_lfa, report.rho_dense,
                 report.rho_observed)
    write_json(_output_path(args.out_json, cfg.outputs.json, command, "json"), command, results)
    write_csv(_output_path(args.out_csv, cfg.outputs.csv, command, "csv"), rows)
    return code


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    if not cfg.sweep:
        raise ConfigError("sweep needs a 'sweep' section mapping dotted keys to value lists")
    return cmd_compare(cfg, args, command="sweep")


def _plain_config(cfg: ExperimentConfig) -> dict:
    out = cfg.to_dict()
    out.pop("sweep")
    return out


COMMANDS = {
    "verify-compat": cmd_verify_compat,
    "compare": cmd_compare,
    "track": cmd_track,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfamg", description="Multigrid and LFA-compatibility experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML experiment file (defaults apply when omitted)")
        p.add_argument("--out-json", help="JSON report path")
        p.add_argument("--out-csv", help="CSV report path (compare and sweep)")
        p.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _with_seed(load_config(args.config), args.seed)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, SizeGuardError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
