"""Command line entry point: simulate, sweep, fixtures, validate."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import os
import sys

from . import __version__
from .config import load_document, scenario_config, sweep_spec
from .errors import BudgetExceededError, ConfigError
from .sim import SWEEP_VARIABLES, run_sweep, run_trials

log = logging.getLogger("thzirs")

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_BUDGET = 0, 2, 3, 4

TRIAL_COLUMNS = ("trial", "scheme", "sum_rate_bps_per_hz", "candidate_evaluations",
                 "proposals", "phase1_rounds", "phase2_rounds")
SWEEP_COLUMNS = ("sweep_variable", "sweep_value", "scheme", "mean_sum_rate_bps_per_hz",
                 "stderr", "trials", "mean_candidate_evaluations", "mean_proposals")


def fmt(v) -> str:
    # repr-free and locale independent; 17 significant digits round-trip a double
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])


def _outputs(doc, out_dir):
    o = doc.get("output", {})
    d = out_dir or o.get("directory", ".")
    os.makedirs(d, exist_ok=True)
    return (d, os.path.join(d, o.get("trials_csv", "trials.csv")),
            os.path.join(d, o.get("sweep_csv", "sweep.csv")),
            os.path.join(d, o.get("manifest", "manifest.json")))


def write_manifest(path, doc, seed, outputs, command):
    manifest = {
        "tool": "thzirs",
        "version": __version__,
        "command": command,
        "seed": seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": doc,
        "outputs": outputs,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(args) -> int:
    doc = load_document(args.config)
    cfg = scenario_config(doc).replace(budget=args.budget)
    _, trials_csv, _, manifest = _outputs(doc, args.out)
    rows = [row for t in run_trials(cfg) for row in t.rows()]
    write_csv(trials_csv, TRIAL_COLUMNS, rows)
    write_manifest(manifest, doc, cfg.seed, [trials_csv], "simulate")
    log.info("wrote %d rows to %s", len(rows), trials_csv)
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = load_document(args.config)
    if args.variable is not None:
        if args.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"unknown sweep variable {args.variable!r}; "
                              f"supported: {', '.join(SWEEP_VARIABLES)}", "sweep.variable")
        if not args.values:
            raise ConfigError("--values is required with --variable",
                              "sweep.values")
        doc = dict(doc, sweep={"variable": args.variable, "values": args.values})
    base = scenario_config(doc).replace(budget=args.budget)
    spec = sweep_spec(doc, base)
    _, _, sweep_csv, manifest = _outputs(doc, args.out)
    rows = [r.__dict__ for r in run_sweep(spec)]
    write_csv(sweep_csv, SWEEP_COLUMNS, rows)
    write_manifest(manifest, doc, base.seed, [sweep_csv], "sweep")
    log.info("wrote %d rows to %s", len(rows), sweep_csv)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    from .fixtures import run_fixtures

    ok = True
    for check in run_fixtures():
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}")
        for line in check.diff:
            print(f"    {line}")
        ok &= check.passed
    return EXIT_OK if ok else EXIT_CHECK


def cmd_validate(args) -> int:
    from .validate import replay, run_validation

    if args.replay:
        with open(args.replay, encoding="utf-8") as fh:
            cex = json.load(fh)
        msgs = replay(cex)
        for m in msgs:
            print(f"FAIL {cex['check']}: {m}")
        if not msgs:
            print(f"PASS {cex['check']}: counterexample no longer fails")
        return EXIT_CHECK if msgs else EXIT_OK
    base = scenario_config(load_document(args.config)) if args.config else None
    rep = run_validation(args.budget, args.seed, base, args.inject_fault)
    for fam, n in rep.counts.items():
        print(f"{fam}: {n} checks")
    print(f"total: {rep.total} checks, {len(rep.counterexamples)} failures")
    if rep.counterexamples:
        os.makedirs(args.out, exist_ok=True)
        for i, cex in enumerate(rep.counterexamples):
            path = os.path.join(args.out, f"counterexample_{i}.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(cex, fh, indent=2, sort_keys=True)
                fh.write("\n")
            print(f"FAIL {cex['check']}: {'; '.join(cex['messages'])} -> {path}")
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thzirs", description="Multi-IRS THz association simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run trials and write per-trial rows")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (overrides output.directory)")
    s.add_argument("--budget", type=int, default=10**7, help="ES/PES enumeration budget")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="sweep one variable and write aggregate rows")
    s.add_argument("config")
    s.add_argument("--variable", help=f"one of {', '.join(SWEEP_VARIABLES)}")
    s.add_argument("--values", type=float, nargs="+")
    s.add_argument("--out")
    s.add_argument("--budget", type=int, default=10**7)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fixtures", help="check the embedded case-study tables")
    s.set_defaults(func=cmd_fixtures)

    s = sub.add_parser("validate", help="randomized invariant checks")
    s.add_argument("config", nargs="?")
    s.add_argument("--budget", type=int, default=20, help="instances per check family")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=".", help="where counterexamples are written")
    s.add_argument("--replay", help="re-run a counterexample file")
    s.add_argument("--inject-fault", choices=["reversed-tie"], help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
