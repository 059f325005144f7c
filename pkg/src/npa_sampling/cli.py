"""Command-line front end.

Data goes to stdout or ``--out``; diagnostics go to stderr.  Exit codes:
0 ok, 2 usage or configuration error, 3 i/o error, 4 solver failure,
5 experiment failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib.resources import files
from typing import Optional, Sequence

from npa_sampling.algebra import Scenario, generate_basis, monomial_str, parse_level
from npa_sampling.experiments import (
    InfeasibleSpecError,
    example1_pair,
    format_report_table,
    parse_experiment_file,
    row_status,
    run_trials,
)
from npa_sampling.partition import EqualityPartition
from npa_sampling.sampler import (
    DEFAULT_CONVENTION,
    TOL_EQ,
    TOL_ZERO,
    CountConvention,
    algebraic_partition,
    compare_partitions,
    count_unique,
    sample_partition,
)
from npa_sampling.sdp import BellFunctional, assemble_sdp, export_sdpa, solve
from npa_sampling.sdp.solver import OPTIMAL
from npa_sampling.tables import TABLE1

SCHEMA = "npa-constraints/1"
EXIT_USAGE, EXIT_IO, EXIT_SOLVER, EXIT_EXPERIMENT = 2, 3, 4, 5

log = logging.getLogger("npa_sampling")

ALIASES = {"chsh": (2, 2, 2, 2), "3322": (3, 3, 2, 2)}
_SHORTHAND = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*:\s*(\d+)\s*,\s*(\d+)\s*$")


class ConfigError(Exception):
    pass


def resolve_scenario(text: str) -> Scenario:
    """``chsh``, ``3322``, ``X,Y:A,B`` or a path to a scenario file."""
    if text.lower() in ALIASES:
        return Scenario.bipartite(*ALIASES[text.lower()])
    m = _SHORTHAND.match(text)
    if m:
        return Scenario.bipartite(*(int(g) for g in m.groups()))
    if not os.path.exists(text):
        raise ConfigError(f"unknown scenario {text!r}: not an alias, X,Y:A,B or a file")
    try:
        return Scenario.load(text)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed scenario file {text}: {exc}") from exc


def _bundled(name: str) -> str:
    return str(files("npa_sampling") / "data" / name)


def _resolve_functional(text: Optional[str], scenario: Scenario) -> BellFunctional:
    if text is None or text.lower() == "chsh":
        return BellFunctional.chsh(scenario)
    if text.lower() == "zero":
        return BellFunctional(scenario, {})
    return BellFunctional.load(scenario, text)


def _level(args, default: str):
    return parse_level(args.level if args.level is not None else default)


def constraint_document(scenario: Scenario, level, basis, partition: EqualityPartition,
                        convention: CountConvention, meta: dict) -> dict:
    labels = partition.labels
    n = labels.shape[0]
    doc = {
        "schema": SCHEMA,
        "scenario": scenario.to_dict(),
        "level": str(level),
        **meta,
        "basis": [monomial_str(m) for m in basis],
        "num_classes": partition.num_classes,
        "unit_class": partition.unit_class,
        "zero_class": partition.zero_class,
        "conjugate": partition.conjugate.tolist(),
        "cells": [[i, j, int(labels[i, j])] for i in range(n) for j in range(n)],
        "convention": convention.value,
        "count": count_unique(partition, convention),
    }
    if partition.monomials is not None:
        doc["class_monomials"] = [m if isinstance(m, str) else monomial_str(m)
                                  for m in partition.monomials]
    return doc


def _format_text(doc: dict) -> str:
    lines = [f"# {doc['schema']}",
             f"scenario {json.dumps(doc['scenario'], separators=(',', ':'))}",
             f"level {doc['level']}"]
    for key in ("rank", "samples", "seed", "tol_eq", "tol_zero"):
        if key in doc:
            lines.append(f"{key} {doc[key]}")
    lines += [f"convention {doc['convention']}", f"count {doc['count']}",
              f"classes {doc['num_classes']}", f"unit {doc['unit_class']}",
              f"zero {doc['zero_class'] if doc['zero_class'] is not None else '-'}"]
    lines += [f"basis {k} {m}" for k, m in enumerate(doc["basis"])]
    lines += [f"conj {c} {d}" for c, d in enumerate(doc["conjugate"]) if c <= d]
    lines += [f"cell {i} {j} {c}" for i, j, c in doc["cells"]]
    return "\n".join(lines) + "\n"


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)


def _emit_document(doc: dict, args) -> None:
    if args.out is None:
        return
    text = (json.dumps(doc, indent=1) + "\n" if args.format == "structured"
            else _format_text(doc))
    _write(text, args.out)


def _convention(args) -> CountConvention:
    return CountConvention(args.convention) if args.convention else DEFAULT_CONVENTION


def _sampled(args, scenario, level, basis) -> EqualityPartition:
    return sample_partition(scenario, level, args.rank, args.samples, args.seed,
                            args.tol_eq, args.tol_zero, basis=basis)


def cmd_sample_constraints(args) -> int:
    scenario = resolve_scenario(args.scenario)
    level = _level(args, "3")
    basis = generate_basis(scenario, level)
    part = _sampled(args, scenario, level, basis)
    conv = _convention(args)
    meta = {"rank": args.rank, "samples": args.samples, "seed": args.seed,
            "tol_eq": args.tol_eq, "tol_zero": args.tol_zero}
    doc = constraint_document(scenario, level, basis, part, conv, meta)
    _emit_document(doc, args)
    print(f"classes={doc['count']}")
    return 0


def cmd_algebraic(args) -> int:
    scenario = resolve_scenario(args.scenario)
    level = _level(args, "3")
    basis = generate_basis(scenario, level)
    part = algebraic_partition(basis)
    doc = constraint_document(scenario, level, basis, part, _convention(args), {})
    _emit_document(doc, args)
    print(f"classes={doc['count']}")
    return 0


def cmd_compare(args) -> int:
    scenario = resolve_scenario(args.scenario)
    level = _level(args, "3")
    basis = generate_basis(scenario, level)
    rep = compare_partitions(_sampled(args, scenario, level, basis),
                             algebraic_partition(basis), _convention(args))
    if args.format == "structured":
        text = json.dumps({"schema": "npa-compare/1", "scenario": scenario.to_dict(),
                           "level": str(level), "rank": args.rank, "seed": args.seed,
                           "classes_sampled": rep.classes_sampled,
                           "classes_algebraic": rep.classes_algebraic,
                           "merges": [list(m) for m in rep.merges],
                           "splits": list(rep.splits)}, indent=1) + "\n"
    else:
        text = (f"classes_sampled={rep.classes_sampled}\n"
                f"classes_algebraic={rep.classes_algebraic}\n"
                f"merges={len(rep.merges)}\nsplits={len(rep.splits)}\n")
    _write(text, args.out)
    return 0


def _table1_row(job):
    row, seed, samples, tol_eq, tol_zero = job
    scenario = Scenario.bipartite(*row[:4])
    basis = generate_basis(scenario, parse_level("3"))
    alg = count_unique(algebraic_partition(basis))
    r2, r1 = (count_unique(sample_partition(scenario, "3", rank, samples, seed,
                                            tol_eq, tol_zero, basis=basis))
              for rank in (2, 1))
    return alg, r2, r1


def cmd_table1(args) -> int:
    jobs = [(row, args.seed, args.samples, args.tol_eq, args.tol_zero) for row in TABLE1]
    start = time.perf_counter()
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_table1_row, jobs))
    else:
        results = [_table1_row(j) for j in jobs]
    lines = [f"{'X':>2} {'Y':>2} {'A':>2} {'B':>2} {'algebraic':>10} "
             f"{'rank-2':>8} {'rank-1':>8} {'published':>9}"]
    mismatch = False
    for row, (alg, r2, r1) in zip(TABLE1, results):
        mismatch |= alg != r2
        flag = "" if alg == r2 else "  MISMATCH"
        lines.append(f"{row[0]:>2} {row[1]:>2} {row[2]:>2} {row[3]:>2} {alg:>10} "
                     f"{r2:>8} {r1:>8} {row[5]:>9}{flag}")
    _write("\n".join(lines) + "\n", args.out)
    log.info("table1 finished in %.1f s", time.perf_counter() - start)
    if mismatch:
        print("algebraic and rank-2 counts differ", file=sys.stderr)
        return 1
    return 0


def _problem(args):
    scenario = resolve_scenario(args.scenario)
    level = _level(args, "1+AB")
    basis = generate_basis(scenario, level)
    functional = _resolve_functional(args.functional, scenario)
    part = (_sampled(args, scenario, level, basis) if args.sampled
            else algebraic_partition(basis))
    return assemble_sdp(part, basis, functional)


def cmd_solve(args) -> int:
    problem = _problem(args)
    if args.export_sdpa:
        export_sdpa(problem, args.export_sdpa)
    rep = solve(problem)
    _write(f"value={rep.value:.10f}\nstatus={rep.status}\n"
           f"gap={rep.gap:.3e}\niterations={rep.iterations}\n", args.out)
    if rep.status != OPTIMAL:
        print(f"solver did not converge: {rep.status}", file=sys.stderr)
        return EXIT_SOLVER
    return 0


def cmd_export_sdpa(args) -> int:
    problem = _problem(args)
    export_sdpa(problem, args.out if args.out not in (None, "-") else sys.stdout)
    return 0


def cmd_experiment(args) -> int:
    path = args.spec
    if not os.path.exists(path) and os.path.exists(_bundled(path)):
        path = _bundled(path)
    with open(path) as fh:
        text = fh.read()
    try:
        rows = parse_experiment_file(text)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if args.runs is not None:
        rows = [type(r)(type(r.spec)(**{**r.spec.__dict__, "runs": args.runs}),
                        r.control, r.line) for r in rows]
    done, reports, failed = [], [], False
    for row in rows:
        try:
            rep = run_trials(row.spec, example1_pair() if row.control else None,
                             workers=args.workers)
        except InfeasibleSpecError as exc:
            print(f"line {row.line}: {exc}", file=sys.stderr)
            failed = True
            continue
        done.append(row)
        reports.append(rep)
        failed |= row_status(row, rep) == "FAIL"
    _write(format_report_table(done, reports) + "\n", args.out)
    return EXIT_EXPERIMENT if failed else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="chsh",
                        help="chsh, 3322, X,Y:A,B or a scenario file (default chsh)")
    common.add_argument("--level", help="NPA level such as 3 or 1+AB")
    common.add_argument("--rank", type=int, default=2, help="projector rank (default 2)")
    common.add_argument("--samples", type=int, default=2, help="realizations to intersect")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-eq", type=float, default=TOL_EQ)
    common.add_argument("--tol-zero", type=float, default=TOL_ZERO)
    common.add_argument("--out", help="output file (default: no document, or stdout)")
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--convention", choices=[c.value for c in CountConvention])
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="npa-sampling",
                                     description="Sampling-based NPA moment-matrix reduction.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sample-constraints", parents=[common],
                   help="detect equalities from sampled realizations"
                   ).set_defaults(func=cmd_sample_constraints)
    sub.add_parser("algebraic", parents=[common],
                   help="equalities from monomial algebra").set_defaults(func=cmd_algebraic)
    sub.add_parser("compare", parents=[common],
                   help="sampled against algebraic partition").set_defaults(func=cmd_compare)
    sub.add_parser("table1", parents=[common],
                   help="reproduce the level-3 count table").set_defaults(func=cmd_table1)
    for name, func in (("solve", cmd_solve), ("export-sdpa", cmd_export_sdpa)):
        p = sub.add_parser(name, parents=[common], help=f"{name} the NPA relaxation")
        p.add_argument("--functional", help="chsh, zero or a functional file (1-based labels)")
        p.add_argument("--sampled", action="store_true",
                       help="use the sampled partition instead of the algebraic one")
        if name == "solve":
            p.add_argument("--export-sdpa", metavar="PATH", help="also write an SDPA file")
        p.set_defaults(func=func)
    p = sub.add_parser("experiment", parents=[common], help="run block-pair trials")
    p.add_argument("spec", help="experiment spec file or a bundled name such as table2.spec")
    p.add_argument("--runs", type=int, help="override the runs of every row")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s: %(message)s")
    if args.rank < 1 or args.samples < 1 or args.workers < 1:
        parser.error("--rank, --samples and --workers must be positive")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
