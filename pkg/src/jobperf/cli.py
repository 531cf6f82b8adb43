"""``jobperf`` command line interface.

Exit status: 0 on success, 1 for usage errors (bad flags, missing files),
2 for data errors, 3 when every requested model family was numerically
not applicable.

Experiment subcommands write ``<name>.json`` and ``<name>.txt`` per report
into ``--out`` and print the combined result to stdout in ``--format``.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import report
from .dataset import SplitSpec, load_profiles, write_profiles
from .errors import DataError, JobPerfError, UnknownCoreCount, UnknownQuery
from .features import CoreFeature
from .pipeline import (
    ALL_FAMILIES,
    DEFAULT_C_VALUES,
    DEFAULT_EPS_FRACTIONS,
    DEFAULT_SEED,
    OLS,
    SVR_LINEAR,
    ModelFamily,
    SearchGrid,
    fit_weights,
    run_core_holdout,
    run_cross_query,
    run_validation,
)
from .synth import CORE_LEVELS, SCENARIOS, SynthConfig, generate

log = logging.getLogger("jobperf")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOT_APPLICABLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(convert):
    def parse(text):
        try:
            return tuple(convert(t.strip()) for t in text.split(",") if t.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _shared(p: argparse.ArgumentParser, default_families: str) -> None:
    p.add_argument("--input", nargs="+", required=True, type=Path, help="profile CSV file(s)")
    p.add_argument("--out", type=Path, help="directory for report files")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--core-feature", type=_csv_list(CoreFeature.parse), default=(CoreFeature.InverseCores,),
                   help="comma list of plain, inverse, map-over-cores, reduce-over-cores")
    p.add_argument("--families", type=_csv_list(ModelFamily.parse), default=default_families,
                   help="comma list of " + ", ".join(f.name for f in ALL_FAMILIES))
    p.add_argument("--grid-c", type=_csv_list(float), default=DEFAULT_C_VALUES)
    p.add_argument("--grid-eps", type=_csv_list(float), default=DEFAULT_EPS_FRACTIONS,
                   help="epsilon values as fractions of the mean training duration")
    p.add_argument("--format", choices=("json", "table", "csv"), default="table")
    p.add_argument("--no-standardize", action="store_true",
                   help="use raw features for every family")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jobperf", description="Predict job durations from execution profiles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic profile CSV")
    s.add_argument("--scenario", required=True, choices=SCENARIOS)
    s.add_argument("--out", type=Path, help="CSV path; a <out>.meta.json sidecar is written next to it")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--queries", type=int, default=3)
    s.add_argument("--runs", type=int, default=20)
    s.add_argument("--cores", type=_csv_list(int), default=CORE_LEVELS)
    s.add_argument("--noise", type=float, help="relative noise amplitude (scenario default if omitted)")
    spikes = s.add_mutually_exclusive_group()
    spikes.add_argument("--spikes", dest="spikes", action="store_true", default=None)
    spikes.add_argument("--no-spikes", dest="spikes", action="store_false")
    s.add_argument("--spike-factor", type=float, default=10.0)

    all_names = ",".join(f.name for f in ALL_FAMILIES)
    v = sub.add_parser("validate", help="60/20/20 validation per query")
    _shared(v, all_names)

    h = sub.add_parser("core-holdout", help="hold out one core count at a time")
    _shared(h, all_names)
    h.add_argument("--cores", type=_csv_list(int), help="core counts to hold out (default: all)")

    x = sub.add_parser("cross-query", help="train on some queries, test on another")
    _shared(x, all_names)
    x.add_argument("--train-queries", type=_csv_list(str), required=True)
    x.add_argument("--test-query", required=True)

    w = sub.add_parser("weights", help="feature weights of the linear models")
    _shared(w, f"{OLS.name},{SVR_LINEAR.name}")
    w.add_argument("--query", type=_csv_list(str), help="queries to report (default: all)")

    for p in (v, h):
        p.add_argument("--query", type=_csv_list(str), help="restrict to these queries")
    return parser


# --------------------------------------------------------------------------- #


def _grid(args) -> SearchGrid:
    if isinstance(args.families, str):
        args.families = _csv_list(ModelFamily.parse)(args.families)
    try:
        return SearchGrid(c_values=tuple(args.grid_c), epsilon_values=tuple(args.grid_eps),
                          families=tuple(args.families), core_features=tuple(args.core_feature))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _standardize(args):
    return False if args.no_standardize else None


def _load(paths: Sequence[Path]) -> list:
    for path in paths:
        if not path.is_file():
            raise UsageError(f"file not found: {path}")
    profiles = []
    for path in paths:
        try:
            profiles.extend(load_profiles(path))
        except DataError as exc:
            raise _with_path(exc, path)
    return profiles


def _with_path(exc: DataError, path: Path) -> DataError:
    exc.args = (f"{path}: {exc}",)
    return exc


def _by_query(profiles) -> dict:
    out: dict = {}
    for p in profiles:
        out.setdefault(p.query_id, []).append(p)
    return out


def _select(groups: dict, wanted) -> list:
    if not wanted:
        return sorted(groups)
    unknown = [q for q in wanted if q not in groups]
    if unknown:
        raise UnknownQuery(f"unknown query id(s) {unknown}; known: {sorted(groups)}")
    return list(dict.fromkeys(wanted))


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def _emit(args, docs: list[tuple[str, dict]], experiment: str, title: str) -> int:
    """Write each (file stem, doc) pair and print the combined result."""
    if args.out is not None:
        for stem, doc in docs:
            report.atomic_write(args.out / f"{stem}.json", report.to_json(doc))
            report.atomic_write(args.out / f"{stem}.txt", report.render(doc, "table"))
    if args.format == "json":
        combined = {"schema": docs[0][1]["schema"], "experiment": experiment, "title": title,
                    "reports": [r for _, d in docs for r in d["reports"]]}
        sys.stdout.write(report.to_json(combined))
    elif args.format == "csv":
        header_done = False
        for _, doc in docs:
            text = report.render(doc, "csv")
            sys.stdout.write(text if not header_done else text.split("\n", 1)[1])
            header_done = True
    else:
        sys.stdout.write("\n".join(report.render(doc, "table") for _, doc in docs))
    rows = [row for _, d in docs for r in d["reports"] for row in r["rows"]]
    if rows and all(row["status"] != "ok" for row in rows):
        print("error: every requested model family was not applicable", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.queries < 1 or args.runs < 1 or not args.cores:
        raise UsageError("--queries, --runs and --cores must be positive")
    config = SynthConfig(args.scenario, args.seed, args.queries, tuple(args.cores), args.runs,
                         args.noise, args.spikes, args.spike_factor)
    profiles, meta = generate(config)
    buf = io.StringIO()
    write_profiles(profiles, buf)
    if args.out is None:
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    report.atomic_write(args.out, buf.getvalue())
    report.atomic_write(args.out.with_name(args.out.name + ".meta.json"), report.to_json(meta))
    print(f"wrote {len(profiles)} profiles to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    grid = _grid(args)
    groups = _by_query(_load(args.input))
    docs = []
    for q in _select(groups, args.query):
        rep = run_validation(groups[q], grid, SplitSpec(0.6, 0.2, 0.2, args.seed), _standardize(args))
        docs.append((f"validate-{_safe(q)}",
                     report.bundle("validation", f"Validation: {q}", [rep], query=q)))
    return _emit(args, docs, "validation", "Validation")


def cmd_core_holdout(args) -> int:
    grid = _grid(args)
    groups = _by_query(_load(args.input))
    queries = _select(groups, args.query)
    available = sorted({p.n_cores for q in queries for p in groups[q]})
    held = list(dict.fromkeys(args.cores)) if args.cores else available
    missing = [c for c in held if c not in available]
    if missing:
        raise UnknownCoreCount(f"no runs with {missing} cores; available: {available}")
    docs = []
    for c in held:
        reps = [run_core_holdout(groups[q], grid, c, args.seed, _standardize(args)) for q in queries]
        notes = sorted({r.meta["annotation"] for r in reps})
        annotation = "/".join(notes)
        docs.append((f"core-holdout-{c}",
                     report.bundle("core-holdout", f"Core holdout: {c} cores ({annotation})", reps,
                                   held_out_cores=c, annotation=annotation)))
    return _emit(args, docs, "core-holdout", "Core holdout")


def cmd_cross_query(args) -> int:
    grid = _grid(args)
    groups = _by_query(_load(args.input))
    train_q = _select(groups, args.train_queries)
    test_q = _select(groups, [args.test_query])
    if set(train_q) & set(test_q):
        raise UsageError("the test query must not be among the training queries")
    train = [p for q in train_q for p in groups[q]]
    rep = run_cross_query(train, groups[test_q[0]], grid, args.seed, _standardize(args))
    stem = f"cross-query-{_safe('_'.join(train_q))}-to-{_safe(test_q[0])}"
    doc = report.bundle("cross-query", f"Cross-query: {rep.tag}", [rep], train_queries=train_q,
                        test_query=test_q[0])
    return _emit(args, [(stem, doc)], "cross-query", "Cross-query")


def cmd_weights(args) -> int:
    grid = _grid(args)
    bad = [f.name for f in grid.families if not f.is_linear]
    if bad:
        raise UsageError(f"weights are only defined for linear families, not {bad}")
    groups = _by_query(_load(args.input))
    docs = []
    for q in _select(groups, args.query):
        rep = fit_weights(groups[q], grid, args.seed, _standardize(args))
        docs.append((f"weights-{_safe(q)}", report.bundle("weights", f"Feature weights: {q}", [rep], query=q)))
    return _emit(args, docs, "weights", "Feature weights")


COMMANDS = {
    "synth": cmd_synth,
    "validate": cmd_validate,
    "core-holdout": cmd_core_holdout,
    "cross-query": cmd_cross_query,
    "weights": cmd_weights,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except JobPerfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
