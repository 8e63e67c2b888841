"""Command line interface.

Exit codes: 0 on success, 1 on usage or input errors, 2 on internal errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .core import InfluenceError, LabeledDataset
from .estimators import EstimatorConfig, sample_chi, sample_chi_distance
from .games import AXIOM_CHECKERS
from .linear import (
    LinearClassifier,
    case_branch_2d,
    check_weight_monotonicity,
    chi_linear_grid,
    chi_linear_mc,
    feature_influences,
    grid_dataset,
    pivotal_volumes_2d,
)
from .measures import (
    WeightFunction,
    chi,
    chi_distance,
    chi_normalized,
    chi_state,
    chi_weighted,
    chi_weighted_conditional,
    chi_win_loss_form,
    stats_report,
    zeta_state,
)
from .pipeline import (
    NORMALIZATIONS,
    analyze,
    ingest_counts_csv,
    ingest_labeled_csv,
    load_space,
    normalize_counts,
    synthetic_counts,
    write_counts_csv,
)
from .report import new_report, write_report

log = logging.getLogger("influence")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _output_args(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--figure", help="also render a figure to this path (.png, .svg, .pdf)")


def _input_args(p):
    p.add_argument("--input", required=True, help="labeled CSV: f1,...,fn,value[,value2,...]")
    p.add_argument("--value-columns", type=int, default=1, help="number of trailing value columns")
    p.add_argument("--space", help="JSON file declaring features and their states")
    p.add_argument("--feature", action="append", dest="features", metavar="NAME",
                   help="feature to measure (repeatable)")
    p.add_argument("--all", action="store_true", help="measure every feature (the default)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="influence", description="Feature influence measures for black-box classifiers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("compute", help="chi family on a labeled CSV")
    _input_args(p)
    p.add_argument("--measure", choices=("chi", "chi-norm", "state", "weighted", "distance"), default="chi")
    p.add_argument("--distance", choices=("discrete", "abs", "cosine"), default="discrete")
    p.add_argument("--weights-file", help="CSV f1,...,fn,weight")
    p.add_argument("--conditional", action="store_true",
                   help="weighted-p: use w(b|a_-i) = w(a_-i,b) / w(a_-i)")
    _output_args(p)

    p = sub.add_parser("state", help="state influence zeta and chi_{i,b}")
    _input_args(p)
    _output_args(p)

    p = sub.add_parser("weighted", help="weighted chi^w (and chi^p on full spaces)")
    _input_args(p)
    p.add_argument("--weights-file", required=True)
    p.add_argument("--conditional", action="store_true")
    _output_args(p)

    p = sub.add_parser("distance", help="pseudo-distance chi^d")
    _input_args(p)
    p.add_argument("--distance", choices=("discrete", "abs", "cosine"), default="discrete")
    _output_args(p)

    p = sub.add_parser("sample", help="Monte Carlo estimate of chi or chi^d")
    _input_args(p)
    p.add_argument("--distance", choices=("discrete", "abs", "cosine"))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.95)
    _output_args(p)

    p = sub.add_parser("linear", help="influence for a linear classifier on [0,1]^n")
    p.add_argument("--weights", required=True, help="comma separated, e.g. 2,-1 (use --weights=-1,2 for a leading minus)")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--method", choices=("closed", "mc", "grid", "monotonicity"), default="closed")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=0.0)
    _output_args(p)

    p = sub.add_parser("check-axioms", help="run the axiom checkers on a measure")
    p.add_argument("--measure", choices=("chi", "chi-norm", "win-loss", "zero"), default="chi")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--axiom", action="append", choices=tuple(AXIOM_CHECKERS), dest="axioms")
    _output_args(p)

    p = sub.add_parser("pipeline", help="counts -> normalize -> per-item and vector influence + stats")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--counts", help="counts CSV: f1,...,fn,item,count")
    src.add_argument("--synthetic", action="store_true", help="use a generated table with one ES-only item")
    p.add_argument("--space", help="JSON file declaring features and their states")
    p.add_argument("--min-count", type=int, default=100)
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="per-pair")
    p.add_argument("--feature", action="append", dest="features", metavar="NAME")
    p.add_argument("--all", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="seed for --synthetic")
    _output_args(p)

    p = sub.add_parser("synth", help="write a synthetic counts CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--items", type=int, default=40)
    return parser


# -- helpers -------------------------------------------------------------


def _load(args) -> LabeledDataset:
    space = load_space(args.space) if args.space else None
    return ingest_labeled_csv(args.input, value_columns=args.value_columns, space=space)


def _features(ds: LabeledDataset, names) -> list[int]:
    if not names:
        return list(range(ds.space.n))
    return [ds.space.index(n) for n in names]


def _load_weights(path, ds: LabeledDataset) -> WeightFunction:
    wds = ingest_labeled_csv(path, value_columns=1, space=ds.space, kind="scalar")
    return WeightFunction(ds.space, wds.profiles, wds.values)


def _config(args, **extra) -> dict:
    keep = {k: v for k, v in vars(args).items() if k not in ("output", "format", "figure", "verbose", "all")}
    keep.update(extra)
    return keep


def _feature_rows(ds, idx, fn, normalize=True):
    rows = []
    for i in idx:
        raw = fn(i)
        rows.append({"name": ds.space.names[i], "raw": raw, "normalized": raw / ds.size if normalize else raw})
    return rows


def _with_stats(report: dict) -> dict:
    if report["features"]:
        report["stats"] = {"features": stats_report([f["normalized"] for f in report["features"]])}
    return report


# -- commands ------------------------------------------------------------


def cmd_compute(args) -> dict:
    if args.measure == "state":
        return cmd_state(args)
    if args.measure == "weighted":
        if not args.weights_file:
            raise InfluenceError("--measure weighted needs --weights-file")
        return cmd_weighted(args)
    if args.measure == "distance":
        return cmd_distance(args)
    ds = _load(args)
    idx = _features(ds, args.features)
    report = new_report(args.measure, _config(args, profiles=ds.size, kind=ds.kind))
    if args.measure == "chi-norm":
        report["features"] = [{"name": ds.space.names[i], "raw": chi(ds, i), "normalized": chi_normalized(ds, i)}
                              for i in idx]
    else:
        report["features"] = _feature_rows(ds, idx, lambda i: chi(ds, i))
    report["identities"] = {ds.space.names[i]: {"win_loss_form": chi_win_loss_form(ds, i)} for i in idx}
    return _with_stats(report)


def cmd_state(args) -> dict:
    ds = _load(args)
    idx = _features(ds, args.features)
    report = new_report("state", _config(args, profiles=ds.size, full_space=ds.is_full))
    report["features"] = _feature_rows(ds, idx, lambda i: chi(ds, i))
    states = []
    for i in idx:
        for b, label in enumerate(ds.space.features[i].states):
            row = {"feature": ds.space.names[i], "state": label, "chi_state": chi_state(ds, i, b)}
            if ds.is_full:
                row["zeta"] = zeta_state(ds, i, b)
                row["zeta_raw"] = zeta_state(ds, i, b, raw=True)
            states.append(row)
    report["states"] = states
    if not ds.is_full:
        report["notes"] = ["zeta needs every profile of the space; reported chi_state only"]
    return _with_stats(report)


def cmd_weighted(args) -> dict:
    ds = _load(args)
    w = _load_weights(args.weights_file, ds)
    idx = _features(ds, args.features)
    report = new_report("weighted", _config(args, profiles=ds.size))
    report["features"] = _feature_rows(ds, idx, lambda i: chi_weighted(ds, w, i))
    if ds.is_full:
        report["weighted_p"] = {ds.space.names[i]: chi_weighted_conditional(ds, w, i, args.conditional) for i in idx}
    return _with_stats(report)


def cmd_distance(args) -> dict:
    ds = _load(args)
    idx = _features(ds, args.features)
    report = new_report("distance", _config(args, profiles=ds.size, kind=ds.kind))
    report["features"] = _feature_rows(ds, idx, lambda i: chi_distance(ds, args.distance, i))
    return _with_stats(report)


def cmd_sample(args) -> dict:
    ds = _load(args)
    idx = _features(ds, args.features)
    cfg = EstimatorConfig(args.samples, args.seed, args.confidence)
    report = new_report("sample", _config(args, profiles=ds.size))
    estimates = {}
    for i in idx:
        est = sample_chi(ds, i, cfg) if args.distance is None else sample_chi_distance(ds, args.distance, i, cfg)
        estimates[ds.space.names[i]] = {"value": est.value, "half_width": est.half_width,
                                        "samples": est.samples_used, "scale": ds.size}
    report["features"] = [{"name": n, "raw": e["value"], "normalized": e["value"] / ds.size}
                          for n, e in estimates.items()]
    report["estimates"] = estimates
    return _with_stats(report)


def _parse_weights(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InfluenceError(f"cannot parse weights {text!r}") from None


def cmd_linear(args) -> dict:
    clf = LinearClassifier(_parse_weights(args.weights), args.threshold)
    names = [f"x{j + 1}" for j in range(clf.n)]
    report = new_report(f"linear-{args.method}", _config(args))
    if args.method == "closed":
        chis, _ = feature_influences(clf, "closed")
        report["features"] = [{"name": n, "raw": c, "normalized": c} for n, c in zip(names, chis)]
        if clf.n == 2 and clf.weights[0] > 0 > clf.weights[1]:
            report["case"] = case_branch_2d(*clf.weights, clf.threshold)
            report["pivotal"] = dict(zip(names, pivotal_volumes_2d(*clf.weights, clf.threshold)))
    elif args.method == "mc":
        ests = [chi_linear_mc(clf, i, args.samples, args.seed, args.confidence) for i in range(clf.n)]
        report["features"] = [{"name": n, "raw": e.value, "normalized": e.value} for n, e in zip(names, ests)]
        report["estimates"] = {n: {"value": e.value, "half_width": e.half_width, "samples": e.samples_used,
                                   "scale": 1, "piv_volume": e.pivotal.piv_volume,
                                   "anti_piv_volume": e.pivotal.anti_piv_volume}
                               for n, e in zip(names, ests)}
    elif args.method == "grid":
        ds = grid_dataset(clf, args.resolution)
        vals = [chi_linear_grid(clf, i, args.resolution, ds) for i in range(clf.n)]
        report["features"] = [{"name": n, "raw": v, "normalized": v} for n, v in zip(names, vals)]
    else:
        rep = check_weight_monotonicity(clf, args.tolerance, args.samples, args.seed, confidence=args.confidence)
        report["features"] = [{"name": n, "raw": c, "normalized": c} for n, c in zip(names, rep.chis)]
        report["pairs"] = [{"i": names[p.i], "j": names[p.j], "chi_i": p.chi_i, "chi_j": p.chi_j,
                            "margin": p.margin, "verdict": p.verdict} for p in rep.pairs]
        report["violations"] = len(rep.violations)
    return _with_stats(report)


def _zero_measure(ds, i):
    return 0


_AXIOM_MEASURES = {"chi": chi, "chi-norm": chi_normalized, "win-loss": chi_win_loss_form, "zero": _zero_measure}


def cmd_check_axioms(args) -> dict:
    measure = _AXIOM_MEASURES[args.measure]
    report = new_report(f"axioms:{args.measure}", _config(args))
    verdicts = []
    for name in args.axioms or AXIOM_CHECKERS:
        v = AXIOM_CHECKERS[name](measure, args.trials, args.seed)
        entry = {"axiom": v.axiom, "passed": v.passed, "trials": v.trials, "failures": len(v.witnesses)}
        if v.witnesses:
            entry["witness"] = _jsonable(v.witnesses[0])
        verdicts.append(entry)
    report["axioms"] = verdicts
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def cmd_pipeline(args) -> dict:
    if args.synthetic:
        table = synthetic_counts(args.seed)
    else:
        table = ingest_counts_csv(args.counts, space=load_space(args.space) if args.space else None)
    values = normalize_counts(table, args.min_count)
    result = analyze(values, args.features, args.normalization)
    report = new_report("cosine-vector", _config(args, retained_items=len(result.items),
                                                 dropped_items=list(result.dropped)))
    report["features"] = [{"name": n, "raw": result.vector_raw[n], "normalized": result.vector[n]}
                          for n in result.features]
    report["items"] = [{"item": it, "influence": result.per_item[it]} for it in result.items]
    report["stats"] = result.stats
    return report


def cmd_synth(args) -> None:
    write_counts_csv(synthetic_counts(args.seed, n_items=args.items), args.output)


COMMANDS = {
    "compute": cmd_compute,
    "state": cmd_state,
    "weighted": cmd_weighted,
    "distance": cmd_distance,
    "sample": cmd_sample,
    "linear": cmd_linear,
    "check-axioms": cmd_check_axioms,
    "pipeline": cmd_pipeline,
    "synth": cmd_synth,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        report = COMMANDS[args.command](args)
        if report is not None:
            write_report(report, args.output, args.format)
            if args.figure:
                from .plotting import plot_report

                plot_report(report, args.figure)
    except (InfluenceError, OSError, KeyError) as exc:
        print(f"influence: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - reported, not hidden
        log.exception("internal error")
        print(f"influence: internal error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
