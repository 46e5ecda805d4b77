"""Command-line entry point: ``vadeval <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 computation error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import agreement as agr
from . import analysis, classic, io, prob, synth
from . import laap as latency
from .laap import event_intervals
from .classic import MetricError
from .model import LaApParams, MetricReport, errors_only, expand_round, subset, validate_dataset

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 2, 3

log = logging.getLogger("vadeval")


class InvalidInput(Exception):
    pass


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _float_list(text):
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _existing(path):
    p = Path(path)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return p


# ------------------------------------------------------------------- loading


class Inputs:
    """Loaded and filtered dataset plus provenance digests."""

    def __init__(self, args, need_preds=True, need_rounds=True):
        self.digests = []
        manifest = io.load_manifest(args.manifest)
        self.digests.append(io.file_digest(args.manifest, len(manifest)))
        rounds = []
        if getattr(args, "annotations", None):
            rounds = io.load_annotations(args.annotations, manifest, getattr(args, "time_unit", None))
            self.digests.append(io.file_digest(args.annotations, len(rounds)))
        elif need_rounds:
            raise InvalidInput("--annotations is required")
        preds = None
        if need_preds:
            preds = io.load_predictions(args.predictions, manifest)
            self.digests.append(io.file_digest(args.predictions, len(preds)))
        self.manifest, self.rounds, self.preds = subset(
            manifest, rounds, preds, _csv_list(getattr(args, "exclude_categories", "")))
        if not self.manifest:
            raise InvalidInput("no videos left after category exclusion")
        violations = validate_dataset(self.manifest, self.rounds, self.preds)
        errs = errors_only(violations)
        if errs:
            raise InvalidInput("\n".join(str(v) for v in errs))
        self.warnings = [str(v) for v in violations if v.severity != "error"]
        for w in self.warnings:
            log.warning(w)

    def provenance(self):
        return [{"path": d.path, "sha256": d.sha256, "record_count": d.record_count} for d in self.digests]


def _params(args) -> LaApParams:
    return LaApParams(args.phi, args.alpha, args.beta)


def _params_dict(args, **extra):
    out = {}
    if hasattr(args, "phi"):
        p = _params(args)
        out.update(phi=p.phi, alpha=io.fmt_float(p.alpha), beta=io.fmt_float(p.beta))
    out.update(extra)
    return out


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _reference_labels(inputs, round_id):
    rounds = inputs.rounds
    if round_id is None:
        ref = rounds[0]
    else:
        matches = [r for r in rounds if r.round_id == round_id]
        if not matches:
            raise InvalidInput(f"unknown reference round {round_id!r}")
        ref = matches[0]
    return ref, expand_round(ref, inputs.manifest)


def _print_params(params):
    print("parameters: " + ", ".join(f"{k}={v}" for k, v in params.items()))


# ----------------------------------------------------------------- commands


def cmd_eval(args):
    inputs = Inputs(args, need_rounds=False)
    params = _params(args)
    values, skipped = {}, {}
    far_values = {}

    normal_ids = [m.video_id for m in inputs.manifest if not m.is_abnormal]
    by_id = {t.video_id: t for t in inputs.preds}
    if normal_ids:
        normal_scores = np.concatenate([by_id[v].scores for v in normal_ids])
        for tau in args.far_thresholds:
            far_values[tau] = classic.far(normal_scores, tau)
    else:
        skipped["far"] = "no normal videos in the evaluated set"

    if not inputs.rounds:
        for name in MetricReport.METRICS:
            skipped[name] = "no annotations given"
    else:
        ref, hard = _reference_labels(inputs, args.reference_round)
        scores, y = classic.concat(inputs.preds, hard)
        order = classic.descending_order(scores)  # one sort shared by every metric
        acc = classic.sweep(scores, y, order)
        for name, build, area in (("auc", classic.roc_from_sweep, classic.trapezoid_area),
                                  ("ap", classic.pr_from_sweep, classic.step_area)):
            try:
                values[name] = area(build(acc))
            except MetricError as exc:
                skipped[name] = str(exc)
        soft = {t.video_id: t.probs for t in prob.make_prob_labels(inputs.rounds, inputs.manifest)}
        _, ysoft = classic.concat(inputs.preds, soft)
        try:
            refs = prob.reference_sweeps(ysoft)
        except MetricError as exc:
            skipped["prob_auc"] = skipped["prob_ap"] = str(exc)
        else:
            for name, kind in (("prob_auc", "roc"), ("prob_ap", "pr")):
                try:
                    values[name] = prob.normalization(scores, ysoft, kind, order, refs).value
                except MetricError as exc:
                    skipped[name] = str(exc)
        if args.multi_event:
            skipped["laap"] = "dataset declared multi-event; LaAP assumes one event per video"
        else:
            try:
                values["laap"], _ = latency.laap(inputs.preds, inputs.rounds, inputs.manifest, params,
                                                 args.workers, order)
            except MetricError as exc:
                skipped["laap"] = str(exc)

    report = MetricReport(
        **values,
        far=far_values,
        params=params,
        provenance=tuple(inputs.digests),
        skipped=skipped,
        warnings=tuple(inputs.warnings),
    )
    out = _out_dir(args)
    doc = io.report_to_dict(report)
    doc["config"] = {
        "exclude_categories": _csv_list(args.exclude_categories),
        "far_thresholds": [io.fmt_float(t) for t in args.far_thresholds],
        "reference_round": args.reference_round if args.reference_round is not None
        else (inputs.rounds[0].round_id if inputs.rounds else None),
        "videos": len(inputs.manifest),
    }
    io.write_json(doc, out / "report.json")
    _print_params(_params_dict(args, far_thresholds=args.far_thresholds))
    for name in MetricReport.METRICS:
        v = values.get(name)
        print(f"{name:9s} {v:.4f}" if v is not None else f"{name:9s} skipped ({skipped.get(name)})")
    for tau, v in far_values.items():
        print(f"far@{tau:g}    {v:.4f}")
    return EXIT_OK


def cmd_agreement(args):
    inputs = Inputs(args, need_preds=False)
    if len(inputs.rounds) < 2:
        raise InvalidInput("agreement analysis needs at least two annotation rounds")
    rep = agr.agreement_report(inputs.rounds, inputs.manifest)
    out = _out_dir(args)
    fmt = io.fmt_float
    doc = {
        "round_ids": list(rep.round_ids),
        "pairwise_kappa": [[fmt(v) for v in row] for row in rep.pairwise_kappa.tolist()],
        "fleiss_kappa": fmt(rep.fleiss_kappa),
        "median_start_std": None if np.isnan(rep.median_start_std) else fmt(rep.median_start_std),
        "median_duration_std": None if np.isnan(rep.median_duration_std) else fmt(rep.median_duration_std),
        "median_end_std": None if np.isnan(rep.median_end_std) else fmt(rep.median_end_std),
        "excluded_videos": list(rep.excluded),
        "params": _params_dict(args, exclude_categories=_csv_list(args.exclude_categories)),
        "provenance": inputs.provenance(),
        "warnings": inputs.warnings,
    }
    io.write_json(doc, out / "agreement.json")
    io.write_table(out / "deviations.csv", ["video_id", "start_std", "duration_std", "end_std", "n_rounds"],
                   [[d.video_id, d.start_std, d.duration_std, d.end_std, str(d.n_rounds)] for d in rep.deviations])
    _print_params(doc["params"])
    print(f"fleiss_kappa {rep.fleiss_kappa:.4f}")
    print(f"median std (s): start {rep.median_start_std:.3f}, duration {rep.median_duration_std:.3f}, "
          f"end {rep.median_end_std:.3f}")
    return EXIT_OK


def _write_run(out, args, inputs, **extra):
    doc = {"params": _params_dict(args, **extra), "provenance": inputs.provenance() if inputs else []}
    io.write_json(doc, out / "run.json")
    _print_params(doc["params"])


def cmd_curves(args):
    inputs = Inputs(args)
    out = _out_dir(args)
    _, hard = _reference_labels(inputs, args.reference_round)
    scores, y = classic.concat(inputs.preds, hard)
    acc = classic.sweep(scores, y)
    io.write_curve(classic.roc_from_sweep(acc), out / "roc.csv")
    io.write_curve(classic.pr_from_sweep(acc), out / "pr.csv")
    _, curve = latency.laap(inputs.preds, inputs.rounds, inputs.manifest, _params(args), args.workers)
    io.write_curve(curve, out / "precision_larecall.csv")

    soft = {t.video_id: t.probs for t in prob.make_prob_labels(inputs.rounds, inputs.manifest)}
    _, ysoft = classic.concat(inputs.preds, soft)
    for kind, build, name in (("roc", classic.roc_curve, "prob_roc.csv"), ("pr", classic.pr_curve, "prob_pr.csv")):
        best, worst = prob.best_worst_curves(ysoft, kind)
        raw = build(scores, ysoft)
        rows = []
        for label, c in (("raw", raw), ("best", best), ("worst", worst)):
            rows.extend([label, x, yy, t] for x, yy, t in c.points)
        io.write_table(out / name, ["curve", "x", "y", "tau"], rows)
    _write_run(out, args, inputs)
    return EXIT_OK


def cmd_perturb(args):
    inputs = Inputs(args)
    out = _out_dir(args)
    intervals = event_intervals(inputs.rounds, inputs.manifest)
    perturbed = analysis.perturb_scores(inputs.preds, intervals, args.mode)
    io.write_predictions(perturbed, out / "predictions.jsonl")
    _write_run(out, args, inputs, mode=args.mode)
    return EXIT_OK


def cmd_heatmap(args):
    inputs = Inputs(args)
    out = _out_dir(args)
    intervals = event_intervals(inputs.rounds, inputs.manifest)
    edges, mass = analysis.position_histogram(inputs.preds, intervals, args.tau, args.bins)
    io.write_table(out / "histogram.csv", ["bin_left", "bin_right", "density"],
                   zip(edges[:-1].tolist(), edges[1:].tolist(), mass.tolist()))
    _write_run(out, args, inputs, tau=args.tau, bins=args.bins)
    return EXIT_OK


def cmd_correlate(args):
    with open(args.series, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    cols = _csv_list(args.columns)
    if len(cols) != 2:
        raise InvalidInput("--columns needs exactly two column names")
    try:
        a = [float(r[cols[0]]) for r in rows]
        b = [float(r[cols[1]]) for r in rows]
    except KeyError as exc:
        raise InvalidInput(f"column {exc.args[0]!r} not in {args.series}") from None
    except ValueError as exc:
        raise InvalidInput(f"{args.series}: {exc}") from None
    try:
        value = analysis.srocc(a, b)
    except ValueError as exc:
        raise MetricError(str(exc)) from None
    out = _out_dir(args)
    io.write_json({"columns": cols, "n": len(a), "srocc": io.fmt_float(value),
                   "provenance": [{"path": str(args.series), "sha256": io.file_digest(args.series, len(a)).sha256,
                                   "record_count": len(a)}]},
                  out / "correlation.json")
    print(f"srocc({cols[0]}, {cols[1]}) = {value:.6f}")
    return EXIT_OK


def cmd_synth(args):
    inputs = Inputs(args, need_preds=False)
    out = _out_dir(args)
    profile = synth.DetectorProfile(args.onset_lag, args.rise_width, args.peak, args.noise, args.seed)
    intervals = event_intervals(inputs.rounds, inputs.manifest)
    io.write_predictions(synth.synthesize(profile, inputs.manifest, intervals), out / "predictions.jsonl")
    _write_run(out, args, inputs, onset_lag=args.onset_lag, rise_width=args.rise_width, peak=args.peak,
               noise=args.noise, seed=args.seed)
    return EXIT_OK


def cmd_dataset(args):
    out = _out_dir(args)
    manifest, rounds = synth.synthesize_dataset(args.videos, args.frames, args.abnormal_fraction,
                                                args.rounds, args.seed, args.fps)
    io.write_manifest(manifest, out / "manifest.csv")
    io.write_annotations(rounds, out / "annotations.json")
    print(f"wrote {len(manifest)} videos, {len(rounds)} rounds to {out}")
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vadeval", description="Video anomaly detection evaluation toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preds=True, rounds=True, laap_params=False):
        p.add_argument("--manifest", type=_existing, required=True)
        if preds:
            p.add_argument("--predictions", type=_existing, required=True)
        p.add_argument("--annotations", type=_existing, required=rounds)
        p.add_argument("--time-unit", choices=("frames", "seconds"), default=None,
                       help="unit of annotation bounds (default: as declared in the file)")
        p.add_argument("--exclude-categories", default="", help="comma-separated categories to drop")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1)
        if laap_params:
            p.add_argument("--phi", type=int, default=16)
            p.add_argument("--alpha", type=float, default=2.0)
            p.add_argument("--beta", type=float, default=7.0)

    p = sub.add_parser("eval", help="AUC/AP, ProbAUC/ProbAP, LaAP and FAR report")
    common(p, rounds=False, laap_params=True)
    p.add_argument("--far-thresholds", type=_float_list, default=[0.5, 0.8])
    p.add_argument("--reference-round", default=None, help="round used for AUC/AP (default: first)")
    p.add_argument("--multi-event", action="store_true",
                   help="videos may hold several unrelated events; LaAP is skipped")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("agreement", help="Cohen/Fleiss kappa and boundary deviations")
    common(p, preds=False)
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("curves", help="ROC, PR, probabilistic and Precision-LaRecall curves")
    common(p, laap_params=True)
    p.add_argument("--reference-round", default=None)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("perturb", help="reorder scores inside event intervals")
    common(p)
    p.add_argument("--mode", choices=[m.value for m in analysis.PerturbMode], default="identity")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("heatmap", help="histogram of positive-frame positions in event intervals")
    common(p)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--bins", type=int, default=10)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("correlate", help="SROCC between two metric series")
    p.add_argument("series", type=_existing, help="CSV with one row per checkpoint")
    p.add_argument("--columns", default="ap,laap")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("synth", help="synthetic detector predictions for a dataset")
    common(p, preds=False)
    p.add_argument("--onset-lag", type=float, default=0.0)
    p.add_argument("--rise-width", type=float, default=0.3)
    p.add_argument("--peak", type=float, default=0.9)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dataset", help="synthetic manifest and multi-round annotations")
    p.add_argument("--videos", type=int, default=20)
    p.add_argument("--frames", type=int, default=600)
    p.add_argument("--abnormal-fraction", type=float, default=0.5)
    p.add_argument("--rounds", type=int, default=4)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_dataset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (InvalidInput, io.IngestError, agr.AgreementError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # bad parameter values (e.g. alpha <= 1) surface as ValueError from the model types
        if not isinstance(exc, MetricError):
            print(f"invalid input: {exc}", file=sys.stderr)
            return EXIT_INVALID
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
