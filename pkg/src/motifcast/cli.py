"""Command-line entry point.

Subcommands: stats (stream summary and model diagnostics as JSON),
predict (forecast CSV plus an evaluation report), features (sparse
per-event matrix plus vocabulary), sweep (precision curves as CSV).

Exit codes: 0 success, 2 unreadable input, 3 malformed input, 4 data too
degenerate to model (no repeating node, or an undefined global rate),
1 any other invalid request. Every failure prints one `error[tag]:` line
on stderr. All randomness comes from --seed; nothing reads the clock.
"""

from __future__ import annotations

import argparse
import json
import sys

from .evaluate import (
    EvalReport,
    motif_transition_entropy,
    node_entropy,
    precision_at_k,
    repeated_event_ratio,
    report_to_dict,
    sweep_k,
    write_sweep_csv,
)
from .features import build_feature_matrix, export_dense, export_features, export_sparse
from .ingest import ParseError, chronological_split, load_graph, summary_stats
from .motifs import vocabulary, write_vocabulary
from .predictor import run_forecast, write_predictions
from .stats import (
    DegenerateStreamError,
    UndefinedIntensityError,
    build_stats,
    compute_delta_c,
    train_model,
)

DEFAULT_SEEDS = [1, 2, 3, 4, 5]


def _add_model_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("input", help="event file, one 'src dst time' line per event (.gz ok)")
    sp.add_argument("--lmax", type=int, default=3, metavar="L",
                    help="largest motif size tracked (default: 3)")
    sp.add_argument("--delta-c", type=float, default=None, metavar="SECONDS", dest="delta_c",
                    help="retention window override (default: largest gap between "
                         "consecutive events sharing a node)")
    sp.add_argument("--epsilon", type=float, default=1.0, metavar="SECONDS",
                    help="half-width of the waiting-time window (default: 1)")


def _add_seed_flag(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, action="append", metavar="N",
                    help="RNG seed; repeat for multiple runs (default: 1 2 3 4 5)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="motifcast",
        description="Temporal-motif event forecasting: next-event prediction, "
                    "per-event motif features, and forecast evaluation.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    sp = sub.add_parser("stats", help="stream summary and model diagnostics as JSON")
    _add_model_flags(sp)
    sp.add_argument("--test-ratio", type=float, default=0.20, metavar="R",
                    help="held-out fraction for the split diagnostics (default: 0.20)")
    sp.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("predict", help="forecast the next k events")
    _add_model_flags(sp)
    sp.add_argument("--test-ratio", type=float, default=0.20, metavar="R",
                    help="held-out fraction used for scoring (default: 0.20)")
    sp.add_argument("--k", type=int, default=100, metavar="K",
                    help="events to predict per run (default: 100)")
    _add_seed_flag(sp)
    sp.add_argument("--frozen-clock", action="store_true",
                    help="do not reset an edge's recency when it is emitted")
    sp.add_argument("-o", "--output", default=None,
                    help="prediction CSV path (first seed's run); default stdout")
    sp.add_argument("--report", default=None, metavar="PATH",
                    help="evaluation JSON path (default: <output>.report.json when "
                         "-o is given, otherwise omitted)")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("features", help="per-event motif feature matrix")
    _add_model_flags(sp)
    sp.add_argument("--feature-indexing", choices=("source", "target"), default="source",
                    help="column a candidate's mass lands in: its current type "
                         "(source, default) or its extended type (target)")
    sp.add_argument("--dense", action="store_true",
                    help="write a dense CSV instead of sparse triplets")
    sp.add_argument("--dense-limit", type=int, default=20000, metavar="ROWS",
                    help="row ceiling for --dense (default: 20000)")
    sp.add_argument("-o", "--output", default=None,
                    help="matrix path; the vocabulary goes to <output>.vocab "
                         "(default: matrix to stdout, no vocabulary file)")
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("sweep", help="precision curves over k / split-ratio grids")
    _add_model_flags(sp)
    sp.add_argument("--ks", type=int, nargs="+", default=[100], metavar="K",
                    help="prediction counts to sweep (default: 100)")
    sp.add_argument("--ratios", type=float, nargs="+", default=[0.20], metavar="R",
                    help="held-out fractions to sweep (default: 0.20)")
    _add_seed_flag(sp)
    sp.add_argument("--frozen-clock", action="store_true",
                    help="do not reset an edge's recency when it is emitted")
    sp.add_argument("--threads", type=int, default=None, metavar="N",
                    help="worker threads for sweep cells (default: MOTIFCAST_WORKERS "
                         "or the CPU count)")
    sp.add_argument("-o", "--output", default=None, help="curve CSV path; default stdout")
    sp.set_defaults(func=cmd_sweep)
    return p


def _write_text(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def cmd_stats(args) -> None:
    g = load_graph(args.input)
    summary = summary_stats(g)
    train, test = chronological_split(g, args.test_ratio)
    delta_c = args.delta_c if args.delta_c is not None else compute_delta_c(train)
    stats = build_stats(train, args.lmax, delta_c, args.epsilon)
    doc = {
        "input": args.input,
        "nodes": summary.nodes,
        "events": summary.events,
        "static_edges": summary.static_edges,
        "timespan_days": summary.timespan_days,
        "dropped_self_loops": g.dropped_self_loops,
        "t_min": g.t_min,
        "t_max": g.t_max,
        "ell_max": args.lmax,
        "epsilon": stats.epsilon,
        "test_ratio": args.test_ratio,
        "train_events": len(train),
        "test_events": len(test),
        "delta_c": stats.delta_c,
        "p_cold": stats.p_cold,
        "cold_events": stats.cold_count,
        "lambda_global": stats.lambda_global,
        "rer": repeated_event_ratio(train, test),
        "node_entropy": node_entropy(train),
        "motif_transition_entropy":
            motif_transition_entropy(stats) if stats.trans_count else None,
    }
    _write_text(json.dumps(doc, indent=2) + "\n", args.output)


def cmd_predict(args) -> None:
    g = load_graph(args.input)
    train, test = chronological_split(g, args.test_ratio)
    delta_c = args.delta_c if args.delta_c is not None else compute_delta_c(train)
    stats, master = train_model(train, args.lmax, delta_c, args.epsilon)
    seeds = args.seed if args.seed else list(DEFAULT_SEEDS)
    update = not args.frozen_clock
    rer = repeated_event_ratio(train, test)
    n_ent = node_entropy(train)
    m_ent = motif_transition_entropy(stats) if stats.trans_count else None
    reports = []
    first_preds = None
    for seed in seeds:
        fc = run_forecast(train, stats, args.k, seed, update, pool=master)
        if first_preds is None:
            first_preds = fc.predictions
        reports.append(EvalReport(
            k=args.k,
            test_ratio=args.test_ratio,
            precision=precision_at_k(fc.predictions, test),
            rer=rer,
            node_entropy=n_ent,
            motif_transition_entropy=m_ent,
            fallback_count=fc.fallback_count,
            seed=seed,
        ))

    if args.output is None:
        write_predictions(first_preds, g.original_ids, sys.stdout)
    else:
        write_predictions(first_preds, g.original_ids, args.output)

    mean_precision = sum(r.precision for r in reports) / len(reports)
    mean_fallbacks = sum(r.fallback_count for r in reports) / len(reports)
    report_doc = {
        "input": args.input,
        "k": args.k,
        "test_ratio": args.test_ratio,
        "ell_max": args.lmax,
        "update_last_occurrence": update,
        "runs": [report_to_dict(r) for r in reports],
        "mean": {"precision": mean_precision, "fallback_count": mean_fallbacks},
    }
    report_path = args.report
    if report_path is None and args.output is not None:
        report_path = args.output + ".report.json"
    if report_path is not None:
        _write_text(json.dumps(report_doc, indent=2) + "\n", report_path)
    else:
        print(
            f"precision mean {mean_precision:.6f} over {len(seeds)} seed(s), "
            f"fallbacks mean {mean_fallbacks:.2f}",
            file=sys.stderr,
        )


def cmd_features(args) -> None:
    g = load_graph(args.input)
    delta_c = args.delta_c if args.delta_c is not None else compute_delta_c(g)
    stats = build_stats(g, args.lmax, delta_c, args.epsilon)
    vocab = vocabulary(args.lmax)
    matrix = build_feature_matrix(g, stats, args.feature_indexing, vocab)
    if args.dense:
        export_dense(matrix, args.output if args.output else sys.stdout, args.dense_limit)
        if args.output:
            write_vocabulary(vocab, args.output + ".vocab")
    elif args.output:
        export_features(matrix, args.output, vocab)
    else:
        export_sparse(matrix, sys.stdout)


def cmd_sweep(args) -> None:
    g = load_graph(args.input)
    seeds = args.seed if args.seed else list(DEFAULT_SEEDS)
    update = not args.frozen_clock
    rows = []
    for ratio in args.ratios:
        rows.extend(sweep_k(
            g, ratio, args.ks, seeds,
            ell_max=args.lmax,
            epsilon=args.epsilon,
            delta_c=args.delta_c,
            threads=args.threads,
            update_last_occurrence=update,
        ))
    write_sweep_csv(rows, args.output if args.output else sys.stdout)


def _fail(tag: str, message) -> None:
    print(f"error[{tag}]: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ParseError as exc:
        _fail("parse", exc)
        return 3
    except (DegenerateStreamError, UndefinedIntensityError) as exc:
        _fail("degenerate", exc)
        return 4
    except OSError as exc:
        _fail("io", exc)
        return 2
    except (ValueError, KeyError) as exc:
        _fail("invalid", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
