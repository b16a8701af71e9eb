"""Forecast scoring and dataset diagnostics.

Precision is set-level over directed node pairs: a prediction scores when
its (src, dst) pair occurs anywhere in the held-out stream, timestamps and
order ignored, duplicates each counted. The diagnostics (repeated-event
ratio, entropies) characterize how predictable a stream is. All entropies
use natural log.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ingest import TemporalGraph, chronological_split
from .motifs import OpenMotifPool
from .predictor import Prediction, run_forecast
from .stats import MtmStats, compute_delta_c, train_model


@dataclass(frozen=True)
class EvalReport:
    """One forecasting run's scores plus stream diagnostics."""

    k: int
    test_ratio: float
    precision: float
    rer: float
    node_entropy: float
    motif_transition_entropy: Optional[float]
    fallback_count: int
    seed: int


@dataclass(frozen=True)
class SweepRow:
    """One sweep table row; seed None marks the per-k mean row."""

    k: int
    test_ratio: float
    seed: Optional[int]
    precision: float
    fallbacks: float


def precision_at_k(preds: Sequence[Prediction], test: TemporalGraph) -> float:
    """Fraction of predictions whose directed pair occurs in the test stream."""
    if not preds:
        raise ValueError("no predictions to score")
    if len(test) == 0:
        raise ValueError("test stream is empty")
    pairs = set(zip(test.src.tolist(), test.dst.tolist()))
    hits = sum(1 for p in preds if (p.src, p.dst) in pairs)
    return hits / len(preds)


def repeated_event_ratio(train: TemporalGraph, test: TemporalGraph) -> float:
    """Fraction of test events whose directed pair already occurred in train."""
    if len(train) == 0 or len(test) == 0:
        raise ValueError("both streams must be non-empty")
    stride = max(train.id_space, test.id_space, 1)
    train_codes = np.unique(train.src.astype(np.int64) * stride + train.dst)
    test_codes = test.src.astype(np.int64) * stride + test.dst
    return float(np.isin(test_codes, train_codes).mean())


def node_entropy(train: TemporalGraph) -> float:
    """Mean target-distribution entropy over nodes with outgoing events.

    For each source u, H(u) is the Shannon entropy (natural log) of its
    empirical target frequencies; the result is the unweighted mean of
    H(u) over sources that appear at least once.
    """
    if len(train) == 0:
        raise ValueError("empty stream")
    stride = max(train.id_space, 1)
    codes = train.src.astype(np.int64) * stride + train.dst
    pair_codes, counts = np.unique(codes, return_counts=True)
    srcs = pair_codes // stride
    starts = np.nonzero(np.r_[True, srcs[1:] != srcs[:-1]])[0]
    counts = counts.astype(np.float64)
    totals = np.add.reduceat(counts, starts)
    clogc = np.add.reduceat(counts * np.log(counts), starts)
    return float((np.log(totals) - clogc / totals).mean())


def motif_transition_entropy(stats: MtmStats) -> float:
    """Shannon entropy of the joint empirical transition distribution.

    Raises:
        ValueError: the stats contain no transitions.
    """
    if not stats.trans_count:
        raise ValueError("no transitions observed")
    counts = np.array(list(stats.trans_count.values()), dtype=np.float64)
    total = counts.sum()
    return float(np.log(total) - (counts * np.log(counts)).sum() / total)


def evaluate_run(
    train: TemporalGraph,
    test: TemporalGraph,
    stats: MtmStats,
    k: int,
    seed: int,
    test_ratio: float,
    update_last_occurrence: bool = True,
    pool: OpenMotifPool | None = None,
) -> EvalReport:
    """Forecast k events and score them against the held-out stream."""
    forecast = run_forecast(train, stats, k, seed, update_last_occurrence, pool)
    return EvalReport(
        k=k,
        test_ratio=test_ratio,
        precision=precision_at_k(forecast.predictions, test),
        rer=repeated_event_ratio(train, test),
        node_entropy=node_entropy(train),
        motif_transition_entropy=motif_transition_entropy(stats) if stats.trans_count else None,
        fallback_count=forecast.fallback_count,
        seed=seed,
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "k": report.k,
        "test_ratio": report.test_ratio,
        "seed": report.seed,
        "precision": report.precision,
        "rer": report.rer,
        "node_entropy": report.node_entropy,
        "motif_transition_entropy": report.motif_transition_entropy,
        "fallback_count": report.fallback_count,
    }


def default_workers() -> int:
    """Worker count: MOTIFCAST_WORKERS if set, else the CPU count."""
    env = os.environ.get("MOTIFCAST_WORKERS")
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError(f"MOTIFCAST_WORKERS must be >= 1, got {env!r}")
        return n
    return os.cpu_count() or 1


def sweep_k(
    g: TemporalGraph,
    test_ratio: float,
    ks: Sequence[int],
    seeds: Sequence[int],
    ell_max: int = 3,
    epsilon: float = 1.0,
    delta_c: float | None = None,
    threads: int | None = None,
    update_last_occurrence: bool = True,
) -> list[SweepRow]:
    """Precision over a grid of prediction counts and seeds at one split.

    The split, statistics, and end-of-training pool are computed once and
    shared; each (k, seed) cell clones the pool and runs independently, so
    the table is deterministic regardless of worker count. Rows come out
    grouped by k in the given order, seeds in the given order, followed by
    that k's mean row.
    """
    if not ks or not seeds:
        raise ValueError("ks and seeds must be non-empty")
    train, test = chronological_split(g, test_ratio)
    window = compute_delta_c(train) if delta_c is None else delta_c
    stats, master = train_model(train, ell_max, window, epsilon)
    cells = [(k, seed) for k in ks for seed in seeds]

    def run_cell(cell):
        k, seed = cell
        fc = run_forecast(train, stats, k, seed, update_last_occurrence, pool=master)
        return precision_at_k(fc.predictions, test), fc.fallback_count

    workers = threads if threads is not None else default_workers()
    if workers <= 1 or len(cells) == 1:
        results = [run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_cell, cells))

    rows: list[SweepRow] = []
    by_cell = dict(zip(cells, results))
    for k in ks:
        precs = []
        fbs = []
        for seed in seeds:
            prec, fb = by_cell[(k, seed)]
            rows.append(SweepRow(k, test_ratio, seed, prec, fb))
            precs.append(prec)
            fbs.append(fb)
        rows.append(SweepRow(k, test_ratio, None, sum(precs) / len(precs), sum(fbs) / len(fbs)))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], sink, header: bool = True) -> int:
    """Write sweep rows as CSV; returns the line count."""
    own = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    fh = open(sink, "w", encoding="ascii", newline="\n") if own else sink
    lines = 0
    try:
        if header:
            fh.write("k,test_ratio,seed,precision,fallbacks\n")
            lines += 1
        for r in rows:
            if r.seed is None:
                fh.write(f"{r.k},{r.test_ratio:g},mean,{r.precision:.6f},{r.fallbacks:.6f}\n")
            else:
                fh.write(f"{r.k},{r.test_ratio:g},{r.seed},{r.precision:.6f},{int(r.fallbacks)}\n")
            lines += 1
    finally:
        if own:
            fh.close()
    return lines
