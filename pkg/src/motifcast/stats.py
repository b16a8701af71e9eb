"""Training statistics frozen by one chronological pass over an event stream.

The pass maintains the open-instance pool and classifies every event as
cold (it starts a fresh size-1 instance) or hot (it extends every eligible
open instance). The resulting counts and rates parameterize prediction and
feature extraction; nothing here is updated afterwards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ingest import EdgeKey, TemporalGraph
from .motifs import (
    MotifInstance,
    MotifVocabulary,
    OpenMotifPool,
    extend,
    single_instance,
    vocabulary,
)

STATS_FORMAT_VERSION = 1

Observer = Callable[[int, tuple[int, int, float], list[tuple[MotifInstance, MotifInstance]]], None]


class DegenerateStreamError(ValueError):
    """The stream cannot support the model: no node ever repeats."""


class UndefinedIntensityError(ValueError):
    """An event rate was requested for under two timestamps or a zero span."""


def compute_delta_c(g: TemporalGraph) -> float:
    """Largest gap between consecutive events sharing a node.

    Each node's incident events (as source or destination) are ordered by
    time and consecutive gaps collected; the maximum over all nodes is the
    retention window: an instance idle longer than this can never be
    extended again.

    Raises:
        DegenerateStreamError: no node is incident to two events.
    """
    nodes = np.concatenate([g.src, g.dst])
    times = np.concatenate([g.time, g.time]).astype(np.float64)
    order = np.lexsort((times, nodes))
    nodes = nodes[order]
    times = times[order]
    same = nodes[1:] == nodes[:-1]
    if not same.any():
        raise DegenerateStreamError("no node participates in two events")
    return float((times[1:] - times[:-1])[same].max())


def intensity(timestamps) -> float:
    """Event rate of an ordered timestamp sequence: (k - 1) / (last - first).

    Equivalently the reciprocal of the mean gap.

    Raises:
        UndefinedIntensityError: fewer than two timestamps, or zero span.
    """
    n = len(timestamps)
    if n < 2:
        raise UndefinedIntensityError(f"need at least 2 timestamps, got {n}")
    span = float(timestamps[-1]) - float(timestamps[0])
    if span <= 0.0:
        raise UndefinedIntensityError("zero time span")
    return (n - 1) / span


@dataclass(frozen=True)
class MtmStats:
    """Frozen per-stream model parameters.

    Rates are events per time unit; every rate is finite and positive
    (sparse edges and types fall back to lambda_global). trans_count keys
    are (source type index, target type index) with the target one event
    larger. last_occurrence maps each observed edge to its latest training
    timestamp.
    """

    delta_c: float
    ell_max: int
    lambda_global: float
    lambda_edge: dict[EdgeKey, float]
    lambda_type: dict[int, float]
    trans_count: dict[tuple[int, int], int]
    trans_row_total: dict[int, int]
    edge_count: dict[EdgeKey, int]
    edge_count_total: int
    last_occurrence: dict[EdgeKey, float]
    p_cold: float
    t_max: float
    epsilon: float
    cold_count: int
    event_count: int


def scan_stream(
    g: TemporalGraph,
    delta_c: float,
    ell_max: int,
    vocab: MotifVocabulary | None = None,
    observer: Observer | None = None,
) -> OpenMotifPool:
    """Chronological pool pass shared by training, replay, and features.

    For each event: prune the pool at the event time, gather the instances
    that can absorb the event, then either extend every one of them (hot)
    or insert the event's own size-1 instance (cold). ``observer`` is
    called before the replacements land with (event index, (src, dst, time),
    [(old, new), ...]); an empty extension list marks a cold event.

    Pruning establishes eligibility: surviving candidates are below the
    size cap and within delta_c of the event (boundary inclusive).
    """
    if vocab is None:
        vocab = vocabulary(ell_max)
    pool = OpenMotifPool()
    src = g.src
    dst = g.dst
    time = g.time
    get = pool.get
    replace = pool.replace
    insert = pool.insert
    for i in range(len(g)):
        u = int(src[i])
        v = int(dst[i])
        t = float(time[i])
        pool.prune(t, delta_c, ell_max)
        exts = [(m, extend(m, u, v, t, vocab)) for m in map(get, pool.candidates(u, v))]
        if observer is not None:
            observer(i, (u, v, t), exts)
        if exts:
            for old, new in exts:
                replace(old.uid, new)
        else:
            insert(single_instance(u, v, t))
    return pool


def train_model(
    train: TemporalGraph,
    ell_max: int,
    delta_c: float,
    epsilon: float = 1.0,
    vocab: MotifVocabulary | None = None,
) -> tuple[MtmStats, OpenMotifPool]:
    """One training pass returning the stats and the still-open pool.

    The returned pool is pruned at the final timestamp, ready to seed a
    forecasting run without replaying the stream.
    """
    if len(train) == 0:
        raise ValueError("training stream is empty")
    if delta_c <= 0:
        raise ValueError(f"delta_c must be positive, got {delta_c}")
    if ell_max < 2:
        raise ValueError(f"ell_max must be >= 2, got {ell_max}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    lambda_global = intensity(train.time)

    trans_count: dict[tuple[int, int], int] = {}
    trans_row_total: dict[int, int] = {}
    type_times: dict[int, list[float]] = {}
    cold = 0

    def record(i, ev, exts):
        nonlocal cold
        if not exts:
            cold += 1
            return
        t = ev[2]
        for old, new in exts:
            key = (old.type_id, new.type_id)
            trans_count[key] = trans_count.get(key, 0) + 1
            trans_row_total[old.type_id] = trans_row_total.get(old.type_id, 0) + 1
            type_times.setdefault(new.type_id, []).append(t)

    pool = scan_stream(train, delta_c, ell_max, vocab, record)
    pool.prune(float(train.t_max), delta_c, ell_max)

    edge_count: dict[EdgeKey, int] = {}
    last_occurrence: dict[EdgeKey, float] = {}
    lambda_edge: dict[EdgeKey, float] = {}
    for key, times in train.edge_timestamps.items():
        edge_count[key] = len(times)
        last_occurrence[key] = float(times[-1])
        try:
            lambda_edge[key] = intensity(times)
        except UndefinedIntensityError:
            lambda_edge[key] = lambda_global

    lambda_type: dict[int, float] = {}
    for tid in sorted(type_times):
        try:
            lambda_type[tid] = intensity(type_times[tid])
        except UndefinedIntensityError:
            lambda_type[tid] = lambda_global

    stats = MtmStats(
        delta_c=float(delta_c),
        ell_max=ell_max,
        lambda_global=lambda_global,
        lambda_edge=lambda_edge,
        lambda_type=lambda_type,
        trans_count=trans_count,
        trans_row_total=trans_row_total,
        edge_count=edge_count,
        edge_count_total=len(train),
        last_occurrence=last_occurrence,
        p_cold=cold / len(train),
        t_max=float(train.t_max),
        epsilon=float(epsilon),
        cold_count=cold,
        event_count=len(train),
    )
    return stats, pool


def build_stats(
    train: TemporalGraph,
    ell_max: int,
    delta_c: float,
    epsilon: float = 1.0,
    vocab: MotifVocabulary | None = None,
) -> MtmStats:
    """Training statistics alone; see train_model to also keep the pool."""
    return train_model(train, ell_max, delta_c, epsilon, vocab)[0]


def save_stats(stats: MtmStats, path) -> None:
    """Write a versioned JSON snapshot; floats round-trip exactly."""
    doc = {
        "format": STATS_FORMAT_VERSION,
        "ell_max": stats.ell_max,
        "delta_c": stats.delta_c,
        "epsilon": stats.epsilon,
        "p_cold": stats.p_cold,
        "lambda_global": stats.lambda_global,
        "t_max": stats.t_max,
        "cold_count": stats.cold_count,
        "event_count": stats.event_count,
        "edge_count_total": stats.edge_count_total,
        "edges": [
            [s, d, stats.edge_count[(s, d)], stats.last_occurrence[(s, d)], stats.lambda_edge[(s, d)]]
            for s, d in sorted(stats.edge_count)
        ],
        "transitions": [[r, s, c] for (r, s), c in sorted(stats.trans_count.items())],
        "type_rates": [[tid, rate] for tid, rate in sorted(stats.lambda_type.items())],
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def load_stats(path) -> MtmStats:
    """Rebuild MtmStats from a save_stats snapshot."""
    with open(path, encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != STATS_FORMAT_VERSION:
        raise ValueError(f"unsupported stats format {doc.get('format')!r}")
    edge_count: dict[EdgeKey, int] = {}
    last_occurrence: dict[EdgeKey, float] = {}
    lambda_edge: dict[EdgeKey, float] = {}
    for s, d, count, last, rate in doc["edges"]:
        key = (int(s), int(d))
        edge_count[key] = int(count)
        last_occurrence[key] = float(last)
        lambda_edge[key] = float(rate)
    trans_count: dict[tuple[int, int], int] = {}
    trans_row_total: dict[int, int] = {}
    for r, s, c in doc["transitions"]:
        trans_count[(int(r), int(s))] = int(c)
        trans_row_total[int(r)] = trans_row_total.get(int(r), 0) + int(c)
    lambda_type = {int(tid): float(rate) for tid, rate in doc["type_rates"]}
    return MtmStats(
        delta_c=float(doc["delta_c"]),
        ell_max=int(doc["ell_max"]),
        lambda_global=float(doc["lambda_global"]),
        lambda_edge=lambda_edge,
        lambda_type=lambda_type,
        trans_count=trans_count,
        trans_row_total=trans_row_total,
        edge_count=edge_count,
        edge_count_total=int(doc["edge_count_total"]),
        last_occurrence=last_occurrence,
        p_cold=float(doc["p_cold"]),
        t_max=float(doc["t_max"]),
        epsilon=float(doc["epsilon"]),
        cold_count=int(doc["cold_count"]),
        event_count=int(doc["event_count"]),
    )
