"""Timestamped edge-list parsing, normalization, and chronological splits."""

from __future__ import annotations

import gzip
import math
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np

# Directed static pair (src, dst) in the dense internal id space.
EdgeKey = tuple[int, int]


class ParseError(ValueError):
    """Malformed input; carries the 1-based line number (0 for stream-level errors)."""

    def __init__(self, line_number: int, message: str):
        prefix = f"line {line_number}: " if line_number else ""
        super().__init__(prefix + message)
        self.line_number = line_number


class Event(NamedTuple):
    src: int
    dst: int
    time: int
    seq: int


@dataclass
class TemporalGraph:
    """Column-oriented event stream sorted by (timestamp, input order).

    Node ids are remapped to a dense 0-based range ordered by original id;
    ``original_ids[dense_id]`` recovers the input identifier. Splits made by
    chronological_split keep the parent's id space without remapping, so
    events stay directly comparable across train and test.
    """

    src: np.ndarray
    dst: np.ndarray
    time: np.ndarray
    node_count: int
    original_ids: np.ndarray
    dropped_self_loops: int = 0

    def __len__(self) -> int:
        return len(self.time)

    @property
    def t_min(self) -> int:
        return int(self.time[0])

    @property
    def t_max(self) -> int:
        return int(self.time[-1])

    @property
    def id_space(self) -> int:
        """Size of the dense id universe (shared by splits of one parse)."""
        return len(self.original_ids)

    def event(self, i: int) -> Event:
        return Event(int(self.src[i]), int(self.dst[i]), int(self.time[i]), i)

    def iter_events(self) -> Iterator[Event]:
        for i, (u, v, t) in enumerate(
            zip(self.src.tolist(), self.dst.tolist(), self.time.tolist())
        ):
            yield Event(u, v, t, i)

    @cached_property
    def edge_timestamps(self) -> dict[EdgeKey, np.ndarray]:
        """Event times per directed pair, chronological, keyed in sorted pair order."""
        stride = self.id_space
        key = self.src * stride + self.dst
        order = np.argsort(key, kind="stable")
        sk = key[order]
        st = self.time[order]
        out: dict[EdgeKey, np.ndarray] = {}
        if len(sk) == 0:
            return out
        bounds = np.flatnonzero(sk[1:] != sk[:-1]) + 1
        starts = [0, *bounds.tolist(), len(sk)]
        for a, b in zip(starts[:-1], starts[1:]):
            k = int(sk[a])
            out[(k // stride, k % stride)] = st[a:b]
        return out

    @cached_property
    def static_edge_count(self) -> int:
        if len(self) == 0:
            return 0
        return int(np.unique(self.src * self.id_space + self.dst).size)


@dataclass(frozen=True)
class StreamSummary:
    nodes: int
    events: int
    static_edges: int
    timespan_days: int


def parse_events(source: Iterable[str | bytes]) -> TemporalGraph:
    """Parse ``src dst time`` lines into a TemporalGraph.

    Fields are non-negative decimal integers separated by whitespace or
    commas. Blank lines and lines starting with '#' are skipped. Self-loop
    events are dropped but counted in ``dropped_self_loops``. Events are
    sorted by timestamp with input order breaking ties, and node ids are
    remapped to a dense 0-based range (ordered by original id value).

    Args:
        source: iterable of text or byte lines, e.g. an open file.

    Raises:
        ParseError: on a malformed line (with its line number) or when the
            stream contains no events at all.
    """
    srcs = array("q")
    dsts = array("q")
    times = array("q")
    dropped = 0
    for lineno, raw in enumerate(source, 1):
        line = raw.decode("utf-8", "replace") if isinstance(raw, (bytes, bytearray)) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 3 fields, got {len(parts)}")
        try:
            u = int(parts[0])
            v = int(parts[1])
            t = int(parts[2])
        except ValueError:
            raise ParseError(lineno, f"non-integer field in {line!r}") from None
        if u < 0 or v < 0 or t < 0:
            raise ParseError(lineno, "negative id or timestamp")
        if u == v:
            dropped += 1
            continue
        srcs.append(u)
        dsts.append(v)
        times.append(t)
    if not times:
        raise ParseError(0, "stream contains no events")
    src = np.frombuffer(srcs, dtype=np.int64)
    dst = np.frombuffer(dsts, dtype=np.int64)
    t = np.frombuffer(times, dtype=np.int64)
    order = np.argsort(t, kind="stable")
    src, dst, t = src[order], dst[order], t[order]
    originals = np.unique(np.concatenate([src, dst]))
    src = np.searchsorted(originals, src)
    dst = np.searchsorted(originals, dst)
    return TemporalGraph(src, dst, t, len(originals), originals, dropped)


def load_graph(path) -> TemporalGraph:
    """Read an edge-list file, transparently decompressing ``*.gz``."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8", errors="replace") as fh:
        return parse_events(fh)


def chronological_split(g: TemporalGraph, test_ratio: float) -> tuple[TemporalGraph, TemporalGraph]:
    """Split off the last ceil(test_ratio * |E|) events as the test stream.

    The clamp keeps at least one training event, so extreme ratios shave the
    test side rather than emptying train. Timestamps and node ids are kept
    as-is; ``node_count`` is recomputed as the distinct nodes occurring in
    each side.
    """
    if not 0.0 < test_ratio < 1.0:
        raise ValueError(f"test_ratio must be in (0, 1), got {test_ratio}")
    n = len(g)
    n_test = min(math.ceil(test_ratio * n), n - 1)
    cut = n - n_test

    def piece(lo: int, hi: int) -> TemporalGraph:
        s, d, tt = g.src[lo:hi], g.dst[lo:hi], g.time[lo:hi]
        distinct = int(np.union1d(s, d).size)
        return TemporalGraph(s, d, tt, distinct, g.original_ids, 0)

    return piece(0, cut), piece(cut, n)


def summary_stats(g: TemporalGraph) -> StreamSummary:
    """Dataset-card numbers: distinct nodes, events, static pairs, span in days."""
    span_days = (g.t_max - g.t_min) / 86400.0
    return StreamSummary(
        nodes=g.node_count,
        events=len(g),
        static_edges=g.static_edge_count,
        timespan_days=int(math.floor(span_days + 0.5)),
    )


def write_events(g: TemporalGraph, sink: IO[str]) -> int:
    """Serialize events as ``src dst time`` lines using original ids.

    Returns the number of lines written. Re-parsing the output reproduces
    the same (src, dst, time, seq) quadruples.
    """
    orig = g.original_ids.tolist()
    n = 0
    for u, v, t in zip(g.src.tolist(), g.dst.tolist(), g.time.tolist()):
        sink.write(f"{orig[u]} {orig[v]} {t}\n")
        n += 1
    return n
