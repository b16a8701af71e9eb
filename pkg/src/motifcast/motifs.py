"""Canonical temporal motif types and the open-instance pool.

A motif type is the node-anonymous shape of a short ordered sequence of
directed events. Nodes are relabeled 0, 1, 2, ... in order of first
appearance (source before destination within one event), so the first pair
is always (0, 1). The vocabulary for a size cap holds every type of size 1
up to the cap, ordered by (size, code); the single size-1 type sits at
index 0.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence


class MotifError(ValueError):
    """A pattern violates motif validity: connectivity, size cap, or a self-pair."""


@dataclass(frozen=True)
class MotifType:
    """Canonical motif: tuple of (src, dst) label pairs in temporal order."""

    code: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.code)

    @property
    def label_count(self) -> int:
        return max(max(a, b) for a, b in self.code) + 1

    def __str__(self) -> str:
        return format_code(self.code)


def format_code(code: Iterable[tuple[int, int]]) -> str:
    return ",".join(f"{a}>{b}" for a, b in code)


def parse_code(text: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for chunk in text.split(","):
        a, sep, b = chunk.partition(">")
        if not sep:
            raise MotifError(f"bad code chunk {chunk!r}")
        pairs.append((int(a), int(b)))
    return tuple(pairs)


def canonical_type(pattern: Sequence[tuple[int, int]], ell_max: int | None = None) -> MotifType:
    """Relabel a temporally ordered pair sequence by first appearance.

    Args:
        pattern: (src, dst) node pairs, earliest first. Node ids are
            arbitrary; self-pairs are invalid.
        ell_max: optional size cap; longer patterns raise.

    Returns:
        The canonical MotifType; its first pair is always (0, 1).

    Raises:
        MotifError: empty pattern, self-pair, size violation, or an event
            sharing no node with the earlier ones.
    """
    if not pattern:
        raise MotifError("empty pattern")
    if ell_max is not None and len(pattern) > ell_max:
        raise MotifError(f"pattern has {len(pattern)} events, size cap is {ell_max}")
    labels: dict = {}
    code = []
    for idx, (u, v) in enumerate(pattern):
        if u == v:
            raise MotifError(f"self-pair at position {idx}")
        if idx > 0 and u not in labels and v not in labels:
            raise MotifError(f"event {idx} shares no node with earlier events")
        for node in (u, v):
            if node not in labels:
                labels[node] = len(labels)
        code.append((labels[u], labels[v]))
    return MotifType(tuple(code))


def enumerate_types(ell: int) -> list[MotifType]:
    """All canonical types of exactly ``ell`` events, sorted by code.

    Sizes 1/2/3 yield 1/6/60 types. Generation extends canonical prefixes
    with every label pair drawn from the existing labels plus at most one
    fresh label, which preserves canonicity and spans every type once.
    """
    if ell < 1:
        raise MotifError(f"motif size must be >= 1, got {ell}")
    level: list[tuple[tuple[int, int], ...]] = [((0, 1),)]
    for _ in range(ell - 1):
        nxt = []
        for code in level:
            fresh = max(max(p) for p in code) + 1
            # a == b == fresh is impossible, so one endpoint always already exists
            for a in range(fresh + 1):
                for b in range(fresh + 1):
                    if a != b:
                        nxt.append(code + ((a, b),))
        level = nxt
    return [MotifType(c) for c in sorted(level)]


@dataclass(frozen=True)
class MotifVocabulary:
    """Indexed type universe for one size cap.

    ``extension_target[tid]`` maps a label pair (existing labels plus the
    one fresh label) to the extended type's index; empty for types already
    at the cap. ``hot_pairs[tid]`` lists the label pairs available when no
    new node may be introduced, in the fixed order used everywhere.
    """

    ell_max: int
    types: tuple[MotifType, ...]
    index: dict[tuple[tuple[int, int], ...], int]
    extension_target: tuple[dict[tuple[int, int], int], ...]
    hot_pairs: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def size(self) -> int:
        return len(self.types)


@lru_cache(maxsize=None)
def vocabulary(ell_max: int) -> MotifVocabulary:
    """Build (and cache) the vocabulary for sizes 1..ell_max."""
    if ell_max < 1:
        raise MotifError(f"ell_max must be >= 1, got {ell_max}")
    types: list[MotifType] = []
    for ell in range(1, ell_max + 1):
        types.extend(enumerate_types(ell))
    index = {t.code: i for i, t in enumerate(types)}
    assert types[0].code == ((0, 1),)
    ext: list[dict[tuple[int, int], int]] = []
    hot: list[tuple[tuple[int, int], ...]] = []
    for t in types:
        if t.size >= ell_max:
            ext.append({})
            hot.append(())
            continue
        n = t.label_count
        table = {}
        for a in range(n + 1):
            for b in range(n + 1):
                if a != b:
                    table[(a, b)] = index[t.code + ((a, b),)]
        ext.append(table)
        hot.append(tuple((a, b) for a in range(n) for b in range(n) if a != b))
    return MotifVocabulary(ell_max, tuple(types), index, tuple(ext), tuple(hot))


@dataclass(slots=True)
class MotifInstance:
    """One concrete open motif; treated as immutable once inside a pool.

    ``nodes`` is in first-appearance order, aligned with the type's labels.
    ``uid`` is assigned by OpenMotifPool.insert and is -1 before that.
    """

    type_id: int
    nodes: tuple[int, ...]
    events: tuple[tuple[int, int, float], ...]
    last_time: float
    uid: int = -1

    @property
    def size(self) -> int:
        return len(self.events)


def single_instance(u: int, v: int, t: float) -> MotifInstance:
    """Size-1 instance for a cold event; type index 0 is the size-1 type."""
    return MotifInstance(0, (u, v), ((u, v, t),), t)


def can_extend_observed(m: MotifInstance, event, delta_c: float, ell_max: int) -> bool:
    """True when an observed event may extend m.

    Requires room below the size cap, a gap of at most delta_c since the
    instance's last event (inclusive), and a shared node. ``event`` needs
    src/dst/time attributes and must not predate m.last_time.
    """
    return (
        m.size < ell_max
        and event.time - m.last_time <= delta_c
        and (event.src in m.nodes or event.dst in m.nodes)
    )


def candidate_extensions(
    m: MotifInstance, ell_max: int | None = None
) -> tuple[tuple[int, int], ...]:
    """Ordered node pairs the instance can emit without introducing new nodes.

    Order is fixed (label order of the first node, then the second), which
    downstream tie-breaking relies on. An instance already at the size cap
    has no extensions.
    """
    if ell_max is not None and m.size >= ell_max:
        return ()
    return tuple(itertools.permutations(m.nodes, 2))


def extend(m: MotifInstance, u: int, v: int, t: float, vocab: MotifVocabulary) -> MotifInstance:
    """Extension of m by one later adjacent event; returns a new instance.

    The new event may introduce at most one unseen node. The target type is
    looked up in the vocabulary's precomputed transition table, which equals
    canonical_type over the concatenated raw pattern.

    Raises:
        MotifError: the event shares no node with m, is a self-pair, predates
            m's last event, or m is already at the size cap.
    """
    if t < m.last_time:
        raise MotifError("event predates the instance's last event")
    nodes = m.nodes
    fresh = len(nodes)
    try:
        la = nodes.index(u)
    except ValueError:
        la = fresh
    try:
        lb = nodes.index(v)
    except ValueError:
        lb = fresh
    if la == lb:
        if u == v:
            raise MotifError("self-pair extension")
        raise MotifError("event shares no node with the instance")
    target = vocab.extension_target[m.type_id].get((la, lb))
    if target is None:
        raise MotifError("instance is already at the size cap")
    if la == fresh:
        nodes = nodes + (u,)
    elif lb == fresh:
        nodes = nodes + (v,)
    return MotifInstance(target, nodes, m.events + ((u, v, t),), t)


class OpenMotifPool:
    """Open motif instances with adjacency, size, and expiry indexes.

    Instances get a pool-assigned uid increasing in insertion order;
    iteration and candidate lookups are uid-ordered, which keeps every
    downstream accumulation and tie-break deterministic.
    """

    __slots__ = ("_items", "_by_node", "_by_size", "_heap", "_next_uid")

    def __init__(self) -> None:
        self._items: dict[int, MotifInstance] = {}
        self._by_node: dict[int, set[int]] = {}
        self._by_size: dict[int, set[int]] = {}
        self._heap: list[tuple[float, int]] = []
        self._next_uid = 0

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, uid: int) -> bool:
        return uid in self._items

    def get(self, uid: int) -> MotifInstance:
        return self._items[uid]

    def instances(self) -> list[MotifInstance]:
        """All instances in insertion (uid) order."""
        return list(self._items.values())

    def insert(self, inst: MotifInstance) -> int:
        uid = self._next_uid
        self._next_uid = uid + 1
        inst.uid = uid
        self._items[uid] = inst
        by_node = self._by_node
        for node in inst.nodes:
            s = by_node.get(node)
            if s is None:
                by_node[node] = {uid}
            else:
                s.add(uid)
        self._by_size.setdefault(inst.size, set()).add(uid)
        heapq.heappush(self._heap, (inst.last_time, uid))
        return uid

    def remove(self, uid: int) -> MotifInstance:
        inst = self._items.pop(uid)
        by_node = self._by_node
        for node in inst.nodes:
            s = by_node[node]
            s.discard(uid)
            if not s:
                del by_node[node]
        s = self._by_size[inst.size]
        s.discard(uid)
        if not s:
            del self._by_size[inst.size]
        # the heap entry stays behind; expiry skips uids no longer present
        return inst

    def replace(self, uid: int, new_inst: MotifInstance) -> int:
        self.remove(uid)
        return self.insert(new_inst)

    def candidates(self, u: int, v: int) -> list[int]:
        """uids of instances containing u or v, ascending."""
        a = self._by_node.get(u)
        b = self._by_node.get(v)
        if a and b:
            return sorted(a | b)
        if a:
            return sorted(a)
        if b:
            return sorted(b)
        return []

    def expire(self, now: float, delta_c: float, ell_max: int) -> list[MotifInstance]:
        """Remove and return instances at the size cap or older than now - delta_c."""
        removed: list[MotifInstance] = []
        oversized = [s for s in self._by_size if s >= ell_max]
        for size in sorted(oversized):
            for uid in sorted(self._by_size[size]):
                removed.append(self.remove(uid))
        cutoff = now - delta_c
        heap = self._heap
        items = self._items
        while heap and heap[0][0] < cutoff:
            _, uid = heapq.heappop(heap)
            if uid in items:
                removed.append(self.remove(uid))
        return removed

    def prune(self, now: float, delta_c: float, ell_max: int) -> int:
        """Expire stale and full instances; returns how many were dropped.

        Retention is inclusive: an instance whose last event is exactly
        delta_c old survives.
        """
        return len(self.expire(now, delta_c, ell_max))

    def clone(self) -> "OpenMotifPool":
        """Independent pool sharing the (immutable) instance objects."""
        other = OpenMotifPool.__new__(OpenMotifPool)
        other._items = dict(self._items)
        other._by_node = {k: set(v) for k, v in self._by_node.items()}
        other._by_size = {k: set(v) for k, v in self._by_size.items()}
        other._heap = list(self._heap)
        other._next_uid = self._next_uid
        return other

    def check_consistency(self) -> None:
        """Assert index integrity; test helper."""
        for uid, inst in self._items.items():
            assert inst.uid == uid
            for node in inst.nodes:
                assert uid in self._by_node.get(node, set())
            assert uid in self._by_size.get(inst.size, set())
        for node, uids in self._by_node.items():
            assert uids
            for uid in uids:
                assert node in self._items[uid].nodes
        for size, uids in self._by_size.items():
            assert uids
            for uid in uids:
                assert self._items[uid].size == size


def prune(pool: OpenMotifPool, now: float, delta_c: float, ell_max: int) -> int:
    """Functional form of OpenMotifPool.prune."""
    return pool.prune(now, delta_c, ell_max)


def write_vocabulary(vocab: MotifVocabulary, path) -> None:
    """Write one ``index<TAB>size<TAB>code`` line per type."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for i, t in enumerate(vocab.types):
            fh.write(f"{i}\t{t.size}\t{t}\n")


def read_vocabulary(path) -> list[MotifType]:
    """Parse a vocabulary file back into types, validating the index column."""
    out: list[MotifType] = []
    with open(path, encoding="ascii") as fh:
        for expected, line in enumerate(fh):
            idx_s, size_s, code_s = line.rstrip("\n").split("\t")
            if int(idx_s) != expected:
                raise MotifError(f"vocabulary index gap at {idx_s}")
            t = MotifType(parse_code(code_s))
            if t.size != int(size_s):
                raise MotifError(f"size mismatch on line {expected + 1}")
            out.append(t)
    return out
