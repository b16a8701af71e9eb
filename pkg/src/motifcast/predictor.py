"""Generative forecasting: sample a delay, pick cold edge or hot extension.

Each step draws exactly two random numbers in fixed order (the waiting
time, then the branch choice), so runs are reproducible from the seed
alone. Candidate scoring is vectorized, but every near-maximal candidate
is re-scored with the scalar scoring functions before selection, so the
winner (and its reported score) is bit-identical to exhaustive scalar
evaluation regardless of vector math library details.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ingest import EdgeKey, TemporalGraph
from .motifs import MotifInstance, MotifVocabulary, OpenMotifPool, extend, single_instance, vocabulary
from .scoring import IMPOSSIBLE, Score, cold_log_posterior, hot_log_posterior
from .stats import MtmStats, scan_stream

# absolute / relative half-width of the vector-score window that gets the
# scalar re-check; far wider than any libm vs numpy discrepancy
_RECHECK_ABS = 1e-6
_RECHECK_REL = 1e-12


@dataclass(frozen=True)
class Prediction:
    """One emitted event. Node ids are internal (dense) ids.

    source_type/target_type are set for hot emissions only; score is the
    winning candidate's log-posterior; step is the 0-based emission index.
    """

    src: int
    dst: int
    time: float
    kind: str
    source_type: Optional[int]
    target_type: Optional[int]
    score: float
    step: int


class PredictorState:
    """Mutable forecasting state: pool, clock, recency table, RNG.

    Wraps every pool mutation so the vectorized scoring arrays stay in
    sync: per-edge rate/prior/recency columns (sorted by edge so argmax
    ties resolve lexicographically) and per-instance slot arrays whose
    type row indexes precomputed extension tables. Freed slots point at a
    sentinel type row whose priors are all impossible.
    """

    __slots__ = (
        "pool", "now", "last_occurrence", "rng", "vocab",
        "_edge_keys", "_edge_index", "_edge_rate", "_edge_logprior", "_edge_last",
        "_pair_rate", "_pair_logprior", "_pair_target", "_pair_width", "_dead_type",
        "_s_type", "_s_tau", "_s_uid", "_slot_of", "_free", "_n_slots",
    )

    def __init__(
        self,
        pool: OpenMotifPool,
        now: float,
        last_occurrence: dict[EdgeKey, float],
        rng: np.random.Generator,
        stats: MtmStats,
        vocab: MotifVocabulary,
    ) -> None:
        self.pool = pool
        self.now = now
        self.last_occurrence = last_occurrence
        self.rng = rng
        self.vocab = vocab
        self._build_edge_arrays(stats)
        self._build_pair_tables(stats)
        self._build_slots()

    def _build_edge_arrays(self, stats: MtmStats) -> None:
        keys = sorted(stats.edge_count)
        self._edge_keys = keys
        self._edge_index = {k: i for i, k in enumerate(keys)}
        n = len(keys)
        rate = np.empty(n)
        logprior = np.empty(n)
        last = np.empty(n)
        total = stats.edge_count_total
        for i, k in enumerate(keys):
            rate[i] = stats.lambda_edge[k]
            logprior[i] = math.log(stats.edge_count[k] / total)
            last[i] = self.last_occurrence[k]
        self._edge_rate = rate
        self._edge_logprior = logprior
        self._edge_last = last

    def _build_pair_tables(self, stats: MtmStats) -> None:
        vocab = self.vocab
        width = max((len(p) for p in vocab.hot_pairs), default=1)
        width = max(width, 1)
        v = len(vocab.types)
        # one extra sentinel row (index v) for freed slots
        rate = np.ones((v + 1, width))
        logprior = np.full((v + 1, width), IMPOSSIBLE)
        target = np.full((v + 1, width), -1, dtype=np.int64)
        for r in range(v):
            row_total = stats.trans_row_total.get(r, 0)
            table = vocab.extension_target[r]
            for j, pair in enumerate(vocab.hot_pairs[r]):
                s = table[pair]
                target[r, j] = s
                count = stats.trans_count.get((r, s), 0)
                if row_total > 0 and count > 0:
                    logprior[r, j] = math.log(count / row_total)
                    rate[r, j] = stats.lambda_type.get(s, stats.lambda_global)
        self._pair_rate = rate
        self._pair_logprior = logprior
        self._pair_target = target
        self._pair_width = width
        self._dead_type = v

    def _build_slots(self) -> None:
        instances = self.pool.instances()
        cap = max(64, 2 * len(instances) + 16)
        self._s_type = np.full(cap, self._dead_type, dtype=np.int32)
        self._s_tau = np.zeros(cap)
        self._s_uid = np.full(cap, -1, dtype=np.int64)
        self._slot_of: dict[int, int] = {}
        self._free: list[int] = []
        self._n_slots = 0
        for inst in instances:
            self._alloc_slot(inst)

    def _alloc_slot(self, inst: MotifInstance) -> None:
        if self._free:
            i = self._free.pop()
        else:
            if self._n_slots == len(self._s_uid):
                self._grow()
            i = self._n_slots
            self._n_slots += 1
        self._s_type[i] = inst.type_id
        self._s_tau[i] = inst.last_time
        self._s_uid[i] = inst.uid
        self._slot_of[inst.uid] = i

    def _free_slot(self, uid: int) -> None:
        i = self._slot_of.pop(uid)
        self._s_type[i] = self._dead_type
        self._s_uid[i] = -1
        self._free.append(i)

    def _grow(self) -> None:
        cap = 2 * len(self._s_uid)
        for name, fill in (("_s_type", self._dead_type), ("_s_tau", 0.0), ("_s_uid", -1)):
            old = getattr(self, name)
            new = np.full(cap, fill, dtype=old.dtype)
            new[: len(old)] = old
            setattr(self, name, new)

    def insert(self, inst: MotifInstance) -> None:
        self.pool.insert(inst)
        self._alloc_slot(inst)

    def replace(self, uid: int, inst: MotifInstance) -> None:
        self.pool.replace(uid, inst)
        self._free_slot(uid)
        self._alloc_slot(inst)

    def prune(self, stats: MtmStats) -> int:
        removed = self.pool.expire(self.now, stats.delta_c, stats.ell_max)
        for inst in removed:
            self._free_slot(inst.uid)
        return len(removed)

    def touch(self, key: EdgeKey) -> None:
        """Record an emission on key at the current time."""
        self.last_occurrence[key] = self.now
        idx = self._edge_index.get(key)
        if idx is not None:
            self._edge_last[idx] = self.now


def init_state(
    train: TemporalGraph,
    stats: MtmStats,
    seed: int,
    pool: OpenMotifPool | None = None,
    vocab: MotifVocabulary | None = None,
) -> PredictorState:
    """Forecasting state at the end of training.

    Replays the training pass to rebuild the open pool at the final
    timestamp, or clones ``pool`` (as returned by train_model) to skip the
    replay. The RNG is seeded deterministically; two calls with the same
    arguments produce identical states.
    """
    if vocab is None:
        vocab = vocabulary(stats.ell_max)
    if pool is None:
        work = scan_stream(train, stats.delta_c, stats.ell_max, vocab)
    else:
        work = pool.clone()
    work.prune(stats.t_max, stats.delta_c, stats.ell_max)
    rng = np.random.Generator(np.random.PCG64(seed))
    return PredictorState(work, float(stats.t_max), dict(stats.last_occurrence), rng, stats, vocab)


def sample_exponential(rate: float, rng: np.random.Generator) -> float:
    """Inverse-transform Exponential(rate) draw: -ln(U) / rate, U in (0, 1].

    Consumes exactly one uniform variate, so the per-step draw count is
    stable across code paths.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return -math.log1p(-rng.random()) / rate


def _window(scores: np.ndarray, best: float) -> float:
    return best - max(_RECHECK_ABS, abs(best) * _RECHECK_REL)


def solve_cold(state: PredictorState, stats: MtmStats) -> tuple[EdgeKey, Score]:
    """Best previously seen edge at the current time.

    Ties break toward the lexicographically smaller (src, dst). The
    returned score comes from the scalar scoring function.
    """
    if not state._edge_keys:
        raise ValueError("no observed edges to choose from")
    eps = stats.epsilon
    rate = state._edge_rate
    dt = state.now - state._edge_last
    lo = np.maximum(dt - eps, 0.0)
    width = np.where(dt >= eps, 2.0 * eps, dt + eps)
    scores = -rate * lo + np.log(-np.expm1(-rate * width)) + state._edge_logprior
    best = float(scores.max())
    cutoff = _window(scores, best)
    best_key = None
    best_score = -math.inf
    for i in np.nonzero(scores >= cutoff)[0].tolist():
        key = state._edge_keys[i]
        sc = cold_log_posterior(key, float(dt[i]), stats).log_posterior
        if sc > best_score:
            best_score = sc
            best_key = key
    return best_key, Score(best_score, "cold")


def solve_hot(
    state: PredictorState, stats: MtmStats
) -> Optional[tuple[MotifInstance, tuple[int, int], int, Score]]:
    """Best feasible extension of any open instance, or None.

    Candidates are ordered node pairs inside each instance; transitions
    with zero training prior are impossible. Ties break toward higher
    instance recency, then the smaller emitted (src, dst), then the older
    instance. The returned score comes from the scalar scoring function.
    """
    n = state._n_slots
    if n == 0 or len(state.pool) == 0:
        return None
    eps = stats.epsilon
    types = state._s_type[:n]
    rate = state._pair_rate[types]
    logprior = state._pair_logprior[types]
    dt = (state.now - state._s_tau[:n])[:, None]
    lo = np.maximum(dt - eps, 0.0)
    width = np.where(dt >= eps, 2.0 * eps, dt + eps)
    scores = -rate * lo + np.log(-np.expm1(-rate * width)) + logprior
    best = float(scores.max())
    if best == IMPOSSIBLE:
        return None
    cutoff = _window(scores, best)
    vocab = state.vocab
    pool = state.pool
    uid_arr = state._s_uid
    chosen = None
    chosen_rank = None
    rows, cols = np.nonzero(scores >= cutoff)
    for slot, j in zip(rows.tolist(), cols.tolist()):
        uid = int(uid_arr[slot])
        if uid < 0:
            continue
        m = pool.get(uid)
        r = m.type_id
        s = int(state._pair_target[r, j])
        la, lb = vocab.hot_pairs[r][j]
        a = m.nodes[la]
        b = m.nodes[lb]
        sc = hot_log_posterior(r, s, state.now - m.last_time, stats).log_posterior
        rank = (-sc, -m.last_time, (a, b), uid)
        if chosen_rank is None or rank < chosen_rank:
            chosen_rank = rank
            chosen = (m, (a, b), s, Score(sc, "hot"))
    return chosen


@dataclass
class Forecast:
    """A completed run: the emissions, fallback tally, and final state."""

    predictions: list[Prediction]
    fallback_count: int
    state: PredictorState


def run_forecast(
    train: TemporalGraph,
    stats: MtmStats,
    n: int,
    seed: int,
    update_last_occurrence: bool = True,
    pool: OpenMotifPool | None = None,
) -> Forecast:
    """Emit the next n events after the end of training.

    Per step: advance the clock by an Exponential(lambda_global) draw,
    prune the pool, then branch on a Bernoulli(p_cold) draw. Cold steps
    emit the best seen edge and open its size-1 instance; hot steps emit
    the best extension and replace the chosen instance. A hot step with no
    feasible candidate falls back to the cold rule and is tallied.

    ``update_last_occurrence=False`` keeps edge recency frozen at its
    training values (emissions then never reset their own waiting clock).
    Counts, rates, and priors are frozen either way.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 predictions, got {n}")
    if not stats.edge_count:
        raise ValueError("stats contain no observed edges")
    state = init_state(train, stats, seed, pool=pool)
    vocab = state.vocab
    lam = stats.lambda_global
    p_cold = stats.p_cold
    rng = state.rng
    predictions: list[Prediction] = []
    fallbacks = 0
    for step in range(n):
        state.now += sample_exponential(lam, rng)
        state.prune(stats)
        cold = rng.random() < p_cold
        hot_pick = None
        if not cold:
            hot_pick = solve_hot(state, stats)
            if hot_pick is None:
                fallbacks += 1
                cold = True
        if cold:
            key, score = solve_cold(state, stats)
            state.insert(single_instance(key[0], key[1], state.now))
            if update_last_occurrence:
                state.touch(key)
            predictions.append(
                Prediction(key[0], key[1], state.now, "cold", None, None, score.log_posterior, step)
            )
        else:
            m, (a, b), s, score = hot_pick
            state.replace(m.uid, extend(m, a, b, state.now, vocab))
            if update_last_occurrence:
                state.touch((a, b))
            predictions.append(
                Prediction(a, b, state.now, "hot", m.type_id, s, score.log_posterior, step)
            )
    return Forecast(predictions, fallbacks, state)


def forecast_events(
    train: TemporalGraph,
    stats: MtmStats,
    n: int,
    seed: int,
    update_last_occurrence: bool = True,
    pool: OpenMotifPool | None = None,
) -> list[Prediction]:
    """run_forecast returning just the prediction sequence."""
    return run_forecast(train, stats, n, seed, update_last_occurrence, pool).predictions


def write_predictions(predictions, original_ids, sink) -> int:
    """Write the prediction CSV; returns the line count including header.

    Node ids are mapped back through original_ids; times use fixed
    6-decimal precision.
    """
    own = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    fh = open(sink, "w", encoding="ascii", newline="\n") if own else sink
    try:
        fh.write("step,src,dst,time,kind,score\n")
        lines = 1
        for p in predictions:
            fh.write(
                f"{p.step},{original_ids[p.src]},{original_ids[p.dst]},"
                f"{p.time:.6f},{p.kind},{p.score:.9g}\n"
            )
            lines += 1
    finally:
        if own:
            fh.close()
    return lines
