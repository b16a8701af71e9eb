"""Log-space scores: waiting-time likelihood plus empirical priors.

Both score families share the same likelihood: the probability that an
exponential waiting time lands inside a small window around the observed
gap. Cold scores rank previously seen edges by recency and frequency; hot
scores rank type transitions of open instances. A score of -inf is the
explicit impossible marker (zero prior); NaN is never produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ingest import EdgeKey
from .motifs import vocabulary
from .stats import MtmStats

IMPOSSIBLE = float("-inf")


@dataclass(frozen=True)
class Score:
    """Unnormalized log-posterior; -inf marks an impossible candidate."""

    log_posterior: float
    kind: str

    @property
    def impossible(self) -> bool:
        return self.log_posterior == IMPOSSIBLE


def log_waiting_likelihood(rate: float, delta_t: float, epsilon: float) -> float:
    """Log-probability that an Exponential(rate) delay falls near delta_t.

    Integrates the density over [max(0, delta_t - epsilon), delta_t + epsilon],
    evaluated as -rate * lo + log(1 - exp(-rate * width)) so large gaps
    stay finite instead of underflowing. Strictly decreasing in delta_t
    once delta_t >= epsilon.

    Raises:
        ValueError: rate, epsilon, or delta_t out of domain.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if delta_t < 0:
        raise ValueError(f"delta_t must be non-negative, got {delta_t}")
    if delta_t >= epsilon:
        lo = delta_t - epsilon
        width = 2.0 * epsilon
    else:
        lo = 0.0
        width = delta_t + epsilon
    return -rate * lo + math.log(-math.expm1(-rate * width))


def cold_log_posterior(e: EdgeKey, delta_t: float, stats: MtmStats) -> Score:
    """Score a previously seen edge: waiting likelihood plus log frequency share.

    Raises:
        KeyError: the edge was never observed; callers draw candidates
            from the observed edge set only.
    """
    count = stats.edge_count.get(e)
    if count is None:
        raise KeyError(f"edge {e} was never observed")
    prior = math.log(count / stats.edge_count_total)
    return Score(log_waiting_likelihood(stats.lambda_edge[e], delta_t, stats.epsilon) + prior, "cold")


def hot_log_posterior(
    r: int,
    s: int,
    delta_t: float,
    stats: MtmStats,
    smoothing: float = 0.0,
) -> Score:
    """Score the type transition r -> s for an instance idle for delta_t.

    The prior is the empirical share of s among r's observed extensions;
    an unobserved transition (or an unseen source row) is impossible.
    ``smoothing`` > 0 applies additive smoothing over the structurally
    reachable targets of r instead, making every reachable target scorable.
    """
    count = stats.trans_count.get((r, s), 0)
    row = stats.trans_row_total.get(r, 0)
    if smoothing > 0.0:
        reachable = len(vocabulary(stats.ell_max).extension_target[r])
        if reachable == 0:
            return Score(IMPOSSIBLE, "hot")
        prior = math.log((count + smoothing) / (row + smoothing * reachable))
    else:
        if count == 0 or row == 0:
            return Score(IMPOSSIBLE, "hot")
        prior = math.log(count / row)
    rate = stats.lambda_type.get(s, stats.lambda_global)
    return Score(log_waiting_likelihood(rate, delta_t, stats.epsilon) + prior, "hot")
