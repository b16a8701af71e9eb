import math

import mpmath
import pytest

from motifcast import (
    IMPOSSIBLE,
    build_stats,
    cold_log_posterior,
    compute_delta_c,
    hot_log_posterior,
    log_waiting_likelihood,
    parse_events,
    vocabulary,
)
from motifcast.stats import MtmStats

from oracles import raw_waiting_mass


def hand_stats(**overrides):
    """Minimal frozen-parameter bundle for direct scoring tests."""
    base = dict(
        delta_c=10.0,
        ell_max=3,
        lambda_global=0.5,
        lambda_edge={(0, 1): 0.5},
        lambda_type={},
        trans_count={},
        trans_row_total={},
        edge_count={(0, 1): 1},
        edge_count_total=1,
        last_occurrence={(0, 1): 0.0},
        p_cold=0.5,
        t_max=0.0,
        epsilon=1.0,
        cold_count=1,
        event_count=2,
    )
    base.update(overrides)
    return MtmStats(**base)


class TestWaitingLikelihood:
    def test_unit_case_exact(self):
        # rate=1, delta_t=1, eps=1: integral over [0, 2] of e^-x is 1 - e^-2
        expected = math.log(1 - math.exp(-2.0))
        assert log_waiting_likelihood(1.0, 1.0, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_interior_case_exact(self):
        # rate=2, delta_t=5, eps=1: 2 * integral over [4, 6] = e^-8 - e^-12
        expected = -8.0 + math.log(1 - math.exp(-4.0))
        assert log_waiting_likelihood(2.0, 5.0, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_tiny_rate_huge_gap_matches_mpmath(self):
        got = log_waiting_likelihood(1e-9, 1e6, 1.0)
        assert math.isfinite(got)
        with mpmath.workdps(50):
            lo = mpmath.mpf(1e6) - 1
            hi = mpmath.mpf(1e6) + 1
            rate = mpmath.mpf(1e-9)
            want = mpmath.log(mpmath.exp(-rate * lo) - mpmath.exp(-rate * hi))
        assert got == pytest.approx(float(want), rel=1e-9)

    def test_matches_quadrature_oracle(self):
        for rate in (0.01, 0.5, 1.0, 7.0):
            for dt in (0.0, 0.3, 1.0, 2.5, 40.0):
                want = float(mpmath.log(raw_waiting_mass(rate, dt, 1.0)))
                assert log_waiting_likelihood(rate, dt, 1.0) == pytest.approx(want, rel=1e-10)

    def test_strictly_decreasing_beyond_epsilon(self):
        vals = [log_waiting_likelihood(0.3, dt, 1.0) for dt in (1.0, 2.0, 5.0, 50.0, 5000.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_is_log_probability(self):
        for rate in (1e-6, 0.1, 1.0, 100.0):
            for dt in (0.0, 0.5, 1.0, 10.0, 1e8):
                v = log_waiting_likelihood(rate, dt, 1.0)
                assert not math.isnan(v)
                assert v <= 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            log_waiting_likelihood(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            log_waiting_likelihood(-1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            log_waiting_likelihood(1.0, -0.1, 1.0)
        with pytest.raises(ValueError):
            log_waiting_likelihood(1.0, 1.0, 0.0)


class TestColdScore:
    def test_prior_separates_counts(self):
        stats = hand_stats(
            lambda_edge={(0, 1): 0.5, (2, 3): 0.5},
            edge_count={(0, 1): 3, (2, 3): 1},
            edge_count_total=4,
        )
        a = cold_log_posterior((0, 1), 2.0, stats)
        b = cold_log_posterior((2, 3), 2.0, stats)
        # same rate, same gap: difference is exactly the count ratio
        assert a.log_posterior - b.log_posterior == pytest.approx(math.log(3), abs=1e-12)
        assert a.kind == "cold"

    def test_single_edge_prior_is_zero(self):
        stats = hand_stats()
        got = cold_log_posterior((0, 1), 2.0, stats)
        assert got.log_posterior == pytest.approx(
            log_waiting_likelihood(0.5, 2.0, 1.0), abs=1e-12
        )

    def test_unseen_edge_raises(self):
        with pytest.raises(KeyError):
            cold_log_posterior((8, 9), 2.0, hand_stats())

    def test_not_impossible(self):
        assert not cold_log_posterior((0, 1), 2.0, hand_stats()).impossible


class TestHotScore:
    def make(self):
        return hand_stats(
            lambda_type={4: 2.0, 5: 2.0},
            trans_count={(0, 4): 9, (0, 5): 1},
            trans_row_total={0: 10},
        )

    def test_prior_separates_counts(self):
        stats = self.make()
        a = hot_log_posterior(0, 4, 1.0, stats)
        b = hot_log_posterior(0, 5, 1.0, stats)
        assert a.log_posterior - b.log_posterior == pytest.approx(math.log(9), abs=1e-12)
        assert a.kind == "hot"

    def test_rate_falls_back_to_global(self):
        stats = hand_stats(trans_count={(0, 4): 1}, trans_row_total={0: 1})
        got = hot_log_posterior(0, 4, 3.0, stats)
        want = log_waiting_likelihood(stats.lambda_global, 3.0, 1.0)
        assert got.log_posterior == pytest.approx(want, abs=1e-12)

    def test_unobserved_transition_impossible(self):
        got = hot_log_posterior(0, 6, 1.0, self.make())
        assert got.impossible and got.log_posterior == IMPOSSIBLE

    def test_empty_row_impossible(self):
        got = hot_log_posterior(2, 4, 1.0, self.make())
        assert got.impossible

    def test_smoothing_revives_unobserved(self):
        stats = self.make()
        got = hot_log_posterior(0, 6, 1.0, stats, smoothing=1.0)
        assert not got.impossible
        # type 0 has 6 reachable targets: prior is (0 + 1) / (10 + 6)
        reachable = len(vocabulary(3).extension_target[0])
        assert reachable == 6
        want = log_waiting_likelihood(stats.lambda_global, 1.0, 1.0) + math.log(1 / 16)
        assert got.log_posterior == pytest.approx(want, abs=1e-12)

    def test_count_scaling_invariance(self):
        a = hand_stats(trans_count={(0, 4): 3, (0, 5): 1}, trans_row_total={0: 4})
        b = hand_stats(trans_count={(0, 4): 300, (0, 5): 100}, trans_row_total={0: 400})
        for s in (4, 5):
            assert hot_log_posterior(0, s, 2.0, a).log_posterior == pytest.approx(
                hot_log_posterior(0, s, 2.0, b).log_posterior, abs=1e-12
            )


class TestAgainstRawSpace:
    """Scores must rank edges exactly as the unlogged posterior does."""

    def test_cold_argmax_matches_mpmath(self):
        lines = [
            "1 2 0", "1 2 4", "1 2 6",
            "3 4 1", "3 4 19",
            "5 6 2", "5 6 3", "5 6 5", "5 6 21",
            "1 4 8", "2 6 11",
        ]
        g = parse_events(lines)
        stats = build_stats(g, ell_max=3, delta_c=compute_delta_c(g))
        now = g.t_max + 2.5
        best_fast = None
        best_raw = None
        for e in sorted(stats.edge_count):
            dt = now - stats.last_occurrence[e]
            fast = cold_log_posterior(e, dt, stats).log_posterior
            with mpmath.workdps(40):
                raw = raw_waiting_mass(stats.lambda_edge[e], dt, stats.epsilon) * (
                    mpmath.mpf(stats.edge_count[e]) / stats.edge_count_total
                )
                assert fast == pytest.approx(float(mpmath.log(raw)), rel=1e-9)
            if best_fast is None or fast > best_fast[0]:
                best_fast = (fast, e)
            if best_raw is None or raw > best_raw[0]:
                best_raw = (raw, e)
        assert best_fast[1] == best_raw[1]
