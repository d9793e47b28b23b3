"""Combining, forced sweeps, and randomized acceptance on a hand cohort."""

import numpy as np
import pytest

from rocbench.core import CohortDataset, RatePair, tally_confusion
from rocbench.replacement import (
    AcceptanceSchedule,
    ReplacementVerdict,
    combine_decisions,
    randomized_accept,
    replacement_path,
    write_combined_csv,
    write_path_csv,
    write_randomized_csv,
)


def scorer(X):
    return X[:, 0]


def cohort(with_features=True):
    """Three makers, four cases each; machine at threshold 0.5 is perfect."""
    y = [1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 0, 0]
    y_hat = [0, 0, 1, 1, 1, 0, 1, 0, 1, 0, 0, 1]  # a all wrong, b all right, c half
    x = [0.9, 0.8, 0.1, 0.2, 0.7, 0.3, 0.6, 0.4, 0.6, 0.55, 0.45, 0.35]
    return CohortDataset(
        makers=["a", "b", "c"],
        maker_index=np.repeat([0, 1, 2], 4),
        y=np.array(y),
        y_hat=np.array(y_hat),
        features=np.array(x).reshape(-1, 1) if with_features else None,
    )


def verdicts():
    return [
        ReplacementVerdict("a", True, 0.5, {"min_loss": 0.0}),
        ReplacementVerdict("b", False, 0.5, {"min_loss": 0.9}),
        ReplacementVerdict("c", True, 0.5, {"min_loss": 0.3}),
    ]


class TestVerdict:
    def test_replace_needs_threshold(self):
        with pytest.raises(ValueError):
            ReplacementVerdict("a", True, None)

    def test_retain_may_skip_threshold(self):
        v = ReplacementVerdict("a", False, None)
        assert v.threshold is None


class TestCombineDecisions:
    def test_pooled_pair_recomputed_by_hand(self):
        data = cohort()
        res = combine_decisions(data, verdicts(), scorer)
        # makers a and c go to the machine, which is perfect here;
        # b keeps its own (also perfect) calls
        assert res.pair == RatePair(0.0, 1.0)
        assert res.replaced == ("a", "c")
        assert res.n_replaced == 2
        assert res.counts == tally_confusion(data.y, [1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 0, 0])

    def test_no_replacements_equals_raw(self):
        data = cohort()
        keep = [ReplacementVerdict(m, False, None) for m in "abc"]
        res = combine_decisions(data, keep, scorer)
        assert res.pair == RatePair(0.5, 0.5)
        assert res.counts == tally_confusion(data.y, data.y_hat)
        assert res.replaced == ()

    def test_mixed_replacement_oracle(self):
        data = cohort()
        only_a = [
            ReplacementVerdict("a", True, 0.5),
            ReplacementVerdict("b", False, None),
            ReplacementVerdict("c", False, None),
        ]
        res = combine_decisions(data, only_a, scorer)
        # a fixed (4 right), b right, c half wrong: alpha 1/6, beta 5/6
        assert res.pair == RatePair(pytest.approx(1 / 6), pytest.approx(5 / 6))

    def test_missing_verdict_rejected(self):
        with pytest.raises(ValueError, match="no verdict"):
            combine_decisions(cohort(), verdicts()[:2], scorer)

    def test_verdict_mapping_accepted(self):
        data = cohort()
        vmap = {v.maker_id: v for v in verdicts()}
        assert combine_decisions(data, vmap, scorer).pair == RatePair(0.0, 1.0)

    def test_features_required_for_replacement(self):
        with pytest.raises(ValueError, match="features"):
            combine_decisions(cohort(with_features=False), verdicts(), scorer)

    def test_scorer_shape_validated(self):
        with pytest.raises(ValueError, match="one score per case"):
            combine_decisions(cohort(), verdicts(), lambda X: X[:2, 0])

    def test_threshold_rule_is_strict_greater(self):
        data = cohort()
        # threshold exactly at a feature value: that case stays negative
        v = [
            ReplacementVerdict("a", True, 0.9, {}),
            ReplacementVerdict("b", False, None),
            ReplacementVerdict("c", False, None),
        ]
        res = combine_decisions(data, v, scorer)
        # a's machine calls are 0,0,0,0: two misses join c's errors
        assert res.counts.n10 == 3
        assert res.pair.beta == pytest.approx(0.5)


class TestReplacementPath:
    def test_sweep_points(self):
        data = cohort()
        pts = replacement_path(data, verdicts(), [0.0, 1 / 3, 2 / 3, 1.0], scorer)
        assert [p.n_replaced for p in pts] == [0, 1, 2, 3]
        assert pts[0].pair == RatePair(0.5, 0.5)
        # lowest-loss maker a is swapped first
        assert pts[1].pair == RatePair(pytest.approx(1 / 6), pytest.approx(5 / 6))
        assert pts[2].pair == RatePair(0.0, 1.0)
        assert pts[3].pair == RatePair(0.0, 1.0)

    def test_halves_round_up(self):
        pts = replacement_path(cohort(), verdicts(), [0.5], scorer)
        assert pts[0].n_replaced == 2  # 1.5 rounds to 2

    def test_rank_ties_break_by_maker_id(self):
        data = cohort()
        tied = [
            ReplacementVerdict("a", True, 0.5, {"min_loss": 0.0}),
            ReplacementVerdict("b", True, 0.5, {"min_loss": 0.0}),
            ReplacementVerdict("c", True, 0.5, {"min_loss": 0.0}),
        ]
        pts = replacement_path(data, tied, [1 / 3], scorer)
        # only "a" replaced: same pooled pair as the single-maker oracle
        assert pts[0].pair == RatePair(pytest.approx(1 / 6), pytest.approx(5 / 6))

    def test_every_maker_needs_threshold(self):
        bad = verdicts()
        bad[1] = ReplacementVerdict("b", False, None, {"min_loss": 0.9})
        with pytest.raises(ValueError, match="threshold"):
            replacement_path(cohort(), bad, [0.0], scorer)

    def test_min_loss_diagnostic_required(self):
        bad = [
            ReplacementVerdict("a", True, 0.5, {"min_loss": 0.0}),
            ReplacementVerdict("b", False, 0.5),
            ReplacementVerdict("c", True, 0.5, {"min_loss": 0.3}),
        ]
        with pytest.raises(ValueError, match="min_loss"):
            replacement_path(cohort(), bad, [0.0], scorer)

    def test_fraction_range_validated(self):
        with pytest.raises(ValueError):
            replacement_path(cohort(), verdicts(), [1.5], scorer)


class TestAcceptanceSchedule:
    def test_constant_resolve(self):
        lams = AcceptanceSchedule.constant(0.25, scope="all-makers").resolve(
            ["a", "b", "c"], {v.maker_id: v for v in verdicts()}
        )
        assert lams == {"a": 0.25, "b": 0.25, "c": 0.25}

    def test_scope_zeroes_retained_makers(self):
        lams = AcceptanceSchedule.constant(0.25).resolve(
            ["a", "b", "c"], {v.maker_id: v for v in verdicts()}
        )
        assert lams == {"a": 0.25, "b": 0.0, "c": 0.25}

    def test_linear_by_rank(self):
        vmap = {v.maker_id: v for v in verdicts()}
        lams = AcceptanceSchedule.linear_by_rank("less-capable-more").resolve(
            ["a", "b", "c"], vmap
        )
        # rank by descending loss: b, c, a -> weights 0, 1/2, 1
        assert lams == {"b": 0.0, "c": 0.5, "a": 1.0}

    def test_linear_by_rank_reversed(self):
        vmap = {v.maker_id: v for v in verdicts()}
        lams = AcceptanceSchedule.linear_by_rank("reverse").resolve(
            ["a", "b", "c"], vmap
        )
        assert lams == {"b": 1.0, "c": 0.5, "a": 0.0}

    def test_rank_needs_two_makers(self):
        vmap = {v.maker_id: v for v in verdicts()}
        with pytest.raises(ValueError):
            AcceptanceSchedule.linear_by_rank().resolve(["a"], vmap)

    def test_validation(self):
        with pytest.raises(ValueError):
            AcceptanceSchedule(kind="quadratic", lam=0.5)
        with pytest.raises(ValueError):
            AcceptanceSchedule.constant(1.5)
        with pytest.raises(ValueError):
            AcceptanceSchedule(kind="linear-by-rank")
        with pytest.raises(ValueError):
            AcceptanceSchedule.constant(0.5, scope="everyone")


class TestRandomizedAccept:
    def test_lambda_zero_equals_raw_exactly(self):
        data = cohort()
        sched = AcceptanceSchedule.constant(0.0, scope="all-makers")
        res = randomized_accept(data, verdicts(), sched, scorer, seed=123)
        assert res.counts == tally_confusion(data.y, data.y_hat)
        assert res.pair == RatePair(0.5, 0.5)

    def test_lambda_one_equals_machine_exactly(self):
        data = cohort()
        sched = AcceptanceSchedule.constant(1.0, scope="all-makers")
        res = randomized_accept(data, verdicts(), sched, scorer, seed=77)
        assert res.pair == RatePair(0.0, 1.0)

    def test_lambda_one_in_scope_equals_combined(self):
        data = cohort()
        sched = AcceptanceSchedule.constant(1.0)  # less-capable-only
        res = randomized_accept(data, verdicts(), sched, scorer, seed=5)
        combined = combine_decisions(data, verdicts(), scorer)
        assert res.counts == combined.counts

    def test_deterministic_in_seed(self):
        data = cohort()
        sched = AcceptanceSchedule.constant(0.5, scope="all-makers")
        a = randomized_accept(data, verdicts(), sched, scorer, seed=11)
        b = randomized_accept(data, verdicts(), sched, scorer, seed=11)
        assert a.counts == b.counts

    def test_reports_resolved_lambdas(self):
        data = cohort()
        sched = AcceptanceSchedule.constant(0.25)
        res = randomized_accept(data, verdicts(), sched, scorer, seed=0)
        assert res.lambdas == {"a": 0.25, "b": 0.0, "c": 0.25}

    def test_positive_lambda_needs_threshold(self):
        data = cohort()
        bad = [
            ReplacementVerdict("a", False, None),
            ReplacementVerdict("b", False, None),
            ReplacementVerdict("c", False, None),
        ]
        sched = AcceptanceSchedule.constant(1.0, scope="all-makers")
        with pytest.raises(ValueError, match="threshold"):
            randomized_accept(data, bad, sched, scorer, seed=0)

    def test_missing_verdict_rejected(self):
        sched = AcceptanceSchedule.constant(0.5)
        with pytest.raises(ValueError, match="no verdict"):
            randomized_accept(cohort(), verdicts()[:1], sched, scorer, seed=0)


class TestCsvWriters:
    def test_combined_rows(self, tmp_path):
        path = tmp_path / "combined.csv"
        write_combined_csv(path, [("raw", RatePair(0.5, 0.5), 0), ("bayes", RatePair(0.0, 1.0), 2)])
        assert path.read_bytes() == (
            b"label,fpr,tpr,n_replaced\r\nraw,0.5,0.5,0\r\nbayes,0,1,2\r\n"
        )

    def test_path_rows(self, tmp_path):
        data = cohort()
        pts = replacement_path(data, verdicts(), [0.0, 1.0], scorer)
        path = tmp_path / "path.csv"
        write_path_csv(path, pts)
        assert path.read_bytes() == b"fraction,fpr,tpr\r\n0,0.5,0.5\r\n1,0,1\r\n"

    def test_randomized_rows(self, tmp_path):
        path = tmp_path / "rand.csv"
        write_randomized_csv(path, [(0.25, RatePair(0.125, 0.875), 42)])
        assert path.read_bytes() == b"lambda,fpr,tpr,seed\r\n0.25,0.125,0.875,42\r\n"
