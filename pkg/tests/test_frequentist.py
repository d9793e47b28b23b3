"""Sampling covariance, ellipse sets, three-way calls, delta test, CSV."""

import numpy as np
import pytest

from rocbench.core import ConfusionCounts, RatePair
from rocbench.frequentist import (
    CaseLabel,
    asymptotic_covariance,
    benchmark_maker_frequentist,
    bootstrap_covariance,
    bootstrap_pairs,
    classify_maker,
    confidence_ellipse,
    delta_method_test,
    read_frequentist_csv,
    sample_thresholds,
    write_frequentist_csv,
)
from rocbench.roc import RocCurve

CHI2_2DF_95 = 5.991464547107979


def diagonal():
    return RocCurve.from_pairs([(0.0, 0.0), (1.0, 1.0)])


def two_segment():
    return RocCurve.from_pairs([(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)])


class TestAsymptoticCovariance:
    def test_balanced_half_rates(self):
        counts = ConfusionCounts(n11=5, n01=5, n10=5, n00=5)
        np.testing.assert_allclose(asymptotic_covariance(counts), np.diag([0.5, 0.5]))

    def test_worked_example(self):
        # alpha 0.3, beta 0.6, base rate 0.1
        counts = ConfusionCounts(n11=12, n01=54, n10=8, n00=126)
        cov = asymptotic_covariance(counts)
        np.testing.assert_allclose(cov, np.diag([0.21 / 0.9, 0.24 / 0.1]))

    def test_boundary_rate_collapses_axis(self):
        counts = ConfusionCounts(n11=10, n01=0, n10=10, n00=20)
        cov = asymptotic_covariance(counts)
        assert cov[0, 0] == 0.0
        assert cov[1, 1] > 0.0

    def test_off_diagonal_zero(self):
        counts = ConfusionCounts(n11=30, n01=20, n10=20, n00=130)
        cov = asymptotic_covariance(counts)
        assert cov[0, 1] == 0.0 and cov[1, 0] == 0.0


class TestBootstrap:
    COUNTS = ConfusionCounts(n11=60, n01=40, n10=40, n00=160)

    def test_rates_always_in_unit_square(self):
        boot = bootstrap_pairs(self.COUNTS, 200, 0)
        assert boot.alphas.min() >= 0 and boot.alphas.max() <= 1
        assert boot.betas.min() >= 0 and boot.betas.max() <= 1
        assert boot.alphas.size == 200

    def test_mean_near_sample_rates(self):
        boot = bootstrap_pairs(self.COUNTS, 2000, 1)
        se_a = boot.alphas.std(ddof=1) / np.sqrt(2000)
        se_b = boot.betas.std(ddof=1) / np.sqrt(2000)
        assert abs(boot.alphas.mean() - 0.2) < 3 * se_a
        assert abs(boot.betas.mean() - 0.6) < 3 * se_b

    def test_deterministic(self):
        a = bootstrap_pairs(self.COUNTS, 100, 42)
        b = bootstrap_pairs(self.COUNTS, 100, 42)
        np.testing.assert_array_equal(a.alphas, b.alphas)
        np.testing.assert_array_equal(a.betas, b.betas)
        assert a.n_redrawn == b.n_redrawn

    def test_all_cases_identical_gives_zero_variance(self):
        # every unit is a positive prediction: rates are (1, 1) in every resample
        counts = ConfusionCounts(n11=40, n01=60, n10=0, n00=0)
        boot = bootstrap_pairs(counts, 50, 0)
        assert set(boot.alphas.tolist()) == {1.0}
        assert set(boot.betas.tolist()) == {1.0}

    def test_degenerate_counts_abort(self):
        counts = ConfusionCounts(n11=1, n01=0, n10=0, n00=1)
        with pytest.raises(RuntimeError, match="degenerate"):
            bootstrap_pairs(counts, 1, 3)

    def test_covariance_matches_manual(self):
        boot = bootstrap_pairs(self.COUNTS, 300, 7)
        cov = bootstrap_covariance(self.COUNTS, 300, 7)
        manual = np.cov(np.vstack([boot.alphas, boot.betas]), ddof=1)
        np.testing.assert_allclose(cov, manual)

    def test_resample_count_validated(self):
        with pytest.raises(ValueError):
            bootstrap_pairs(self.COUNTS, 0, 0)


class TestConfidenceEllipse:
    def test_quantile_value(self):
        e = confidence_ellipse(RatePair(0.5, 0.5), np.eye(2) * 1e-4, 0.95)
        assert e.chi2_quantile == pytest.approx(CHI2_2DF_95, abs=1e-12)
        assert e.chi2_quantile == pytest.approx(-2.0 * np.log(0.05), abs=1e-12)

    def test_reference_point_frozen(self):
        e = confidence_ellipse(RatePair(0.2, 0.3), np.diag([0.0004, 0.0009]), 0.95)
        p = e.reference_point()
        assert p.alpha == pytest.approx(0.15104506338638368, abs=1e-15)
        assert p.beta == pytest.approx(0.37343240492042445, abs=1e-15)

    def test_reference_point_clipped(self):
        e = confidence_ellipse(RatePair(0.01, 0.99), np.diag([0.01, 0.01]), 0.95)
        p = e.reference_point()
        assert p.alpha == 0.0 and p.beta == 1.0

    def test_zero_covariance_floors_to_point(self):
        e = confidence_ellipse(RatePair(0.4, 0.6), np.zeros((2, 2)), 0.95)
        p = e.reference_point()
        assert p.alpha == pytest.approx(0.4, abs=1e-4)
        assert p.beta == pytest.approx(0.6, abs=1e-4)

    def test_contains_center_not_far_point(self):
        e = confidence_ellipse(RatePair(0.5, 0.5), np.eye(2) * 1e-4, 0.95)
        assert e.contains((0.5, 0.5))
        assert not e.contains((0.9, 0.9))

    def test_boundary_on_shell(self):
        cov = np.array([[4e-4, 1e-4], [1e-4, 9e-4]])
        e = confidence_ellipse(RatePair(0.5, 0.5), cov, 0.9)
        pts = e.boundary(256)
        inv = np.linalg.inv(cov)
        d = pts - [0.5, 0.5]
        maha = np.einsum("ij,jk,ik->i", d, inv, d)
        np.testing.assert_allclose(maha, e.chi2_quantile, rtol=1e-9)

    def test_boundary_clipped_to_unit_square(self):
        e = confidence_ellipse(RatePair(0.01, 0.99), np.diag([0.01, 0.01]), 0.95)
        pts = e.boundary()
        assert pts.min() >= 0.0 and pts.max() <= 1.0

    def test_level_validated(self):
        with pytest.raises(ValueError):
            confidence_ellipse(RatePair(0.5, 0.5), np.eye(2), 1.0)


class TestClassifyMaker:
    def test_case1_far_below(self):
        e = confidence_ellipse(RatePair(0.5, 0.3), np.diag([1e-6, 1e-6]), 0.95)
        assert classify_maker(e, diagonal()) is CaseLabel.CASE1
        assert CaseLabel.CASE1.replace

    def test_case2_corner_above_but_ellipse_below(self):
        # circle of radius ~0.049 centered 0.07 below the diagonal: the
        # bounding-box corner pokes above the line, the disc does not
        e = confidence_ellipse(RatePair(0.5, 0.43), np.diag([0.0004, 0.0004]), 0.95)
        label = classify_maker(e, diagonal())
        assert label is CaseLabel.CASE2
        assert not label.replace

    def test_case3_center_on_curve(self):
        e = confidence_ellipse(RatePair(0.5, 0.5), np.diag([1e-4, 1e-4]), 0.95)
        label = classify_maker(e, diagonal())
        assert label is CaseLabel.CASE3
        assert not label.replace

    def test_case1_reference_has_segment(self):
        e = confidence_ellipse(RatePair(0.5, 0.5), np.diag([1e-6, 1e-6]), 0.95)
        roc = two_segment()
        assert classify_maker(e, roc) is CaseLabel.CASE1
        assert roc.dominating_segment(e.reference_point()) is not None

    def test_shrinking_covariance_reaches_case1(self):
        # center strictly below the curve: small enough noise must replace
        center = RatePair(0.5, 0.6)
        labels = [
            classify_maker(
                confidence_ellipse(center, np.diag([s, s]), 0.95), two_segment()
            )
            for s in (1e-1, 1e-6)
        ]
        assert labels[-1] is CaseLabel.CASE1


class TestDeltaMethod:
    def test_on_curve_statistic_zero(self):
        counts = ConfusionCounts(n11=30, n01=30, n10=70, n00=70)
        res = delta_method_test(counts, diagonal())
        assert res.statistic == pytest.approx(0.0, abs=1e-12)
        assert not res.reject

    def test_critical_value(self):
        counts = ConfusionCounts(n11=30, n01=30, n10=70, n00=70)
        res = delta_method_test(counts, diagonal(), size=0.05)
        assert res.critical == pytest.approx(-1.6448536269514729, abs=1e-12)

    def test_far_below_rejects(self):
        counts = ConfusionCounts(n11=200, n01=500, n10=800, n00=500)
        res = delta_method_test(counts, diagonal())
        assert res.statistic < -5
        assert res.reject

    def test_statistic_formula(self):
        counts = ConfusionCounts(n11=60, n01=40, n10=40, n00=160)
        roc = two_segment()
        res = delta_method_test(counts, roc)
        sigma = asymptotic_covariance(counts)
        slope = roc.slope_at(0.2)
        expected = (
            np.sqrt(300)
            * (0.6 - roc.tpr_at_fpr(0.2))
            / np.sqrt(slope**2 * sigma[0, 0] + sigma[1, 1])
        )
        assert res.statistic == pytest.approx(expected, rel=1e-12)

    def test_zero_variance_rejected(self):
        counts = ConfusionCounts(n11=50, n01=0, n10=0, n00=50)
        with pytest.raises(ValueError):
            delta_method_test(counts, diagonal())

    def test_size_validated(self):
        counts = ConfusionCounts(n11=30, n01=30, n10=70, n00=70)
        with pytest.raises(ValueError):
            delta_method_test(counts, diagonal(), size=0.0)


class TestSampleThresholds:
    def test_endpoints_and_spacing(self):
        roc = two_segment()
        seg = roc.dominating_segment((0.5, 0.5))
        out = sample_thresholds(roc, seg, 5)
        cs = [c for c, _ in out]
        np.testing.assert_allclose(cs, [0.3125, 0.40625, 0.5, 0.59375, 0.6875])

    def test_two_points_are_the_ends(self):
        roc = two_segment()
        seg = roc.dominating_segment((0.5, 0.5))
        out = sample_thresholds(roc, seg, 2)
        assert out[0][0] == pytest.approx(seg.c_lower)
        assert out[1][0] == pytest.approx(seg.c_upper)

    def test_sampled_pairs_dominate_query(self):
        roc = two_segment()
        q = (0.5, 0.5)
        seg = roc.dominating_segment(q)
        for _, pair in sample_thresholds(roc, seg, 33):
            assert pair.alpha <= q[0] + 1e-12
            assert pair.beta >= q[1] - 1e-12

    def test_count_validated(self):
        roc = two_segment()
        seg = roc.dominating_segment((0.5, 0.5))
        with pytest.raises(ValueError):
            sample_thresholds(roc, seg, 1)


class TestBenchmarkMaker:
    COUNTS = ConfusionCounts(n11=200, n01=240, n10=200, n00=560)  # (0.3, 0.5)

    def test_weak_maker_replaced(self):
        v = benchmark_maker_frequentist("m1", self.COUNTS, two_segment(), seed=0)
        assert v.label is CaseLabel.CASE1
        assert v.segment is not None
        assert v.pair == RatePair(pytest.approx(0.3), pytest.approx(0.5))
        assert v.n == 1200

    def test_asymptotic_covariance_route(self):
        v = benchmark_maker_frequentist(
            "m1", self.COUNTS, two_segment(), cov_method="asymptotic"
        )
        assert v.label is CaseLabel.CASE1

    def test_on_curve_maker_retained(self):
        counts = ConfusionCounts(n11=240, n01=400, n10=160, n00=600)  # (0.4, 0.6)
        roc = RocCurve.from_pairs([(0.0, 0.0), (0.4, 0.6), (1.0, 1.0)])
        v = benchmark_maker_frequentist("m2", counts, roc, seed=5)
        assert v.label in (CaseLabel.CASE2, CaseLabel.CASE3)
        assert v.segment is None

    def test_unknown_cov_method(self):
        with pytest.raises(ValueError):
            benchmark_maker_frequentist("m", self.COUNTS, two_segment(), cov_method="exact")

    def test_deterministic(self):
        a = benchmark_maker_frequentist("m", self.COUNTS, two_segment(), seed=9)
        b = benchmark_maker_frequentist("m", self.COUNTS, two_segment(), seed=9)
        assert a == b


class TestFrequentistCsv:
    def make(self):
        roc = two_segment()
        v1 = benchmark_maker_frequentist(
            "m1", TestBenchmarkMaker.COUNTS, roc, seed=0
        )
        counts = ConfusionCounts(n11=240, n01=400, n10=160, n00=600)
        curve = RocCurve.from_pairs([(0.0, 0.0), (0.4, 0.6), (1.0, 1.0)])
        v2 = benchmark_maker_frequentist("m2", counts, curve, seed=5)
        return [v1, v2]

    def test_round_trip(self, tmp_path):
        verdicts = self.make()
        path = tmp_path / "verdicts.csv"
        write_frequentist_csv(path, verdicts)
        rows = read_frequentist_csv(path)
        assert [r["maker_id"] for r in rows] == ["m1", "m2"]
        assert rows[0]["case_label"] is CaseLabel.CASE1
        assert rows[0]["c_lower"] == pytest.approx(verdicts[0].segment.c_lower)
        assert rows[0]["c_upper"] == pytest.approx(verdicts[0].segment.c_upper)
        assert rows[1]["c_lower"] is None and rows[1]["c_upper"] is None
        assert rows[1]["n"] == 1400

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n")
        with pytest.raises(ValueError, match="header"):
            read_frequentist_csv(path)

    def test_short_row_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "maker_id,n,alpha_hat,beta_hat,case_label,c_lower,c_upper\nm1,5,0.1\n"
        )
        with pytest.raises(ValueError, match="line 2"):
            read_frequentist_csv(path)
