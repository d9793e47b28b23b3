"""Frequentist benchmarking of a maker against a machine ROC curve.

The sampling model treats a maker's four confusion counts as one draw
of a multinomial; the empirical rate pair (alpha_hat, beta_hat) is then
asymptotically normal around the true pair with covariance

    diag( alpha (1 - alpha) / (1 - p),  beta (1 - beta) / p ) / n

where p is the positive base rate.  An elliptical confidence set built
from that covariance (plug-in or bootstrap) drives a three-way call:

  case1  the ellipse's most favorable corner sits strictly below the
         curve, so some curve stretch dominates the maker: replace;
  case2  the corner is on or above the curve but the whole ellipse is
         strictly below it: retain;
  case3  part of the ellipse reaches the curve or beyond: retain.

A sharper one-sided test of "the maker is on or above the curve"
against "strictly below" uses the delta method along the curve.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import ConfusionCounts, RatePair, rate_pair
from .roc import DominatingSegment, RocCurve

__all__ = [
    "CaseLabel",
    "EllipseSet",
    "BootstrapPairs",
    "FrequentistVerdict",
    "DeltaTestResult",
    "asymptotic_covariance",
    "bootstrap_pairs",
    "bootstrap_covariance",
    "confidence_ellipse",
    "classify_maker",
    "delta_method_test",
    "sample_thresholds",
    "benchmark_maker_frequentist",
    "write_frequentist_csv",
    "read_frequentist_csv",
]

_VAR_FLOOR = 1e-12


class CaseLabel(enum.Enum):
    CASE1 = "case1"  # replace: ellipse corner strictly below the curve
    CASE2 = "case2"  # retain: corner above, ellipse fully below
    CASE3 = "case3"  # retain: ellipse mass reaches the curve

    @property
    def replace(self) -> bool:
        return self is CaseLabel.CASE1


def asymptotic_covariance(counts: ConfusionCounts) -> np.ndarray:
    """Plug-in covariance of sqrt(n) * (alpha_hat, beta_hat); caller divides by n."""
    alpha, beta = rate_pair(counts)
    p_hat = (counts.n11 + counts.n10) / counts.n
    return np.diag(
        [alpha * (1 - alpha) / (1 - p_hat), beta * (1 - beta) / p_hat]
    )


@dataclass(frozen=True)
class BootstrapPairs:
    alphas: np.ndarray
    betas: np.ndarray
    n_redrawn: int

    @property
    def pairs(self) -> list[RatePair]:
        return [RatePair(float(a), float(b)) for a, b in zip(self.alphas, self.betas)]


def bootstrap_pairs(
    counts: ConfusionCounts, n_resamples: int, seed: int | np.random.Generator
) -> BootstrapPairs:
    """Rate pairs of case resamples (with replacement, original size).

    Resamples that lose an outcome class are redrawn and counted; if
    degenerate draws ever outnumber the requested resamples the maker's
    counts are too close to one-class and the bootstrap aborts.
    """
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    rate_pair(counts)  # validates non-degeneracy
    n = counts.n
    t_hat = np.array([counts.n11, counts.n01, counts.n10, counts.n00]) / n
    rng = np.random.default_rng(seed)
    kept = []
    short = n_resamples
    n_redrawn = 0
    while short > 0:
        draw = rng.multinomial(n, t_hat, size=short)
        ok = ((draw[:, 0] + draw[:, 2]) > 0) & ((draw[:, 1] + draw[:, 3]) > 0)
        kept.append(draw[ok])
        bad = short - int(ok.sum())
        n_redrawn += bad
        short = bad
        if n_redrawn > n_resamples:
            raise RuntimeError(
                f"bootstrap aborted: {n_redrawn} degenerate resamples exceed the "
                f"{n_resamples} requested; counts {counts} are too unbalanced"
            )
    draws = np.concatenate(kept)
    alphas = draws[:, 1] / (draws[:, 1] + draws[:, 3])
    betas = draws[:, 0] / (draws[:, 0] + draws[:, 2])
    return BootstrapPairs(alphas=alphas, betas=betas, n_redrawn=n_redrawn)


def bootstrap_covariance(
    counts: ConfusionCounts, n_resamples: int, seed: int | np.random.Generator
) -> np.ndarray:
    """2x2 sample covariance of bootstrapped rate pairs."""
    boot = bootstrap_pairs(counts, n_resamples, seed)
    return np.cov(np.vstack([boot.alphas, boot.betas]), ddof=1)


@dataclass(frozen=True)
class EllipseSet:
    """Elliptical confidence set for the true rate pair.

    ``cov`` is the covariance of the *estimator* (already scaled by 1/n);
    membership is a Mahalanobis test against the chi-square(2) quantile.
    """

    center: RatePair
    cov: np.ndarray
    level: float
    chi2_quantile: float

    def _inverse(self) -> np.ndarray:
        try:
            return np.linalg.inv(self.cov)
        except np.linalg.LinAlgError:
            return np.linalg.inv(self.cov + _VAR_FLOOR * np.eye(2))

    def contains(self, pair) -> bool:
        d = np.asarray([pair[0] - self.center.alpha, pair[1] - self.center.beta])
        return float(d @ self._inverse() @ d) <= self.chi2_quantile * (1 + 1e-9)

    def boundary(self, n_points: int = 1024) -> np.ndarray:
        """Boundary discretization, clipped to the unit square; (n, 2)."""
        w, v = np.linalg.eigh((self.cov + self.cov.T) / 2.0)
        scale = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
        t = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
        circle = np.vstack([np.cos(t), np.sin(t)])
        pts = np.asarray(self.center)[:, None] + np.sqrt(self.chi2_quantile) * scale @ circle
        return np.clip(pts.T, 0.0, 1.0)

    def reference_point(self) -> RatePair:
        """Most favorable corner: smallest fpr paired with largest tpr.

        These are the exact per-coordinate extremes of the ellipse,
        clipped to the unit square.
        """
        r = np.sqrt(self.chi2_quantile * np.diag(self.cov))
        return RatePair(
            float(np.clip(self.center.alpha - r[0], 0.0, 1.0)),
            float(np.clip(self.center.beta + r[1], 0.0, 1.0)),
        )


def confidence_ellipse(center: RatePair, cov, level: float) -> EllipseSet:
    """Level-``level`` confidence ellipse centered at the sample rate pair."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    cov = np.array(cov, dtype=np.float64)
    if cov.shape != (2, 2):
        raise ValueError("cov must be 2x2")
    cov[0, 0] = max(cov[0, 0], _VAR_FLOOR)  # boundary rates collapse the ellipse
    cov[1, 1] = max(cov[1, 1], _VAR_FLOOR)
    cov.flags.writeable = False
    q = float(stats.chi2.ppf(level, df=2))
    center = RatePair(float(center[0]), float(center[1]))
    return EllipseSet(center=center, cov=cov, level=level, chi2_quantile=q)


def classify_maker(
    ellipse: EllipseSet, roc: RocCurve, boundary_points: int = 1024, tol: float = 1e-12
) -> CaseLabel:
    """Three-way replace/retain call from the ellipse's position."""
    p = ellipse.reference_point()
    if roc.tpr_at_fpr(p.alpha) - p.beta > tol:
        return CaseLabel.CASE1
    b = ellipse.boundary(boundary_points)
    gap = b[:, 1] - roc.tpr_at_fpr(b[:, 0])
    if float(gap.max()) >= -tol:
        return CaseLabel.CASE3
    return CaseLabel.CASE2


@dataclass(frozen=True)
class DeltaTestResult:
    statistic: float
    critical: float
    reject: bool


def delta_method_test(counts: ConfusionCounts, roc: RocCurve, size: float = 0.05) -> DeltaTestResult:
    """One-sided test of on-or-above-curve against strictly-below.

    The statistic is sqrt(n) (beta_hat - g(alpha_hat)) standardized by
    the delta-method variance along the curve; reject (conclude below)
    when it falls at or under the lower normal quantile of ``size``.
    """
    if not 0.0 < size < 1.0:
        raise ValueError("size must be in (0, 1)")
    pair = rate_pair(counts)
    sigma = asymptotic_covariance(counts)
    slope = roc.slope_at(pair.alpha)
    var = slope * slope * sigma[0, 0] + sigma[1, 1]
    if var <= 0.0:
        raise ValueError("boundary rates give a zero delta-method variance")
    stat = np.sqrt(counts.n) * (pair.beta - roc.tpr_at_fpr(pair.alpha)) / np.sqrt(var)
    crit = float(stats.norm.ppf(size))
    return DeltaTestResult(statistic=float(stat), critical=crit, reject=bool(stat <= crit))


def sample_thresholds(
    roc: RocCurve, segment: DominatingSegment, n_thresholds: int
) -> list[tuple[float, RatePair]]:
    """Evenly spaced thresholds across a dominating stretch, with curve pairs."""
    if n_thresholds < 2:
        raise ValueError("n_thresholds must be >= 2")
    cs = np.linspace(segment.c_lower, segment.c_upper, n_thresholds)
    return [(float(c), roc.pair_at_threshold(c)) for c in cs]


@dataclass(frozen=True)
class FrequentistVerdict:
    maker_id: str
    n: int
    pair: RatePair
    label: CaseLabel
    segment: DominatingSegment | None

    def __post_init__(self):
        if self.label.replace and self.segment is None:
            raise ValueError("case1 verdict requires a dominating segment")


def benchmark_maker_frequentist(
    maker_id: str,
    counts: ConfusionCounts,
    roc: RocCurve,
    level: float = 0.95,
    n_resamples: int = 100,
    seed: int | np.random.Generator = 0,
    cov_method: str = "bootstrap",
) -> FrequentistVerdict:
    """Full per-maker frequentist run: ellipse, three-way call, segment."""
    pair = rate_pair(counts)
    if cov_method == "bootstrap":
        cov = bootstrap_covariance(counts, n_resamples, seed)
    elif cov_method == "asymptotic":
        cov = asymptotic_covariance(counts) / counts.n
    else:
        raise ValueError(f"unknown cov_method {cov_method!r}")
    ellipse = confidence_ellipse(pair, cov, level)
    label = classify_maker(ellipse, roc)
    segment = None
    if label.replace:
        segment = roc.dominating_segment(ellipse.reference_point())
        if segment is None:  # not reachable: case1 means the corner is below
            raise RuntimeError("case1 classification without a dominating segment")
    return FrequentistVerdict(maker_id=maker_id, n=counts.n, pair=pair, label=label, segment=segment)


# -- CSV interchange ---------------------------------------------------
#
# Format: maker_id,n,alpha_hat,beta_hat,case_label,c_lower,c_upper with
# empty threshold cells for retained makers.

_FMT = "%.10g"


def write_frequentist_csv(path, verdicts: list[FrequentistVerdict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["maker_id", "n", "alpha_hat", "beta_hat", "case_label", "c_lower", "c_upper"])
        for v in verdicts:
            lo = _FMT % v.segment.c_lower if v.segment is not None else ""
            hi = _FMT % v.segment.c_upper if v.segment is not None else ""
            writer.writerow(
                [v.maker_id, str(v.n), _FMT % v.pair.alpha, _FMT % v.pair.beta, v.label.value, lo, hi]
            )


def read_frequentist_csv(path) -> list[dict]:
    """Rows as dicts; thresholds are floats or None."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["maker_id", "n", "alpha_hat", "beta_hat", "case_label", "c_lower", "c_upper"]
        if header != expected:
            raise ValueError(f"{path}: malformed header {header!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 7:
                raise ValueError(f"{path}: line {lineno}: expected 7 fields")
            rows.append(
                {
                    "maker_id": row[0],
                    "n": int(row[1]),
                    "alpha_hat": float(row[2]),
                    "beta_hat": float(row[3]),
                    "case_label": CaseLabel(row[4]),
                    "c_lower": float(row[5]) if row[5] else None,
                    "c_upper": float(row[6]) if row[6] else None,
                }
            )
        return rows
