"""Bayesian benchmarking of a maker against a machine ROC curve.

The maker's four confusion cells are multinomial with probability
vector t = (t11, t01, t10, t00) on the simplex; a Dirichlet prior is
conjugate, so the posterior is Dirichlet with the prior weights plus
the observed counts.  Each posterior draw maps to a rate pair

    alpha(t) = t01 / (t01 + t00),    beta(t) = t11 / (t11 + t10),

and replacement questions become posterior probabilities over that
pair's position against the curve.  The headline quantity is

    q_max = max over curve fpr a of  P( alpha >= a  and  beta <= g(a) ),

the largest posterior mass any single curve point can weakly dominate;
the maker is replaced when q_max reaches the credible level, at the
maximizing curve point.  A catalog of posterior expected losses refines
the same idea: every loss equals 1 when the candidate curve point fails
to dominate and shrinks below 1 with the strength of domination, so
minimized posterior loss <= 1 - level generalizes the baseline rule.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ConfusionCounts, RatePair
from .replacement import ReplacementVerdict
from .roc import RocCurve

__all__ = [
    "DirichletParams",
    "PosteriorDraws",
    "LossKind",
    "CostBenefitLoss",
    "DominanceResult",
    "RetentionMethod",
    "RetentionResult",
    "posterior_params",
    "sample_posterior",
    "prob_below_roc",
    "curve_candidate_grid",
    "max_dominance",
    "loss_eval",
    "min_posterior_loss",
    "replace_decision",
    "reversed_null_retain",
    "benchmark_maker_bayesian",
    "write_bayesian_csv",
    "read_bayesian_csv",
]

DEFAULT_PRIOR_WEIGHT = 0.1
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class DirichletParams:
    """Dirichlet weights over cells ordered (n11, n01, n10, n00)."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.ascontiguousarray(self.gamma, dtype=np.float64)
        if g.shape != (4,):
            raise ValueError("gamma must have four cells")
        if not (np.isfinite(g).all() and (g > 0).all()):
            raise ValueError("gamma must be positive and finite")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    def mean(self) -> np.ndarray:
        return self.gamma / self.gamma.sum()


def posterior_params(
    counts: ConfusionCounts, prior: DirichletParams | float = DEFAULT_PRIOR_WEIGHT
) -> DirichletParams:
    """Conjugate update: prior weights plus observed cell counts."""
    if isinstance(prior, DirichletParams):
        g = prior.gamma
    else:
        g = np.full(4, float(prior))
    return DirichletParams(g + np.array([counts.n11, counts.n01, counts.n10, counts.n00]))


@dataclass(frozen=True)
class PosteriorDraws:
    """Posterior cell draws (rows on the open simplex) with rate pairs."""

    t: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray

    @property
    def n_draws(self) -> int:
        return self.t.shape[0]


def sample_posterior(
    params: DirichletParams, n_draws: int, seed: int | np.random.Generator
) -> PosteriorDraws:
    """Dirichlet draws mapped to rate pairs.

    Draws with a zero cell (possible underflow at tiny weights) are
    rejected and redrawn so every rate denominator is positive.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    rng = np.random.default_rng(seed)
    kept = []
    short = n_draws
    redrawn = 0
    while short > 0:
        t = rng.dirichlet(params.gamma, size=short)
        ok = (t > 0.0).all(axis=1)
        kept.append(t[ok])
        bad = short - int(ok.sum())
        redrawn += bad
        short = bad
        if redrawn > 10 * n_draws:
            raise RuntimeError("posterior sampling rejected too many zero-cell draws")
    t = np.concatenate(kept)
    alphas = t[:, 1] / (t[:, 1] + t[:, 3])
    betas = t[:, 0] / (t[:, 0] + t[:, 2])
    for arr in (t, alphas, betas):
        arr.flags.writeable = False
    return PosteriorDraws(t=t, alphas=alphas, betas=betas)


def prob_below_roc(draws: PosteriorDraws, roc: RocCurve) -> float:
    """Posterior probability the maker's pair sits on or below the curve."""
    return float(np.mean(draws.betas <= roc.tpr_at_fpr(draws.alphas)))


def curve_candidate_grid(
    roc: RocCurve, draws: PosteriorDraws | None = None, grid_size: int = 512
) -> np.ndarray:
    """Candidate fpr values: uniform grid plus curve knots plus draw fprs.

    Sharing one grid across the dominance maximizer and the loss
    minimizer makes the baseline duality (min loss = 1 - q_max) exact.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    parts = [np.linspace(0.0, 1.0, grid_size), roc.knot_alphas]
    if draws is not None:
        parts.append(draws.alphas)
    return np.unique(np.concatenate(parts))


class LossKind(enum.Enum):
    BASELINE = "baseline"
    EUCLIDEAN = "euclidean"
    COMPLEMENT_DISTANCE = "complement-distance"
    DIAGONAL_VERTICAL = "diagonal-vertical"
    DIAGONAL_HORIZONTAL = "diagonal-horizontal"
    COMPLEMENT_VERTICAL = "complement-vertical"
    COMPLEMENT_HORIZONTAL = "complement-horizontal"


@dataclass(frozen=True)
class CostBenefitLoss:
    """User hook: loss = cost * 1(no domination) - benefit * 1(domination).

    ``cost(theta_m, alphas, betas)`` and ``benefit(theta_m, betas)``
    receive one candidate curve point and the draw arrays and must
    return per-draw arrays.
    """

    cost: Callable[[RatePair, np.ndarray, np.ndarray], np.ndarray]
    benefit: Callable[[RatePair, np.ndarray], np.ndarray]


def _diag_lambda(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Share of the diagonal-to-curve gap the maker has covered, >= 0.

    Positive numerator with a vanishing gap means the point is above
    the curve, where domination is impossible; the sentinel keeps the
    array finite and is never selected.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = num / den
    lam = np.where(den > 0.0, lam, np.inf)
    return np.maximum(np.where(num <= 0.0, 0.0, lam), 0.0)


def _per_draw_weights(kind: LossKind, draws_a, draws_b, roc: RocCurve):
    """Domination benefit per draw for kinds that ignore the curve point."""
    if kind is LossKind.BASELINE:
        return np.ones_like(draws_a)
    if kind is LossKind.EUCLIDEAN:
        return roc.distance_to_curve(np.column_stack([draws_a, draws_b]))
    if kind is LossKind.DIAGONAL_VERTICAL:
        lam = _diag_lambda(draws_b - draws_a, roc.tpr_at_fpr(draws_a) - draws_a)
        return 1.0 - lam
    if kind is LossKind.DIAGONAL_HORIZONTAL:
        lam = _diag_lambda(draws_b - draws_a, draws_b - roc.fpr_at_tpr(draws_b))
        return 1.0 - lam
    return None


def _benefit_means(
    cand_a: np.ndarray,
    cand_b: np.ndarray,
    draws_a: np.ndarray,
    draws_b: np.ndarray,
    kind,
    roc: RocCurve,
) -> np.ndarray:
    """Mean over draws of (domination benefit) at each candidate point.

    The posterior expected loss at a candidate is 1 minus this mean.
    """
    n_draws = draws_a.size
    w_draw = None if isinstance(kind, CostBenefitLoss) else _per_draw_weights(kind, draws_a, draws_b, roc)
    out = np.empty(cand_a.size)
    chunk = max(1, _CHUNK_CELLS // max(n_draws, 1))
    for lo in range(0, cand_a.size, chunk):
        ca = cand_a[lo : lo + chunk, None]
        cb = cand_b[lo : lo + chunk, None]
        dom = (draws_a[None, :] >= ca) & (draws_b[None, :] <= cb)
        if isinstance(kind, CostBenefitLoss):
            block = np.empty(ca.shape[0])
            for i in range(ca.shape[0]):
                theta_m = RatePair(float(ca[i, 0]), float(cb[i, 0]))
                cost = np.asarray(kind.cost(theta_m, draws_a, draws_b), dtype=np.float64)
                gain = np.asarray(kind.benefit(theta_m, draws_b), dtype=np.float64)
                # benefit mean such that 1 - mean reproduces the cost/benefit loss
                block[i] = np.mean(np.where(dom[i], 1.0 + gain, 1.0 - cost))
            out[lo : lo + chunk] = block
            continue
        if w_draw is not None:
            contrib = np.where(dom, w_draw[None, :], 0.0)
        elif kind is LossKind.COMPLEMENT_DISTANCE:
            w = np.minimum(draws_a[None, :] - ca, cb - draws_b[None, :])
            contrib = np.where(dom, w, 0.0)
        elif kind is LossKind.COMPLEMENT_VERTICAL:
            den = cb - ca
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = (draws_b[None, :] - ca) / den
            lam = np.maximum(np.where(den > 0.0, lam, 1.0), 0.0)
            contrib = np.where(dom, 1.0 - lam, 0.0)
        elif kind is LossKind.COMPLEMENT_HORIZONTAL:
            den = cb - ca
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = (cb - draws_a[None, :]) / den
            lam = np.maximum(np.where(den > 0.0, lam, 1.0), 0.0)
            contrib = np.where(dom, 1.0 - lam, 0.0)
        else:
            raise ValueError(f"unknown loss kind {kind!r}")
        out[lo : lo + chunk] = contrib.sum(axis=1) / n_draws
    return out


@dataclass(frozen=True)
class DominanceResult:
    q_max: float
    alpha_d: float | None


def max_dominance(
    draws: PosteriorDraws, roc: RocCurve, grid_size: int = 512
) -> DominanceResult:
    """Largest posterior mass a single curve point weakly dominates.

    Candidates are the shared fpr grid; ties pick the smallest fpr.
    q_max = 0 means no curve point dominates any draw (all mass above
    the curve) and the maximizer is reported as undefined.
    """
    cand = curve_candidate_grid(roc, draws, grid_size)
    q = _benefit_means(cand, roc.tpr_at_fpr(cand), draws.alphas, draws.betas, LossKind.BASELINE, roc)
    i = int(np.argmax(q))
    if q[i] == 0.0:
        return DominanceResult(q_max=0.0, alpha_d=None)
    return DominanceResult(q_max=float(q[i]), alpha_d=float(cand[i]))


def loss_eval(kind, theta_m, theta_h, roc: RocCurve) -> float:
    """Loss of one candidate curve point against one maker pair.

    ``theta_m`` must sit on the curve (within 1e-9).  Every cataloged
    loss is 1 when theta_m fails to weakly dominate theta_h.
    """
    a_m, b_m = float(theta_m[0]), float(theta_m[1])
    if abs(b_m - roc.tpr_at_fpr(a_m)) > 1e-9:
        raise ValueError(f"theta_m {theta_m} is not on the curve")
    out = _benefit_means(
        np.array([a_m]), np.array([b_m]), np.array([float(theta_h[0])]),
        np.array([float(theta_h[1])]), kind, roc,
    )
    return float(1.0 - out[0])


def min_posterior_loss(
    draws: PosteriorDraws, roc: RocCurve, kind=LossKind.BASELINE, grid_size: int = 512
):
    """Minimize posterior expected loss over the candidate curve points.

    Returns (value, minimizing curve point); ties pick the smallest
    fpr.  For the baseline indicator the value is exactly 1 - q_max on
    the same grid.
    """
    cand = curve_candidate_grid(roc, draws, grid_size)
    g_cand = roc.tpr_at_fpr(cand)
    benefit = _benefit_means(cand, g_cand, draws.alphas, draws.betas, kind, roc)
    i = int(np.argmax(benefit))  # max benefit == min loss; first hit = smallest fpr
    return float(1.0 - benefit[i]), RatePair(float(cand[i]), float(g_cand[i]))


def replace_decision(
    draws: PosteriorDraws,
    roc: RocCurve,
    kind=LossKind.BASELINE,
    credible_level: float = 0.95,
    maker_id: str = "",
    grid_size: int = 512,
) -> ReplacementVerdict:
    """Replace/retain verdict with the machine threshold at the best point.

    Baseline: replace iff q_max >= credible_level.  Other losses:
    replace iff minimized posterior loss <= 1 - credible_level, which
    reduces to the baseline rule for the indicator loss.
    """
    if not 0.0 < credible_level < 1.0:
        raise ValueError("credible_level must be in (0, 1)")
    dom = max_dominance(draws, roc, grid_size)
    if kind is LossKind.BASELINE:
        theta0_alpha = dom.alpha_d if dom.alpha_d is not None else float(curve_candidate_grid(roc, draws, grid_size)[0])
        theta0 = RatePair(theta0_alpha, float(roc.tpr_at_fpr(theta0_alpha)))
        min_loss = 1.0 - dom.q_max
        replace = dom.q_max >= credible_level
    else:
        min_loss, theta0 = min_posterior_loss(draws, roc, kind, grid_size)
        replace = min_loss <= 1.0 - credible_level
    kind_name = kind.value if isinstance(kind, LossKind) else "cost-benefit"
    return ReplacementVerdict(
        maker_id=maker_id,
        replace=bool(replace),
        threshold=roc.threshold_at_point(theta0),
        diagnostics={
            "q_max": dom.q_max,
            "alpha_d": np.nan if dom.alpha_d is None else dom.alpha_d,
            "loss_kind": kind_name,
            "min_loss": min_loss,
            "prob_below": prob_below_roc(draws, roc),
            "theta0_alpha": theta0.alpha,
            "theta0_beta": theta0.beta,
        },
    )


class RetentionMethod(enum.Enum):
    DOMINATE = "dominate"
    ABOVE = "above"


@dataclass(frozen=True)
class RetentionResult:
    retain: bool
    support: float
    alpha_at: float | None


def reversed_null_retain(
    draws: PosteriorDraws,
    roc: RocCurve,
    credible_level: float = 0.95,
    method: RetentionMethod = RetentionMethod.DOMINATE,
    grid_size: int = 512,
) -> RetentionResult:
    """Retention under the reversed burden: keep only convincing makers.

    DOMINATE keeps the maker when some curve point is weakly dominated
    by at least ``credible_level`` of the posterior mass; ABOVE keeps
    the maker when that share of mass sits strictly above the curve.
    A DOMINATE retention implies an ABOVE retention on the same draws.
    """
    if not 0.0 < credible_level < 1.0:
        raise ValueError("credible_level must be in (0, 1)")
    if method is RetentionMethod.ABOVE:
        support = float(np.mean(draws.betas > roc.tpr_at_fpr(draws.alphas)))
        return RetentionResult(retain=support >= credible_level, support=support, alpha_at=None)
    cand = curve_candidate_grid(roc, draws, grid_size)
    g_cand = roc.tpr_at_fpr(cand)
    best = 0.0
    best_alpha = None
    chunk = max(1, _CHUNK_CELLS // max(draws.n_draws, 1))
    for lo in range(0, cand.size, chunk):
        ca = cand[lo : lo + chunk, None]
        cb = g_cand[lo : lo + chunk, None]
        mass = ((draws.alphas[None, :] <= ca) & (draws.betas[None, :] >= cb)).mean(axis=1)
        i = int(np.argmax(mass))
        if mass[i] > best:
            best = float(mass[i])
            best_alpha = float(cand[lo + i])
    return RetentionResult(retain=best >= credible_level, support=best, alpha_at=best_alpha)


def benchmark_maker_bayesian(
    maker_id: str,
    counts: ConfusionCounts,
    roc: RocCurve,
    prior: DirichletParams | float = DEFAULT_PRIOR_WEIGHT,
    n_draws: int = 10_000,
    seed: int | np.random.Generator = 0,
    credible_level: float = 0.95,
    kind=LossKind.BASELINE,
    grid_size: int = 512,
) -> ReplacementVerdict:
    """Full per-maker Bayesian run: posterior, dominance mass, verdict."""
    params = posterior_params(counts, prior)
    draws = sample_posterior(params, n_draws, seed)
    verdict = replace_decision(draws, roc, kind, credible_level, maker_id, grid_size)
    verdict.diagnostics["n"] = counts.n
    return verdict


# -- CSV interchange ---------------------------------------------------
#
# Format: maker_id,q_max,alpha_d,loss_kind,min_loss,replace,threshold
# with alpha_d empty when no curve point dominates any draw.

_FMT = "%.10g"


def write_bayesian_csv(path, verdicts: list[ReplacementVerdict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["maker_id", "q_max", "alpha_d", "loss_kind", "min_loss", "replace", "threshold"])
        for v in verdicts:
            d = v.diagnostics
            alpha_d = "" if np.isnan(d["alpha_d"]) else _FMT % d["alpha_d"]
            writer.writerow(
                [
                    v.maker_id,
                    _FMT % d["q_max"],
                    alpha_d,
                    d["loss_kind"],
                    _FMT % d["min_loss"],
                    "true" if v.replace else "false",
                    _FMT % v.threshold,
                ]
            )


def read_bayesian_csv(path) -> list[ReplacementVerdict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["maker_id", "q_max", "alpha_d", "loss_kind", "min_loss", "replace", "threshold"]
        if header != expected:
            raise ValueError(f"{path}: malformed header {header!r}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 7 or row[5] not in ("true", "false"):
                raise ValueError(f"{path}: line {lineno}: malformed row")
            out.append(
                ReplacementVerdict(
                    maker_id=row[0],
                    replace=row[5] == "true",
                    threshold=float(row[6]),
                    diagnostics={
                        "q_max": float(row[1]),
                        "alpha_d": float(row[2]) if row[2] else np.nan,
                        "loss_kind": row[3],
                        "min_loss": float(row[4]),
                    },
                )
            )
        return out
