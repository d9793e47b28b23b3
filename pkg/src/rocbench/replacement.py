"""Combining maker and machine decisions on an evaluation cohort.

Three evaluation modes share one primitive: for each case either keep
the maker's recorded call or apply the machine rule
``positive iff scorer(features) > threshold`` at the maker's personal
replacement threshold.

* ``combine_decisions``  replace exactly the makers whose verdict says so;
* ``replacement_path``   force-replace the lowest-loss fraction of makers,
  sweeping the fraction from 0 (all human) to 1 (all machine);
* ``randomized_accept``  per case flip a coin with maker-specific weight
  lambda: machine decision when the uniform draw falls at or below
  lambda, the maker's decision otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import CohortDataset, ConfusionCounts, RatePair, rate_pair, tally_confusion

__all__ = [
    "ReplacementVerdict",
    "AcceptanceSchedule",
    "CombinedResult",
    "PathPoint",
    "combine_decisions",
    "replacement_path",
    "randomized_accept",
    "write_path_csv",
    "write_randomized_csv",
    "write_combined_csv",
]

Scorer = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ReplacementVerdict:
    """Replace/retain call for one maker plus its machine threshold.

    ``threshold`` must be present when ``replace`` is set; retained
    makers may still carry one (their best curve point) so that forced
    sweeps and randomized schedules can cover every maker.
    """

    maker_id: str
    replace: bool
    threshold: float | None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replace and self.threshold is None:
            raise ValueError(f"maker {self.maker_id}: replacement requires a threshold")


def _verdict_map(verdicts) -> dict[str, ReplacementVerdict]:
    if isinstance(verdicts, Mapping):
        return dict(verdicts)
    return {v.maker_id: v for v in verdicts}


def _machine_calls(
    data: CohortDataset, scorer: Scorer, thresholds_per_case: np.ndarray
) -> np.ndarray:
    if data.features is None:
        raise ValueError("machine replacement needs case features")
    scores = np.asarray(scorer(data.features), dtype=np.float64)
    if scores.shape != (data.n_cases,):
        raise ValueError("scorer must return one score per case")
    return (scores > thresholds_per_case).astype(np.uint8)


@dataclass(frozen=True)
class CombinedResult:
    pair: RatePair
    counts: ConfusionCounts
    replaced: tuple[str, ...]

    @property
    def n_replaced(self) -> int:
        return len(self.replaced)


def _evaluate(data: CohortDataset, replace_ids: set[str], thresholds: dict[str, float], scorer) -> CombinedResult:
    lam_mask = np.isin(data.maker_index, [i for i, m in enumerate(data.makers) if m in replace_ids])
    final = data.y_hat.copy()
    if replace_ids:
        thr = np.zeros(data.n_cases)
        for i, m in enumerate(data.makers):
            if m in replace_ids:
                thr[data.maker_index == i] = thresholds[m]
        machine = _machine_calls(data, scorer, thr)
        final[lam_mask] = machine[lam_mask]
    counts = tally_confusion(data.y, final)
    return CombinedResult(
        pair=rate_pair(counts),
        counts=counts,
        replaced=tuple(sorted(replace_ids)),
    )


def combine_decisions(
    performance: CohortDataset,
    verdicts,
    scorer: Scorer,
) -> CombinedResult:
    """Pooled rate pair with replace-flagged makers run by the machine."""
    vmap = _verdict_map(verdicts)
    missing = [m for m in performance.makers if m not in vmap]
    if missing:
        raise ValueError(f"no verdict for makers: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    replaced = {m for m in performance.makers if vmap[m].replace}
    thresholds = {m: vmap[m].threshold for m in replaced}
    return _evaluate(performance, replaced, thresholds, scorer)


@dataclass(frozen=True)
class PathPoint:
    fraction: float
    n_replaced: int
    pair: RatePair


def replacement_path(
    performance: CohortDataset,
    verdicts,
    fractions: Sequence[float],
    scorer: Scorer,
) -> list[PathPoint]:
    """Pooled pairs as the most replaceable makers are swapped out.

    Makers are ranked by ascending posterior loss (``min_loss`` in the
    verdict diagnostics, ties broken by maker id); a fraction f swaps
    the first round(f * n_makers) of them, halves rounding up.  Every
    maker needs a threshold since f = 1 replaces them all.
    """
    vmap = _verdict_map(verdicts)
    missing = [m for m in performance.makers if m not in vmap]
    if missing:
        raise ValueError(f"no verdict for makers: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    for m in performance.makers:
        if vmap[m].threshold is None:
            raise ValueError(f"maker {m} has no threshold; the sweep must be able to replace everyone")
        if "min_loss" not in vmap[m].diagnostics:
            raise ValueError(f"maker {m} verdict lacks a min_loss diagnostic")
    ranked = sorted(performance.makers, key=lambda m: (vmap[m].diagnostics["min_loss"], m))
    out = []
    for f in fractions:
        f = float(f)
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fraction {f} outside [0, 1]")
        k = int(math.floor(f * len(ranked) + 0.5))
        chosen = set(ranked[:k])
        result = _evaluate(performance, chosen, {m: vmap[m].threshold for m in chosen}, scorer)
        out.append(PathPoint(fraction=f, n_replaced=k, pair=result.pair))
    return out


@dataclass(frozen=True)
class AcceptanceSchedule:
    """Per-maker mixing weights for randomized acceptance.

    ``constant`` gives one lambda to every maker in scope;
    ``linear-by-rank`` ranks makers by descending posterior loss (rank 1
    = most capable) and assigns lambda = (r-1)/(n-1), or (n-r)/(n-1)
    for the ``reverse`` direction.  Scope ``less-capable-only`` zeroes
    the weight of makers whose verdict kept them.
    """

    kind: str  # "constant" | "linear-by-rank"
    lam: float | None = None
    direction: str | None = None  # "less-capable-more" | "reverse"
    scope: str = "less-capable-only"  # or "all-makers"

    def __post_init__(self):
        if self.kind not in ("constant", "linear-by-rank"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.scope not in ("less-capable-only", "all-makers"):
            raise ValueError(f"unknown scope {self.scope!r}")
        if self.kind == "constant":
            if self.lam is None or not 0.0 <= self.lam <= 1.0:
                raise ValueError("constant schedule needs lambda in [0, 1]")
        else:
            if self.direction not in ("less-capable-more", "reverse"):
                raise ValueError("linear-by-rank needs a direction")

    @classmethod
    def constant(cls, lam: float, scope: str = "less-capable-only") -> "AcceptanceSchedule":
        return cls(kind="constant", lam=lam, scope=scope)

    @classmethod
    def linear_by_rank(
        cls, direction: str = "less-capable-more", scope: str = "all-makers"
    ) -> "AcceptanceSchedule":
        return cls(kind="linear-by-rank", direction=direction, scope=scope)

    def resolve(self, makers: Sequence[str], vmap: dict[str, ReplacementVerdict]) -> dict[str, float]:
        if self.kind == "constant":
            lams = {m: self.lam for m in makers}
        else:
            if len(makers) < 2:
                raise ValueError("rank schedule needs at least two makers")
            for m in makers:
                if "min_loss" not in vmap[m].diagnostics:
                    raise ValueError(f"maker {m} verdict lacks a min_loss diagnostic")
            # rank 1 = most capable = largest posterior loss of replacing them
            ranked = sorted(makers, key=lambda m: (-vmap[m].diagnostics["min_loss"], m))
            n = len(ranked)
            lams = {}
            for r, m in enumerate(ranked, start=1):
                lams[m] = (r - 1) / (n - 1) if self.direction == "less-capable-more" else (n - r) / (n - 1)
        if self.scope == "less-capable-only":
            for m in makers:
                if not vmap[m].replace:
                    lams[m] = 0.0
        return lams


@dataclass(frozen=True)
class RandomizedResult:
    pair: RatePair
    counts: ConfusionCounts
    lambdas: dict[str, float]


def randomized_accept(
    performance: CohortDataset,
    verdicts,
    schedule: AcceptanceSchedule,
    scorer: Scorer,
    seed: int | np.random.Generator,
) -> RandomizedResult:
    """Per-case coin flip between maker and machine decisions.

    One uniform draw per case, in cohort order: the machine's call is
    used when the draw is at or below the maker's lambda.  lambda = 0
    reproduces the makers exactly and lambda = 1 the machine exactly.
    """
    vmap = _verdict_map(verdicts)
    missing = [m for m in performance.makers if m not in vmap]
    if missing:
        raise ValueError(f"no verdict for makers: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    lams = schedule.resolve(performance.makers, vmap)
    lam_per_case = np.asarray([lams[m] for m in performance.makers])[performance.maker_index]
    rng = np.random.default_rng(seed)
    u = rng.random(performance.n_cases)
    use_machine = (lam_per_case > 0.0) & (u <= lam_per_case)
    final = performance.y_hat.copy()
    if use_machine.any():
        thr = np.zeros(performance.n_cases)
        for i, m in enumerate(performance.makers):
            if lams[m] > 0.0:
                if vmap[m].threshold is None:
                    raise ValueError(f"maker {m} has positive lambda but no threshold")
                thr[performance.maker_index == i] = vmap[m].threshold
        machine = _machine_calls(performance, scorer, thr)
        final[use_machine] = machine[use_machine]
    counts = tally_confusion(performance.y, final)
    return RandomizedResult(pair=rate_pair(counts), counts=counts, lambdas=lams)


# -- CSV interchange ---------------------------------------------------

_FMT = "%.10g"


def write_combined_csv(path, rows: list[tuple[str, RatePair, int]]) -> None:
    """Rows of (label, pooled pair, n_replaced)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "fpr", "tpr", "n_replaced"])
        for label, pair, n_replaced in rows:
            writer.writerow([label, _FMT % pair.alpha, _FMT % pair.beta, str(n_replaced)])


def write_path_csv(path, points: list[PathPoint]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fraction", "fpr", "tpr"])
        for pt in points:
            writer.writerow([_FMT % pt.fraction, _FMT % pt.pair.alpha, _FMT % pt.pair.beta])


def write_randomized_csv(path, rows: list[tuple[float, RatePair, int]]) -> None:
    """Rows of (lambda, pooled pair, seed)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "fpr", "tpr", "seed"])
        for lam, pair, seed in rows:
            writer.writerow([_FMT % lam, _FMT % pair.alpha, _FMT % pair.beta, str(seed)])
