"""Case-level data model for decision-maker benchmarking.

A *case* is one decision instance: a maker id, the realized binary
outcome ``y``, the maker's binary call ``y_hat``, and optionally the
feature vector available to the machine.  A cohort is a column store of
cases grouped by maker.

Rates follow the screening convention

    alpha = n01 / (n01 + n00)    false positive rate
    beta  = n11 / (n11 + n10)    true positive rate

where ``nab`` counts cases with ``y == a`` and ``y_hat == b``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "CaseRecord",
    "ConfusionCounts",
    "RatePair",
    "CohortDataset",
    "DegenerateMakerError",
    "confusion_counts",
    "tally_confusion",
    "rate_pair",
    "stratified_split",
    "read_cases_csv",
    "write_cases_csv",
]


class DegenerateMakerError(ValueError):
    """A maker whose cases lack one outcome class; rates are undefined."""


class CaseRecord(NamedTuple):
    maker_id: str
    y: int
    y_hat: int
    features: tuple[float, ...] | None = None


class RatePair(NamedTuple):
    """(false positive rate, true positive rate) of a decision rule."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts n_ab of cases with y == a and y_hat == b."""

    n11: int
    n01: int
    n10: int
    n00: int

    def __post_init__(self):
        for field in ("n11", "n01", "n10", "n00"):
            v = getattr(self, field)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{field} must be a non-negative integer, got {v!r}")

    @property
    def n(self) -> int:
        return self.n11 + self.n01 + self.n10 + self.n00

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.n11 + other.n11,
            self.n01 + other.n01,
            self.n10 + other.n10,
            self.n00 + other.n00,
        )


def tally_confusion(y: np.ndarray, y_hat: np.ndarray) -> ConfusionCounts:
    """Confusion counts from parallel 0/1 arrays."""
    y = np.asarray(y)
    y_hat = np.asarray(y_hat)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise ValueError("y and y_hat must be 1-d arrays of equal length")
    if y.size == 0:
        raise ValueError("empty case set")
    if not (np.isin(y, (0, 1)).all() and np.isin(y_hat, (0, 1)).all()):
        raise ValueError("y and y_hat must be 0 or 1")
    pos = y == 1
    hat = y_hat == 1
    return ConfusionCounts(
        n11=int(np.count_nonzero(pos & hat)),
        n01=int(np.count_nonzero(~pos & hat)),
        n10=int(np.count_nonzero(pos & ~hat)),
        n00=int(np.count_nonzero(~pos & ~hat)),
    )


def confusion_counts(cases: Iterable[CaseRecord]) -> ConfusionCounts:
    """Tally the four confusion cells over a sequence of cases."""
    cases = list(cases)
    if not cases:
        raise ValueError("empty case set")
    y = np.fromiter((c.y for c in cases), dtype=np.int64, count=len(cases))
    y_hat = np.fromiter((c.y_hat for c in cases), dtype=np.int64, count=len(cases))
    if not (np.isin(y, (0, 1)).all() and np.isin(y_hat, (0, 1)).all()):
        raise ValueError("y and y_hat must be 0 or 1")
    return tally_confusion(y, y_hat)


def rate_pair(counts: ConfusionCounts) -> RatePair:
    """Empirical (alpha, beta) of a maker's confusion counts.

    Raises DegenerateMakerError when either outcome class is absent,
    since the corresponding rate has a zero denominator.
    """
    negatives = counts.n01 + counts.n00
    positives = counts.n11 + counts.n10
    if negatives == 0 or positives == 0:
        raise DegenerateMakerError(
            f"degenerate counts (positives={positives}, negatives={negatives}): "
            "both outcome classes are required"
        )
    return RatePair(counts.n01 / negatives, counts.n11 / positives)


class CohortDataset:
    """Column store of cases grouped by maker.

    ``makers`` holds the unique ids in first-appearance order and
    ``maker_index[i]`` points each case at its maker.  ``features`` is
    an (n, d) float array or None when no features were recorded.
    """

    def __init__(
        self,
        makers: Sequence[str],
        maker_index: np.ndarray,
        y: np.ndarray,
        y_hat: np.ndarray,
        features: np.ndarray | None = None,
    ):
        self.makers = tuple(str(m) for m in makers)
        self.maker_index = np.ascontiguousarray(maker_index, dtype=np.int64)
        self.y = np.ascontiguousarray(y, dtype=np.uint8)
        self.y_hat = np.ascontiguousarray(y_hat, dtype=np.uint8)
        self.features = (
            None if features is None else np.ascontiguousarray(features, dtype=np.float64)
        )
        n = self.y.shape[0]
        if self.maker_index.shape != (n,) or self.y_hat.shape != (n,):
            raise ValueError("column lengths disagree")
        if not (np.isin(self.y, (0, 1)).all() and np.isin(self.y_hat, (0, 1)).all()):
            raise ValueError("y and y_hat must be 0 or 1")
        if len(set(self.makers)) != len(self.makers):
            raise ValueError("duplicate maker ids")
        if n and (self.maker_index.min() < 0 or self.maker_index.max() >= len(self.makers)):
            raise ValueError("maker_index out of range")
        if self.features is not None:
            if self.features.ndim != 2 or self.features.shape[0] != n:
                raise ValueError("features must be (n_cases, d)")
        for arr in (self.maker_index, self.y, self.y_hat, self.features):
            if arr is not None:
                arr.flags.writeable = False

    # -- construction ------------------------------------------------

    @classmethod
    def from_records(cls, records: Iterable[CaseRecord]) -> "CohortDataset":
        records = list(records)
        if not records:
            raise ValueError("empty case set")
        makers: list[str] = []
        lookup: dict[str, int] = {}
        idx = np.empty(len(records), dtype=np.int64)
        y = np.empty(len(records), dtype=np.uint8)
        y_hat = np.empty(len(records), dtype=np.uint8)
        d = None if records[0].features is None else len(records[0].features)
        feats = None if d is None else np.empty((len(records), d))
        for i, rec in enumerate(records):
            if rec.maker_id not in lookup:
                lookup[rec.maker_id] = len(makers)
                makers.append(rec.maker_id)
            idx[i] = lookup[rec.maker_id]
            if rec.y not in (0, 1) or rec.y_hat not in (0, 1):
                raise ValueError(f"case {i}: y and y_hat must be 0 or 1")
            y[i] = rec.y
            y_hat[i] = rec.y_hat
            has = None if rec.features is None else len(rec.features)
            if has != d:
                raise ValueError(f"case {i}: inconsistent feature arity")
            if d is not None:
                feats[i] = rec.features
        return cls(makers, idx, y, y_hat, feats)

    # -- views -------------------------------------------------------

    @property
    def n_cases(self) -> int:
        return self.y.shape[0]

    @property
    def n_features(self) -> int:
        return 0 if self.features is None else self.features.shape[1]

    @property
    def base_rate_hat(self) -> float:
        """Fraction of positive outcomes across all cases."""
        return float(self.y.mean())

    def maker_cases(self, maker_id: str) -> np.ndarray:
        """Row indices of one maker's cases."""
        try:
            code = self.makers.index(maker_id)
        except ValueError:
            raise KeyError(f"unknown maker {maker_id!r}") from None
        return np.flatnonzero(self.maker_index == code)

    def iter_makers(self) -> Iterator[tuple[str, np.ndarray]]:
        """Yield (maker_id, row indices) in first-appearance order."""
        for code, maker in enumerate(self.makers):
            yield maker, np.flatnonzero(self.maker_index == code)

    def counts_by_maker(self) -> dict[str, ConfusionCounts]:
        out = {}
        for maker, rows in self.iter_makers():
            if rows.size:
                out[maker] = tally_confusion(self.y[rows], self.y_hat[rows])
        return out

    def subset(self, rows: np.ndarray) -> "CohortDataset":
        """New cohort keeping the given case rows (maker table is re-derived)."""
        rows = np.asarray(rows, dtype=np.int64)
        sub_idx = self.maker_index[rows]
        kept_codes = sorted(set(sub_idx.tolist()), key=lambda c: c)
        # preserve first-appearance order of the parent cohort
        remap = {code: i for i, code in enumerate(kept_codes)}
        makers = [self.makers[c] for c in kept_codes]
        new_idx = np.fromiter((remap[c] for c in sub_idx), dtype=np.int64, count=rows.size)
        feats = None if self.features is None else self.features[rows]
        return CohortDataset(makers, new_idx, self.y[rows], self.y_hat[rows], feats)

    def records(self) -> Iterator[CaseRecord]:
        for i in range(self.n_cases):
            feats = None if self.features is None else tuple(float(v) for v in self.features[i])
            yield CaseRecord(self.makers[self.maker_index[i]], int(self.y[i]), int(self.y_hat[i]), feats)

    def pooled_counts(self) -> ConfusionCounts:
        return tally_confusion(self.y, self.y_hat)


def _split_quota(m: int, a: int, b: int) -> int:
    # floor the second split's share; the leftover case (if any) joins the first
    return m - (m * b) // (a + b)


def stratified_split(
    data: CohortDataset,
    ratio: tuple[int, int],
    seed: int | np.random.Generator,
) -> tuple[CohortDataset, CohortDataset]:
    """Random split preserving each maker's confusion-cell composition.

    Within every (maker, confusion cell) group the cases are permuted
    and divided ``ratio[0]:ratio[1]``, so each maker's alpha and beta
    are preserved across the two outputs up to integer rounding.
    """
    a, b = int(ratio[0]), int(ratio[1])
    if a < 0 or b < 0 or a + b < 1:
        raise ValueError(f"ratio must be two non-negative integers with positive sum, got {ratio}")
    rng = np.random.default_rng(seed)
    cell = 2 * data.y.astype(np.int64) + data.y_hat
    first: list[np.ndarray] = []
    second: list[np.ndarray] = []
    for _, rows in data.iter_makers():
        for c in range(4):
            group = rows[cell[rows] == c]
            m = group.size
            if m == 0:
                continue
            take = _split_quota(m, a, b)
            perm = rng.permutation(m)
            first.append(group[perm[:take]])
            second.append(group[perm[take:]])
    one = np.sort(np.concatenate(first)) if first else np.empty(0, dtype=np.int64)
    two = np.sort(np.concatenate(second)) if second else np.empty(0, dtype=np.int64)
    return data.subset(one), data.subset(two)


# -- CSV interchange -------------------------------------------------
#
# Format: header  maker_id,y,y_hat[,f1,f2,...]  with one row per case,
# y and y_hat literal 0/1, feature cells finite floats.

_FMT = "%.10g"


def write_cases_csv(path, data: CohortDataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        d = data.n_features
        writer.writerow(["maker_id", "y", "y_hat"] + [f"f{j + 1}" for j in range(d)])
        for i in range(data.n_cases):
            row = [data.makers[data.maker_index[i]], str(int(data.y[i])), str(int(data.y_hat[i]))]
            if d:
                row += [_FMT % v for v in data.features[i]]
            writer.writerow(row)


def read_cases_csv(path) -> CohortDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if header[:3] != ["maker_id", "y", "y_hat"]:
            raise ValueError(f"{path}: malformed header {header[:3]!r}")
        d = len(header) - 3
        makers: list[str] = []
        lookup: dict[str, int] = {}
        idx: list[int] = []
        ys: list[int] = []
        yhats: list[int] = []
        feats: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3 + d:
                raise ValueError(f"{path}: line {lineno}: expected {3 + d} fields, got {len(row)}")
            maker, y_s, yhat_s = row[0], row[1], row[2]
            if y_s not in ("0", "1") or yhat_s not in ("0", "1"):
                raise ValueError(f"{path}: line {lineno}: y and y_hat must be literal 0 or 1")
            if maker not in lookup:
                lookup[maker] = len(makers)
                makers.append(maker)
            idx.append(lookup[maker])
            ys.append(int(y_s))
            yhats.append(int(yhat_s))
            if d:
                try:
                    vals = [float(v) for v in row[3:]]
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: non-numeric feature") from None
                if not all(np.isfinite(vals)):
                    raise ValueError(f"{path}: line {lineno}: non-finite feature")
                feats.append(vals)
        if not ys:
            raise ValueError(f"{path}: no case rows")
        features = np.asarray(feats) if d else None
        return CohortDataset(makers, np.asarray(idx), np.asarray(ys), np.asarray(yhats), features)
