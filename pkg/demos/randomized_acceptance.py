"""Soft replacement: accept the machine's call on a coin flip per case.

Hard replacement hands every case of a flagged maker to the machine.
A gentler rollout mixes per case: with probability lambda the machine
decides, otherwise the maker does.  lambda = 0 is the raw cohort,
lambda = 1 is full replacement, and the pooled rates drift monotonely
between those endpoints as lambda rises.
"""

import numpy as np

from rocbench import (
    AcceptanceSchedule,
    HeterogeneousCutoffsSpec,
    ReplacementVerdict,
    combine_decisions,
    generate_heterogeneous_cutoffs,
    randomized_accept,
    rate_pair,
)

het = generate_heterogeneous_cutoffs(
    HeterogeneousCutoffsSpec(n_makers=12, cases_per_maker=500, seed=5)
)
data = het.data
scorer = lambda feats: feats[:, 0]  # the case score is the single feature

# verdicts: swap out makers whose cutoff is far from the sweet spot
verdicts = [
    ReplacementVerdict(maker_id=m, replace=bool(abs(c - 0.45) > 0.2), threshold=0.45,
                       diagnostics={"min_loss": float(abs(c - 0.45))})
    for m, c in zip(data.makers, het.cutoffs)
]
n_flagged = sum(v.replace for v in verdicts)
raw = rate_pair(data.pooled_counts())
full = combine_decisions(data, verdicts, scorer)
print(f"{len(data.makers)} makers, {n_flagged} flagged for replacement")
print(f"raw cohort:        fpr={raw.alpha:.4f} tpr={raw.beta:.4f}")
print(f"hard replacement:  fpr={full.pair.alpha:.4f} tpr={full.pair.beta:.4f}")

print("\nlambda     fpr      tpr")
for lam in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
    result = randomized_accept(
        data, verdicts, AcceptanceSchedule.constant(lam), scorer, seed=0
    )
    print(f"  {lam:.1f}    {result.pair.alpha:.4f}   {result.pair.beta:.4f}")

print("\nendpoints are exact: lambda=0 reproduces the makers, lambda=1 the")
print("hard-replacement bench; in between, one uniform draw per case decides.")

# a rank-based schedule: the weakest makers get the highest lambda
sched = AcceptanceSchedule.linear_by_rank(direction="less-capable-more", scope="all-makers")
result = randomized_accept(data, verdicts, sched, scorer, seed=0)
lams = result.lambdas
spread = sorted(lams.values())
print(f"\nrank schedule lambdas: min={spread[0]:.2f} median={spread[len(spread)//2]:.2f} max={spread[-1]:.2f}")
print(f"rank schedule pooled pair: fpr={result.pair.alpha:.4f} tpr={result.pair.beta:.4f}")
