"""Benchmark human decision makers against a machine classifier's ROC curve.

The package covers the full workflow: tally confusion counts per maker,
build the machine's empirical ROC polyline, test each maker's rate pair
against the curve with either confidence ellipses or Dirichlet
posteriors, decide who to replace (and at which machine threshold), and
evaluate the mixed human/machine cohort.  Synthetic generators with
closed-form truths exercise every stage.
"""

from .core import (
    CaseRecord,
    CohortDataset,
    ConfusionCounts,
    DegenerateMakerError,
    RatePair,
    confusion_counts,
    rate_pair,
    read_cases_csv,
    stratified_split,
    tally_confusion,
    write_cases_csv,
)
from .rng import substream
from .roc import (
    DominatingSegment,
    RocCurve,
    build_roc,
    np_best_vertex,
    np_objective,
    read_roc_csv,
    write_roc_csv,
)
from .forest import (
    Forest,
    ForestParams,
    forest_from_json,
    forest_to_json,
    load_forest,
    save_forest,
    train_forest,
)
from .frequentist import (
    BootstrapPairs,
    CaseLabel,
    DeltaTestResult,
    EllipseSet,
    FrequentistVerdict,
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
from .bayes import (
    CostBenefitLoss,
    DirichletParams,
    DominanceResult,
    LossKind,
    PosteriorDraws,
    RetentionMethod,
    RetentionResult,
    benchmark_maker_bayesian,
    curve_candidate_grid,
    loss_eval,
    max_dominance,
    min_posterior_loss,
    posterior_params,
    prob_below_roc,
    read_bayesian_csv,
    replace_decision,
    reversed_null_retain,
    sample_posterior,
    write_bayesian_csv,
)
from .replacement import (
    AcceptanceSchedule,
    CombinedResult,
    PathPoint,
    RandomizedResult,
    ReplacementVerdict,
    combine_decisions,
    randomized_accept,
    replacement_path,
    write_combined_csv,
    write_path_csv,
    write_randomized_csv,
)
from .synthetic import (
    ComplementaritySpec,
    HeterogeneousCutoffsSpec,
    IncentiveSpec,
    PredictedDoctorSpec,
    concave_reference_roc,
    concave_reference_tpr,
    cutoff_pair,
    generate_complementarity,
    generate_heterogeneous_cutoffs,
    generate_incentive,
    generate_predicted_doctor,
    incentive_analytic,
)
from .cli import RunConfig

__version__ = "0.1.0"
