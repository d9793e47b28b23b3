"""Command line driver.

Subcommands cover the pipeline stage by stage (simulate, split, train,
roc, bench-freq, bench-bayes, combine, path, randomized) plus `report`,
which runs the whole chain on one cases file: filter small makers,
split classification/performance, split train/validation, fit the
forest, build curves, benchmark every maker both ways, evaluate the
combined cohort, sweep the replacement path, and sweep randomized
acceptance rates.

Configuration comes from defaults, then an optional JSON config file,
then flags (flags win).  Every random stage draws from a named
substream of the single run seed, so reruns are byte-identical and
stages can be reproduced in isolation.  Errors print one JSON line to
stderr and exit 2.  The ROCBENCH_OUT environment variable sets the
default output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .bayes import DEFAULT_PRIOR_WEIGHT, LossKind, benchmark_maker_bayesian, read_bayesian_csv, write_bayesian_csv
from .core import CohortDataset, rate_pair, read_cases_csv, stratified_split, write_cases_csv
from .forest import ForestParams, load_forest, save_forest, train_forest
from .frequentist import benchmark_maker_frequentist, write_frequentist_csv
from .replacement import (
    AcceptanceSchedule,
    ReplacementVerdict,
    combine_decisions,
    randomized_accept,
    replacement_path,
    write_combined_csv,
    write_path_csv,
    write_randomized_csv,
)
from .rng import substream
from .roc import build_roc, read_roc_csv, write_roc_csv
from . import synthetic
from .synthetic import (
    ComplementaritySpec,
    HeterogeneousCutoffsSpec,
    IncentiveSpec,
    PredictedDoctorSpec,
    generate_complementarity,
    generate_heterogeneous_cutoffs,
    generate_incentive,
    generate_predicted_doctor,
)

OUT_ENV = "ROCBENCH_OUT"
_FMT = "%.10g"

__all__ = ["RunConfig", "main"]


@dataclass(frozen=True)
class RunConfig:
    """Resolved pipeline settings; every field has a flag of the same name."""

    seed: int = 0
    outer_ratio: tuple[int, int] = (7, 3)  # classification : performance
    inner_ratio: tuple[int, int] = (4, 3)  # train : validation
    n_trees: int = 100
    max_features: int = 50
    min_samples_split: int = 50
    bootstrap: bool = True
    n_resamples: int = 100
    n_draws: int = 10_000
    level: float = 0.95
    loss_kind: str = "baseline"
    grid_size: int = 512
    min_cases: int = 300
    prior_weight: float = DEFAULT_PRIOR_WEIGHT

    def __post_init__(self):
        object.__setattr__(self, "outer_ratio", tuple(int(v) for v in self.outer_ratio))
        object.__setattr__(self, "inner_ratio", tuple(int(v) for v in self.inner_ratio))
        for name in ("outer_ratio", "inner_ratio"):
            r = getattr(self, name)
            if len(r) != 2 or min(r) < 1:
                raise ValueError(f"{name} must be two positive integers")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must be in (0, 1)")
        if self.min_cases < 1:
            raise ValueError("min_cases must be >= 1")
        LossKind(self.loss_kind)
        if self.prior_weight <= 0:
            raise ValueError("prior_weight must be positive")

    def forest_params(self) -> ForestParams:
        # the forest gets its own substream-derived seed so its
        # per-tree streams cannot collide with any other stage
        forest_seed = int(substream(self.seed, "forest").integers(2**63))
        return ForestParams(
            n_trees=self.n_trees,
            max_features=self.max_features,
            min_samples_split=self.min_samples_split,
            bootstrap=self.bootstrap,
            seed=forest_seed,
        )

    def loss(self) -> LossKind:
        return LossKind(self.loss_kind)


def _parse_ratio(text: str) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"ratio must look like 7:3, got {text!r}")
    return int(parts[0]), int(parts[1])


def _load_config(args) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"{args.config}: unknown config keys {sorted(unknown)}")
        values.update(raw)
    for f in dataclasses.fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    if getattr(args, "no_bootstrap", False):
        values["bootstrap"] = False
    for key in ("outer_ratio", "inner_ratio"):
        if isinstance(values.get(key), str):
            values[key] = _parse_ratio(values[key])
    return RunConfig(**values)


def _out_dir(args) -> str:
    out = getattr(args, "out", None) or os.environ.get(OUT_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _out_file(args, default_name: str) -> str:
    out = getattr(args, "out", None)
    if out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return out
    base = os.environ.get(OUT_ENV) or "."
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, default_name)


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _pair_dict(pair) -> dict:
    return {"fpr": pair.alpha, "tpr": pair.beta}


def _filter_small_makers(data: CohortDataset, min_cases: int) -> tuple[CohortDataset, int]:
    sizes = np.bincount(data.maker_index, minlength=len(data.makers))
    keep_codes = np.flatnonzero(sizes >= min_cases)
    dropped = len(data.makers) - keep_codes.size
    if dropped == 0:
        return data, 0
    if keep_codes.size == 0:
        raise ValueError(f"no maker has at least {min_cases} cases")
    rows = np.flatnonzero(np.isin(data.maker_index, keep_codes))
    return data.subset(rows), dropped


def _freq_to_replacement(verdicts) -> list[ReplacementVerdict]:
    """Bridge three-way calls into replace/retain with one threshold.

    A flagged maker is assigned the midpoint of their dominating
    threshold interval; retained makers carry no threshold.
    """
    out = []
    for v in verdicts:
        thr = None
        if v.segment is not None:
            thr = 0.5 * (v.segment.c_lower + v.segment.c_upper)
        out.append(
            ReplacementVerdict(
                maker_id=v.maker_id,
                replace=v.label.replace,
                threshold=thr,
                diagnostics={"case_label": v.label.value},
            )
        )
    return out


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip() != ""]


# -- subcommands ---------------------------------------------------------


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    if args.dgp == "complementarity":
        spec = ComplementaritySpec(
            n_cases=args.n_cases, n_makers=args.n_makers,
            capable_fraction=args.capable_fraction, seed=seed,
            export_hidden=args.export_hidden, shuffle_groups=args.shuffle_groups,
        )
        data = generate_complementarity(spec).data
    elif args.dgp == "predicted-doctor":
        spec = PredictedDoctorSpec(scenario=args.scenario, n=args.n, c0=args.c0, seed=seed)
        data = generate_predicted_doctor(spec).data
    elif args.dgp == "incentive":
        spec = IncentiveSpec(n=args.n, seed=seed)
        data = generate_incentive(spec).data
    else:
        if args.cutoffs:
            cutoffs = tuple(_parse_floats(args.cutoffs))
        else:
            cutoffs = ("uniform", args.cutoff_lo, args.cutoff_hi)
        spec = HeterogeneousCutoffsSpec(
            n_makers=args.n_makers, cases_per_maker=args.cases_per_maker,
            cutoffs=cutoffs, seed=seed,
        )
        data = generate_heterogeneous_cutoffs(spec).data
    write_cases_csv(os.path.join(out, "cases.csv"), data)
    synthetic.write_manifest(os.path.join(out, "manifest.json"), spec)
    return 0


def _cmd_split(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    data = read_cases_csv(args.cases)
    ratio = _parse_ratio(args.ratio)
    left, right = stratified_split(data, ratio, substream(cfg.seed, "split", args.label))
    name_a, name_b = (args.names.split(",") + ["a", "b"])[:2]
    write_cases_csv(os.path.join(out, f"{name_a}.csv"), left)
    write_cases_csv(os.path.join(out, f"{name_b}.csv"), right)
    _write_json(
        os.path.join(out, "split_manifest.json"),
        {
            "label": args.label,
            "ratio": list(ratio),
            "seed": cfg.seed,
            name_a: left.n_cases,
            name_b: right.n_cases,
        },
    )
    return 0


def _cmd_train(args) -> int:
    cfg = _load_config(args)
    data = read_cases_csv(args.cases)
    if data.features is None:
        raise ValueError(f"{args.cases}: no feature columns; cannot train")
    forest = train_forest(data.features, data.y, cfg.forest_params())
    save_forest(_out_file(args, "forest.json"), forest)
    return 0


def _cmd_roc(args) -> int:
    data = read_cases_csv(args.cases)
    if data.features is None:
        raise ValueError(f"{args.cases}: no feature columns; cannot score")
    forest = load_forest(args.model)
    roc = build_roc(forest.predict_propensity(data.features), data.y)
    write_roc_csv(_out_file(args, "roc.csv"), roc)
    return 0


def _cmd_bench_freq(args) -> int:
    cfg = _load_config(args)
    data = read_cases_csv(args.cases)
    data, _ = _filter_small_makers(data, cfg.min_cases)
    roc = read_roc_csv(args.roc)
    verdicts = [
        benchmark_maker_frequentist(
            m, counts, roc, level=cfg.level, n_resamples=cfg.n_resamples,
            seed=substream(cfg.seed, "bootstrap", m), cov_method=args.cov,
        )
        for m, counts in data.counts_by_maker().items()
    ]
    write_frequentist_csv(_out_file(args, "verdicts_freq.csv"), verdicts)
    return 0


def _cmd_bench_bayes(args) -> int:
    cfg = _load_config(args)
    data = read_cases_csv(args.cases)
    data, _ = _filter_small_makers(data, cfg.min_cases)
    roc = read_roc_csv(args.roc)
    verdicts = [
        benchmark_maker_bayesian(
            m, counts, roc, prior=cfg.prior_weight, n_draws=cfg.n_draws,
            seed=substream(cfg.seed, "posterior", m), credible_level=cfg.level,
            kind=cfg.loss(), grid_size=cfg.grid_size,
        )
        for m, counts in data.counts_by_maker().items()
    ]
    write_bayesian_csv(_out_file(args, "verdicts_bayes.csv"), verdicts)
    return 0


def _cmd_combine(args) -> int:
    data = read_cases_csv(args.cases)
    verdicts = read_bayesian_csv(args.verdicts)
    forest = load_forest(args.model)
    raw = rate_pair(data.pooled_counts())
    combined = combine_decisions(data, verdicts, forest.predict_propensity)
    write_combined_csv(
        _out_file(args, "combined.csv"),
        [("raw", raw, 0), ("combined", combined.pair, combined.n_replaced)],
    )
    return 0


def _cmd_path(args) -> int:
    data = read_cases_csv(args.cases)
    verdicts = read_bayesian_csv(args.verdicts)
    forest = load_forest(args.model)
    fractions = _parse_floats(args.fractions)
    points = replacement_path(data, verdicts, fractions, forest.predict_propensity)
    write_path_csv(_out_file(args, "path.csv"), points)
    return 0


def _cmd_randomized(args) -> int:
    cfg = _load_config(args)
    data = read_cases_csv(args.cases)
    verdicts = read_bayesian_csv(args.verdicts)
    forest = load_forest(args.model)
    rows = []
    for lam in _parse_floats(args.lambdas):
        schedule = AcceptanceSchedule.constant(lam, scope=args.scope)
        result = randomized_accept(
            data, verdicts, schedule, forest.predict_propensity,
            substream(cfg.seed, "acceptance", _FMT % lam),
        )
        rows.append((lam, result.pair, cfg.seed))
    write_randomized_csv(_out_file(args, "randomized.csv"), rows)
    return 0


def _cmd_report(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    data = read_cases_csv(args.cases)
    data, dropped = _filter_small_makers(data, cfg.min_cases)

    classification, performance = stratified_split(
        data, cfg.outer_ratio, substream(cfg.seed, "split", "outer")
    )
    train, validation = stratified_split(
        classification, cfg.inner_ratio, substream(cfg.seed, "split", "inner")
    )
    if data.features is None:
        raise ValueError(f"{args.cases}: no feature columns; cannot train")
    forest = train_forest(train.features, train.y, cfg.forest_params())
    roc_val = build_roc(forest.predict_propensity(validation.features), validation.y)
    roc_perf = build_roc(forest.predict_propensity(performance.features), performance.y)

    counts = classification.counts_by_maker()
    verdicts_freq = [
        benchmark_maker_frequentist(
            m, counts[m], roc_val, level=cfg.level, n_resamples=cfg.n_resamples,
            seed=substream(cfg.seed, "bootstrap", m),
        )
        for m in classification.makers
    ]
    verdicts_bayes = [
        benchmark_maker_bayesian(
            m, counts[m], roc_val, prior=cfg.prior_weight, n_draws=cfg.n_draws,
            seed=substream(cfg.seed, "posterior", m), credible_level=cfg.level,
            kind=cfg.loss(), grid_size=cfg.grid_size,
        )
        for m in classification.makers
    ]

    scorer = forest.predict_propensity
    raw_pair = rate_pair(performance.pooled_counts())
    combined_bayes = combine_decisions(performance, verdicts_bayes, scorer)
    combined_freq = combine_decisions(performance, _freq_to_replacement(verdicts_freq), scorer)
    fractions = [round(0.1 * k, 1) for k in range(11)]
    points = replacement_path(performance, verdicts_bayes, fractions, scorer)
    lam_rows = []
    for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
        result = randomized_accept(
            performance, verdicts_bayes, AcceptanceSchedule.constant(lam), scorer,
            substream(cfg.seed, "acceptance", _FMT % lam),
        )
        lam_rows.append((lam, result.pair, cfg.seed))

    _write_json(os.path.join(out, "config.json"), dataclasses.asdict(cfg))
    _write_json(
        os.path.join(out, "split_manifest.json"),
        {
            "min_cases": cfg.min_cases,
            "makers_dropped": dropped,
            "makers_kept": len(data.makers),
            "outer": {
                "ratio": list(cfg.outer_ratio),
                "classification": classification.n_cases,
                "performance": performance.n_cases,
            },
            "inner": {
                "ratio": list(cfg.inner_ratio),
                "train": train.n_cases,
                "validation": validation.n_cases,
            },
        },
    )
    save_forest(os.path.join(out, "forest.json"), forest)
    write_roc_csv(os.path.join(out, "roc_validation.csv"), roc_val)
    write_roc_csv(os.path.join(out, "roc_performance.csv"), roc_perf)
    write_frequentist_csv(os.path.join(out, "verdicts_freq.csv"), verdicts_freq)
    write_bayesian_csv(os.path.join(out, "verdicts_bayes.csv"), verdicts_bayes)
    write_combined_csv(
        os.path.join(out, "combined.csv"),
        [
            ("raw", raw_pair, 0),
            ("bayes", combined_bayes.pair, combined_bayes.n_replaced),
            ("freq", combined_freq.pair, combined_freq.n_replaced),
        ],
    )
    write_path_csv(os.path.join(out, "path.csv"), points)
    write_randomized_csv(os.path.join(out, "randomized.csv"), lam_rows)

    label_tally = {"case1": 0, "case2": 0, "case3": 0}
    for v in verdicts_freq:
        label_tally[v.label.value] += 1
    summary = {
        "seed": cfg.seed,
        "n_cases": data.n_cases,
        "n_makers": len(data.makers),
        "makers_dropped": dropped,
        "base_rate": data.base_rate_hat,
        "auc_validation": roc_val.auc(),
        "auc_performance": roc_perf.auc(),
        "raw": _pair_dict(raw_pair),
        "raw_gap_to_curve": float(roc_val.tpr_at_fpr(raw_pair.alpha) - raw_pair.beta),
        "combined_bayes": {**_pair_dict(combined_bayes.pair), "n_replaced": combined_bayes.n_replaced},
        "combined_freq": {**_pair_dict(combined_freq.pair), "n_replaced": combined_freq.n_replaced},
        "case_labels": label_tally,
        "bayes_replaced": sum(1 for v in verdicts_bayes if v.replace),
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    return 0


# -- argument plumbing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": message}), file=sys.stderr)
        raise SystemExit(2)


def _add_config_flags(p) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, help="run seed (all stages derive from it)")
    p.add_argument("--level", type=float, help="confidence/credible level")
    p.add_argument("--min-cases", dest="min_cases", type=int, help="minimum cases per maker")
    p.add_argument("--outer-ratio", dest="outer_ratio", help="classification:performance, e.g. 7:3")
    p.add_argument("--inner-ratio", dest="inner_ratio", help="train:validation, e.g. 4:3")
    p.add_argument("--trees", dest="n_trees", type=int, help="forest size")
    p.add_argument("--max-features", dest="max_features", type=int, help="features tried per node")
    p.add_argument("--min-split", dest="min_samples_split", type=int, help="minimum node size to split")
    p.add_argument("--no-bootstrap", action="store_true", help="fit trees on the raw sample")
    p.add_argument("--resamples", dest="n_resamples", type=int, help="bootstrap resamples")
    p.add_argument("--draws", dest="n_draws", type=int, help="posterior draws")
    p.add_argument("--loss", dest="loss_kind", help="posterior loss kind")
    p.add_argument("--grid", dest="grid_size", type=int, help="curve candidate grid size")
    p.add_argument("--prior", dest="prior_weight", type=float, help="Dirichlet prior weight per cell")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rocbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic cohort")
    p.add_argument("--dgp", required=True,
                   choices=["complementarity", "predicted-doctor", "incentive", "heterogeneous-cutoffs"])
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-cases", dest="n_cases", type=int, default=600_000)
    p.add_argument("--n-makers", dest="n_makers", type=int, default=2_000)
    p.add_argument("--capable-fraction", dest="capable_fraction", type=float, default=0.375)
    p.add_argument("--export-hidden", dest="export_hidden", action="store_true")
    p.add_argument("--shuffle-groups", dest="shuffle_groups", action="store_true")
    p.add_argument("--scenario", type=int, default=1)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--c0", type=float, default=0.7)
    p.add_argument("--cases-per-maker", dest="cases_per_maker", type=int, default=10_000)
    p.add_argument("--cutoff-lo", dest="cutoff_lo", type=float, default=0.2)
    p.add_argument("--cutoff-hi", dest="cutoff_hi", type=float, default=0.8)
    p.add_argument("--cutoffs", help="explicit comma-separated cutoffs, one per maker")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("split", help="stratified split of a cases file")
    p.add_argument("--cases", required=True)
    p.add_argument("--ratio", required=True, help="e.g. 7:3")
    p.add_argument("--label", default="outer", help="substream label; vary it for nested splits")
    p.add_argument("--names", default="a,b", help="output basenames, e.g. classification,performance")
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="fit the forest on a cases file")
    p.add_argument("--cases", required=True)
    p.add_argument("--out", help="model file (default forest.json)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("roc", help="score a cases file with a model and emit its curve")
    p.add_argument("--cases", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="curve file (default roc.csv)")
    p.set_defaults(func=_cmd_roc)

    p = sub.add_parser("bench-freq", help="confidence-set verdict per maker")
    p.add_argument("--cases", required=True)
    p.add_argument("--roc", required=True)
    p.add_argument("--cov", choices=["bootstrap", "asymptotic"], default="bootstrap")
    p.add_argument("--out", help="verdict file (default verdicts_freq.csv)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_bench_freq)

    p = sub.add_parser("bench-bayes", help="posterior dominance verdict per maker")
    p.add_argument("--cases", required=True)
    p.add_argument("--roc", required=True)
    p.add_argument("--out", help="verdict file (default verdicts_bayes.csv)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_bench_bayes)

    p = sub.add_parser("combine", help="evaluate the cohort with flagged makers replaced")
    p.add_argument("--cases", required=True, help="performance cases file")
    p.add_argument("--verdicts", required=True, help="bayesian verdict file")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="default combined.csv")
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("path", help="pooled pair as the replaced fraction sweeps 0 to 1")
    p.add_argument("--cases", required=True)
    p.add_argument("--verdicts", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--fractions", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")
    p.add_argument("--out", help="default path.csv")
    p.set_defaults(func=_cmd_path)

    p = sub.add_parser("randomized", help="per-case coin flip between maker and machine")
    p.add_argument("--cases", required=True)
    p.add_argument("--verdicts", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--lambdas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--scope", choices=["less-capable-only", "all-makers"], default="less-capable-only")
    p.add_argument("--out", help="default randomized.csv")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_randomized)

    p = sub.add_parser("report", help="full pipeline on one cases file")
    p.add_argument("--cases", required=True)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # single-line machine-readable failure
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
