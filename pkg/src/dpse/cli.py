"""Command line surface: gen / estimate / experiment / robustness / bounds.

The default seed comes from --seed, falling back to the DPSE_SEED environment
variable (decimal integer), falling back to 0.  ``experiment`` can read a
key=value config file; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .baselines import PeelingParams, cwz_peeling_estimate, nonprivate_baseline
from .data import Dataset, generate_sparse_gaussian
from .harness import (
    ExperimentConfig,
    RobustnessCheckConfig,
    emit_csv,
    preset_config,
    print_bounds,
    run_experiment,
    run_robustness_check,
)
from .rng import RngHandle
from .subset_selection import SubsetSelectionParams, subset_selection_estimate
from .threshold import ThresholdParams, threshold_estimate


def _default_seed() -> int:
    return int(os.environ.get("DPSE_SEED", "0"))


def _parse_config_file(path: str) -> dict:
    """key = value lines; '#' comments; commas make tuples."""
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.rstrip()}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def _coerce_config_values(raw: dict) -> dict:
    field_types = {
        "experiment": str,
        "d": int, "k": int, "n": int,
        "sigma2": float, "epsilon": float, "coord_range": float,
        "bootstrap_resamples": int, "confidence": float,
        "alpha": float, "beta": float,
    }
    out: dict = {}
    for key, value in raw.items():
        if key == "r_inf_sweep":
            out[key] = tuple(float(v) for v in value.split(","))
        elif key == "seeds":
            out[key] = tuple(int(v) for v in value.split(","))
        elif key == "algorithms":
            out[key] = tuple(v.strip() for v in value.split(","))
        elif key == "bucket_size":
            out[key] = None if value.lower() == "none" else int(value)
        elif key == "support_threshold":
            out[key] = None if value.lower() == "none" else float(value)
        elif key in field_types:
            out[key] = field_types[key](value)
        else:
            raise ValueError(f"unknown config key: {key}")
    return out


def _cmd_gen(args) -> int:
    rng = RngHandle(args.seed)
    truth, data = generate_sparse_gaussian(
        rng, args.d, args.k, args.coord_range, args.sigma2, args.n
    )
    data.save_csv(args.out)
    if args.truth_out:
        np.savetxt(args.truth_out, truth.mu[None, :], delimiter=",", fmt="%.17g")
    print(f"wrote {args.n} x {args.d} dataset to {args.out} (seed {args.seed})")
    return 0


def _cmd_estimate(args) -> int:
    data = Dataset.load_csv(getattr(args, "in"))
    rng = RngHandle(args.seed)
    r_l2 = math.sqrt(args.k) * args.r_inf
    if args.alg == "threshold":
        params = ThresholdParams(
            k=args.k, epsilon=args.eps, beta=0.1, sigma2=args.sigma2,
            alpha=args.alpha, range_bound=r_l2, bucket_size=args.bucket_size,
        )
        estimate, support, _ = threshold_estimate(rng, data, params)
    elif args.alg == "cwz":
        estimate, support = cwz_peeling_estimate(
            rng, data, PeelingParams(k=args.k, epsilon=args.eps, r_inf=args.r_inf)
        )
    elif args.alg == "subset-sel":
        params = SubsetSelectionParams(
            k=args.k, epsilon=args.eps, sigma2=args.sigma2,
            alpha=args.alpha, range_bound=r_l2,
        )
        estimate, support, _ = subset_selection_estimate(rng, data, params)
        support = list(support)
    elif args.alg == "nonprivate":
        estimate, support = nonprivate_baseline(data, args.k)
    else:
        raise ValueError(f"unknown algorithm {args.alg!r}")
    np.savetxt(args.out, estimate[None, :], delimiter=",", fmt="%.17g")
    print(f"estimate written to {args.out}; support {sorted(int(i) for i in support)}")
    return 0


def _cmd_experiment(args) -> int:
    overrides: dict = {}
    if args.config:
        overrides.update(_coerce_config_values(_parse_config_file(args.config)))
    for key in ("d", "k", "n", "sigma2", "epsilon", "coord_range",
                "bucket_size", "support_threshold"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.seeds:
        overrides["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if args.sweep:
        overrides["r_inf_sweep"] = tuple(float(v) for v in args.sweep.split(","))
    if args.algorithms:
        overrides["algorithms"] = tuple(a.strip() for a in args.algorithms.split(","))
    if args.preset:
        cfg = preset_config(args.preset, **overrides)
    else:
        cfg = ExperimentConfig(**overrides)
    records = run_experiment(cfg)
    emit_csv(records, args.out)
    print(f"{len(records)} records -> {args.out}")
    return 0


def _cmd_robustness(args) -> int:
    cfg = RobustnessCheckConfig(
        mechanism=args.mech,
        n=args.n,
        epsilon=args.eps,
        delta=args.delta,
        accuracy_radius=args.radius,
        target_beta=args.target_beta,
        corruption_counts=tuple(int(t) for t in args.t.split(",")),
        trials=args.trials,
        seed=args.seed,
        magnitude=args.magnitude,
    )
    records, verdict = run_robustness_check(cfg)
    if args.out:
        emit_csv(records, args.out)
    print(verdict.summary())
    return 0 if verdict.passed else 1


def _cmd_bounds(args) -> int:
    print_bounds(args.beta, args.eps, args.delta, args.n)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpse",
        description="Differentially private, adversarially robust sparse mean estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic sparse-Gaussian dataset CSV")
    p.add_argument("--d", type=int, default=1000)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--n", type=int, default=1500)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--coord-range", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", default=None, help="also write the true mean vector")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("estimate", help="run one estimator on a dataset CSV")
    p.add_argument("--alg", required=True,
                   choices=["threshold", "cwz", "subset-sel", "nonprivate"])
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r-inf", type=float, default=10.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--bucket-size", type=int, default=1)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("experiment", help="run a figure-style sweep experiment")
    p.add_argument("--preset", choices=["fig1", "fig2"], default=None)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--coord-range", dest="coord_range", type=float, default=None)
    p.add_argument("--seeds", default=None, help="comma-separated seed list")
    p.add_argument("--sweep", default=None, help="comma-separated r_inf sweep")
    p.add_argument("--algorithms", default=None, help="comma-separated algorithms")
    p.add_argument("--bucket-size", dest="bucket_size", type=int, default=None)
    p.add_argument("--support-threshold", dest="support_threshold", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("robustness", help="empirical meta-theorem robustness check")
    p.add_argument("--mech", default="laplace_1d_mean")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--target-beta", type=float, default=0.01)
    p.add_argument("--t", default="1,2,5", help="comma-separated corruption counts")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--magnitude", type=float, default=1e4)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_robustness)

    p = sub.add_parser("bounds", help="print the automatic-robustness bounds")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
