#!/usr/bin/env python3
"""Why a logarithmic range dependence matters.

The peeling baseline adds noise whose scale is linear in the a priori range
bound r_inf, so doubling the assumed range doubles its error.  The threshold
estimator's support stage never reads the range at all, and its univariate
stage touches it only through a histogram extent.  This demo sweeps r_inf on
fixed data at two sample sizes:

  * n = 1500 (the figure-style regime): support quality already shows the
    contrast - the threshold support curve is exactly flat while peeling
    collapses;
  * n = 20000 (theorem-scale): the full l2 error of the threshold estimator
    is flat in the range bound while peeling keeps degrading, because the
    private histogram stage now has the samples its noise level requires.
"""

from collections import defaultdict

import numpy as np

from dpse import ExperimentConfig, run_experiment

SWEEP = (10.0, 20.0, 40.0, 80.0, 160.0)


def summarize(records, metric, agg=np.mean):
    table = defaultdict(dict)
    by = defaultdict(list)
    for r in records:
        if r.metric == metric:
            by[(r.algorithm, r.sweep_value)].append(r.value)
    for (alg, sweep), values in sorted(by.items()):
        table[alg][sweep] = agg(values)
    return table


def show(table, label):
    print(f"\n  {label}")
    print("  r_inf:      " + "".join(f"{s:>9.0f}" for s in SWEEP))
    for alg, row in table.items():
        print(f"  {alg:<12}" + "".join(f"{row[s]:>9.3f}" for s in SWEEP))


print("=== figure-style regime: d=1000, k=20, n=1500, eps=0.5 ===")
cfg = ExperimentConfig(
    experiment="demo_small", d=1000, k=20, n=1500, sigma2=1.0, epsilon=0.5,
    r_inf_sweep=SWEEP, seeds=(0, 1, 2), support_threshold=2.0,
)
records = run_experiment(cfg)
show(summarize(records, "support_mass_fraction"), "mean support-mass fraction")
show(summarize(records, "l2_error", np.median), "median l2 error")
print("\n  (the univariate stage is starved at this n: its histogram noise")
print("   scale 4k/eps exceeds the achievable bin counts, so l2 error is")
print("   dominated by localization failures and grows with the range)")

print("\n=== theorem-scale regime: d=200, k=5, n=20000, eps=0.5 ===")
# coord_range 8 keeps the tight clamp at r_inf=10 from truncating the data,
# so the sweep isolates the pure noise-scale effect
cfg_big = ExperimentConfig(
    experiment="demo_big", d=200, k=5, n=20_000, sigma2=1.0, epsilon=0.5,
    coord_range=8.0, r_inf_sweep=SWEEP, seeds=(0, 1, 2), support_threshold=2.0,
)
records_big = run_experiment(cfg_big)
show(summarize(records_big, "l2_error", np.median), "median l2 error")
print("\n  threshold is now flat across a 16x range sweep; peeling doubles")
print("  with every doubling of the assumed range.")
