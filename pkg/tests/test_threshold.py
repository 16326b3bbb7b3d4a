"""Threshold estimator: score oracles, selection, sensitivity, theorem-scale
behavior, and independence from the range bound."""

import math

import numpy as np
import pytest

from dpse.data import Dataset, bucket_means, generate_sparse_gaussian, support_mass_fraction
from dpse.rng import RngHandle, derive_stream
from dpse.threshold import (
    CoordinateScores,
    ThresholdParams,
    coordinate_scores,
    select_support,
    threshold_estimate,
)

# theorem-scale instance used by several tests:
# d=50, k=3, alpha=1, beta=0.2 -> b=45, T=3.5/sqrt(45),
# n = 20*k*b*(ln d + ln(4k/beta))/eps ~ 21,600
THEOREM = dict(d=50, k=3, alpha=1.0, beta=0.2, sigma2=1.0, eps=1.0)
THEOREM_B = math.ceil(15 * THEOREM["k"] * THEOREM["sigma2"] / THEOREM["alpha"] ** 2)
THEOREM_N = math.ceil(
    20 * THEOREM["k"] * THEOREM_B
    * (math.log(THEOREM["d"]) + math.log(4 * THEOREM["k"] / THEOREM["beta"]))
    / THEOREM["eps"]
)


def _theorem_params(**overrides):
    base = dict(
        k=THEOREM["k"], epsilon=THEOREM["eps"], beta=THEOREM["beta"],
        sigma2=THEOREM["sigma2"], alpha=THEOREM["alpha"], range_bound=50.0,
    )
    base.update(overrides)
    return ThresholdParams(**base)


def test_auto_rules():
    p = _theorem_params()
    assert p.resolved_bucket_size(THEOREM_N) == THEOREM_B == 45
    assert p.resolved_threshold(45) == pytest.approx(3.5 / math.sqrt(45))
    assert _theorem_params(bucket_size=1, threshold=2.0).resolved_threshold(1) == 2.0


def test_coordinate_scores_all_below_threshold():
    bd = bucket_means(Dataset(np.full((30, 4), 0.1)), 1)
    assert np.all(coordinate_scores(bd, 0.5).z == 0)


def test_coordinate_scores_null_coordinate_rarely_fires():
    # 100 bucket means ~ N(0, 0.04) against T = 0.7 = 3.5 * 0.2:
    # two-sided exceedance prob 2*Phi(-3.5), so z=0 in ~95.4% of trials
    zeros = 0
    trials = 1000
    for i in range(trials):
        means = 0.2 * RngHandle(20, i).generator.standard_normal((100, 1))
        z = coordinate_scores(bucket_means(Dataset(means), 1), 0.7).z[0]
        zeros += z == 0
    expected = (1 - 2 * 0.00023262907903552504) ** 100  # (1 - 2*Phi(-3.5))^100
    sd = math.sqrt(expected * (1 - expected) / trials)
    assert zeros / trials >= expected - 4 * sd


def test_coordinate_scores_strong_coordinate_saturates():
    # mu_i = 2T: exceedance prob Phi(3.5) per bucket mean
    hits = 0
    for i in range(200):
        means = 1.4 + 0.2 * RngHandle(21, i).generator.standard_normal((100, 1))
        z = coordinate_scores(bucket_means(Dataset(means), 1), 0.7).z[0]
        hits += z >= 99
    assert hits / 200 >= 0.99 - 3 * math.sqrt(0.01 / 200)


def test_coordinate_scores_sensitivity_one():
    # swapping a single sample changes every z_i by at most 1
    gen = RngHandle(22).generator
    for trial in range(300):
        x = gen.standard_normal((60, 5)) * 3
        y = x.copy()
        y[gen.integers(0, 60)] = gen.standard_normal(5) * 50
        b = int(gen.choice([1, 3, 5]))
        za = coordinate_scores(bucket_means(Dataset(x), b), 1.0).z
        zb = coordinate_scores(bucket_means(Dataset(y), b), 1.0).z
        assert np.all(np.abs(za - zb) <= 1)


def test_select_support_noiseless_argmax():
    scores = CoordinateScores(z=np.array([5, 80, 2, 60, 1]))
    picked = select_support(RngHandle(23), scores, 2, epsilon_support=1e12)
    assert sorted(picked) == [1, 3]


def test_select_support_single_dominant():
    scores = CoordinateScores(z=np.array([100, 0, 0, 0, 0]))
    rng = RngHandle(24)
    picks = [select_support(derive_stream(rng, i), scores, 1, 1.0)[0] for i in range(1000)]
    assert all(p == 0 for p in picks)


def test_select_support_uniform_on_equal_scores():
    from scipy import stats

    scores = CoordinateScores(z=np.full(6, 7))
    rng = RngHandle(25)
    picks = np.array(
        [select_support(derive_stream(rng, i), scores, 2, 1.0) for i in range(10_000)]
    ).ravel()
    counts = np.bincount(picks, minlength=6)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_estimate_null_mean_is_small():
    errs = []
    for i in range(50):
        root = RngHandle(26, i)
        _, data = generate_sparse_gaussian(
            derive_stream(root, "data"), THEOREM["d"], 0, 10.0, 1.0, THEOREM_N
        )
        est, _, _ = threshold_estimate(derive_stream(root, "alg"), data, _theorem_params())
        errs.append(np.linalg.norm(est))
    assert np.median(errs) <= THEOREM["alpha"]


def test_estimate_theorem_scale_support_mass():
    hits = 0
    trials = 20
    for i in range(trials):
        root = RngHandle(27, i)
        truth, data = generate_sparse_gaussian(
            derive_stream(root, "data"), THEOREM["d"], THEOREM["k"], 10.0, 1.0, THEOREM_N
        )
        _, support, _ = threshold_estimate(derive_stream(root, "alg"), data, _theorem_params())
        target = 1.0
        if truth.mu @ truth.mu > 0:
            target = 1 - THEOREM["alpha"] ** 2 / (truth.mu @ truth.mu)
        hits += support_mass_fraction(support, truth) >= target
    assert hits / trials >= 1 - THEOREM["beta"]


def test_score_separation_at_theorem_scale():
    # signal scores clear null scores by more than 2k(ln d + ln(4k/beta))/eps
    gap_needed = (
        2 * THEOREM["k"]
        * (math.log(THEOREM["d"]) + math.log(4 * THEOREM["k"] / THEOREM["beta"]))
        / THEOREM["eps"]
    )
    t_val = 3.5 / math.sqrt(THEOREM_B)
    hits = 0
    trials = 20
    for i in range(trials):
        root = RngHandle(28, i)
        truth, data = generate_sparse_gaussian(
            derive_stream(root, "data"), THEOREM["d"], THEOREM["k"], 10.0, 1.0, THEOREM_N
        )
        z = coordinate_scores(bucket_means(data, THEOREM_B), t_val).z
        signal = [i for i in truth.support if abs(truth.mu[i]) >= t_val]
        nulls = [i for i in range(THEOREM["d"]) if truth.mu[i] == 0]
        if not signal:
            hits += 1
            continue
        hits += z[signal].min() - z[nulls].max() > gap_needed
    assert hits / trials >= 1 - THEOREM["beta"]


def test_budget_spend_equals_declared():
    root = RngHandle(29)
    _, data = generate_sparse_gaussian(derive_stream(root, "data"), 20, 2, 5.0, 1.0, 400)
    p = ThresholdParams(k=2, epsilon=0.7, beta=0.1, sigma2=1.0, alpha=1.0,
                        range_bound=20.0, bucket_size=1)
    _, _, spent = threshold_estimate(derive_stream(root, "alg"), data, p)
    assert spent.epsilon == 0.7


def test_support_selection_never_reads_range_bound():
    root = RngHandle(30)
    _, data = generate_sparse_gaussian(derive_stream(root, "data"), 30, 3, 8.0, 1.0, 600)
    supports = []
    for r in (10.0, 1e6):
        p = ThresholdParams(k=3, epsilon=1.0, beta=0.1, sigma2=1.0, alpha=1.0,
                            range_bound=r, bucket_size=1)
        _, support, _ = threshold_estimate(derive_stream(root, "alg"), data, p)
        supports.append(support)
    assert supports[0] == supports[1]


def test_flat_in_range_at_theorem_scale():
    """With enough samples for the histogram stage, the l2 error does not
    move when the a priori range bound grows 16x (the linear-range baseline
    degrades proportionally instead)."""
    errs = []
    for r_inf in (10.0, 160.0):
        root = RngHandle(31)
        truth, data = generate_sparse_gaussian(
            derive_stream(root, "data"), 200, 5, 10.0, 1.0, 20_000
        )
        p = ThresholdParams(k=5, epsilon=0.5, beta=0.1, sigma2=1.0, alpha=1.0,
                            range_bound=math.sqrt(5) * r_inf, bucket_size=1,
                            threshold=2.0)
        est, _, _ = threshold_estimate(derive_stream(root, "alg"), data, p)
        errs.append(np.linalg.norm(est - truth.mu))
    assert max(errs) / min(errs) <= 1.2


def test_requires_enough_samples_per_bucket():
    _, data = generate_sparse_gaussian(RngHandle(32), 10, 2, 5.0, 1.0, 40)
    p = ThresholdParams(k=2, epsilon=1.0, beta=0.1, sigma2=1.0, alpha=1.0,
                        range_bound=10.0, bucket_size=30)
    with pytest.raises(ValueError):
        threshold_estimate(RngHandle(33), data, p)
