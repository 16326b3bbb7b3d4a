"""Data-model tests: generation moments, contamination contract, bucketing,
the factor-4 sparsification bound, and the support-mass metric."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpse.data import (
    ContaminationSpec,
    Dataset,
    GroundTruth,
    bucket_means,
    contaminate,
    generate_sparse_gaussian,
    sparsify,
    support_mass_fraction,
)
from dpse.rng import RngHandle, derive_stream


# --- generation --------------------------------------------------------------

def test_generate_k_zero_gives_zero_mean():
    truth, data = generate_sparse_gaussian(RngHandle(0), d=10, k=0, coord_range=10.0,
                                           sigma2=1.0, n=50)
    assert np.all(truth.mu == 0)
    assert len(truth.support) == 0
    assert data.samples.shape == (50, 10)


def test_generate_zero_variance_replicates_mean():
    truth, data = generate_sparse_gaussian(RngHandle(1), d=8, k=3, coord_range=5.0,
                                           sigma2=0.0, n=20)
    assert np.all(data.samples == truth.mu)


def test_generate_rejects_k_above_d():
    with pytest.raises(ValueError):
        generate_sparse_gaussian(RngHandle(0), d=3, k=4, coord_range=1.0, sigma2=1.0, n=5)


def test_generate_mean_norm_second_moment():
    # E ||mu||^2 = k * range^2 / 3 = 20 * 100 / 3 = 666.7 for uniform coords
    norms2 = []
    for i in range(1000):
        truth, _ = generate_sparse_gaussian(RngHandle(2, i), d=1000, k=20,
                                            coord_range=10.0, sigma2=1.0, n=1)
        norms2.append(truth.mu @ truth.mu)
    assert 640 <= np.mean(norms2) <= 693


def test_generate_support_matches_nonzeros():
    truth, _ = generate_sparse_gaussian(RngHandle(3), d=50, k=5, coord_range=10.0,
                                        sigma2=1.0, n=2)
    assert set(np.flatnonzero(truth.mu)) <= set(truth.support)
    assert len(truth.support) == 5


# --- contamination -----------------------------------------------------------

def _small_instance(seed=4, n=100, d=6):
    rng = RngHandle(seed)
    truth, data = generate_sparse_gaussian(rng, d=d, k=2, coord_range=5.0,
                                           sigma2=1.0, n=n)
    return rng, truth, data


@pytest.mark.parametrize("strategy", ["shift_cluster", "sign_flip_support", "heavy_outlier"])
def test_contaminate_replaces_exact_count(strategy):
    rng, truth, data = _small_instance()
    spec = ContaminationSpec(eta=0.1, strategy=strategy, magnitude=50.0)
    out = contaminate(derive_stream(rng, "adv"), data, truth, spec)
    changed = np.any(out.samples != data.samples, axis=1).sum()
    assert changed == 10


def test_contaminate_eta_zero_is_identity():
    rng, truth, data = _small_instance()
    spec = ContaminationSpec(eta=0.0, strategy="shift_cluster", magnitude=50.0)
    out = contaminate(derive_stream(rng, "adv"), data, truth, spec)
    assert np.array_equal(out.samples, data.samples)


def test_contaminate_untouched_rows_byte_identical():
    rng, truth, data = _small_instance()
    spec = ContaminationSpec(eta=0.2, strategy="heavy_outlier", magnitude=100.0)
    out = contaminate(derive_stream(rng, "adv"), data, truth, spec)
    same = np.all(out.samples == data.samples, axis=1)
    assert np.array_equal(out.samples[same], data.samples[same])
    assert same.sum() == 80


def test_contaminate_shift_cluster_moves_mean_by_eta_magnitude():
    # replaced rows become mu + M*u, so the mean shifts by ~ eta * M * u
    eta, M, n, trials = 0.1, 30.0, 400, 40
    shifts = []
    for i in range(trials):
        rng = RngHandle(5, i)
        truth, data = generate_sparse_gaussian(rng, d=5, k=2, coord_range=5.0,
                                               sigma2=1.0, n=n)
        u = truth.mu / np.linalg.norm(truth.mu)
        spec = ContaminationSpec(eta=eta, strategy="shift_cluster", magnitude=M)
        out = contaminate(derive_stream(rng, "adv"), data, truth, spec)
        shifts.append((out.samples.mean(axis=0) - data.samples.mean(axis=0)) @ u)
    # mean of replaced rows is mu + M*u; removed rows average to mu + O(sd)
    expected = eta * M
    assert abs(np.mean(shifts) - expected) <= 3 * np.std(shifts) / np.sqrt(trials) + 0.05


def test_contaminate_sign_flip_targets_largest_projections():
    rng, truth, data = _small_instance(n=50)
    spec = ContaminationSpec(eta=0.2, strategy="sign_flip_support", magnitude=1.0)
    out = contaminate(derive_stream(rng, "adv"), data, truth, spec)
    changed = np.flatnonzero(np.any(out.samples != data.samples, axis=1))
    proj = data.samples @ truth.mu
    assert set(changed) == set(np.argsort(proj)[-10:])


def test_contamination_spec_validation():
    with pytest.raises(ValueError):
        ContaminationSpec(eta=1.0, strategy="shift_cluster")
    with pytest.raises(ValueError):
        ContaminationSpec(eta=0.1, strategy="bogus")


# --- bucketing ---------------------------------------------------------------

def test_bucket_means_b1_is_identity():
    _, _, data = _small_instance()
    bd = bucket_means(data, 1)
    assert np.array_equal(bd.means, data.samples)


def test_bucket_means_bn_is_empirical_mean():
    _, _, data = _small_instance()
    bd = bucket_means(data, data.n)
    assert bd.means.shape == (1, data.d)
    assert np.allclose(bd.means[0], data.samples.mean(axis=0))


def test_bucket_means_discards_remainder():
    data = Dataset(np.arange(14, dtype=float).reshape(7, 2))
    bd = bucket_means(data, 3)
    assert bd.n_buckets == 2  # 7 // 3; sample 7 discarded


def test_bucket_means_variance_reduction():
    # N(0,1) coords, b=25, n=2500: bucket-mean variance targets 1/25 = 0.04
    gen = RngHandle(6).generator
    data = Dataset(gen.standard_normal((2500, 4)))
    bd = bucket_means(data, 25)
    v = bd.means.var(axis=0, ddof=1).mean()
    assert 0.033 <= v <= 0.047


def test_bucket_means_rejects_bad_b():
    _, _, data = _small_instance()
    with pytest.raises(ValueError):
        bucket_means(data, data.n + 1)
    with pytest.raises(ValueError):
        bucket_means(data, 0)


@given(st.floats(-100, 100))
@settings(max_examples=50, deadline=None)
def test_bucket_means_translation_equivariance(c):
    gen = RngHandle(7).generator
    x = gen.standard_normal((20, 3))
    a = bucket_means(Dataset(x + c), 4).means
    b = bucket_means(Dataset(x), 4).means + c
    assert np.allclose(a, b, atol=1e-9)


# --- sparsify ----------------------------------------------------------------

def test_sparsify_keeps_already_sparse():
    x = np.array([0.0, 2.0, 0.0, -1.0, 0.0])
    out = sparsify(x, 2, RngHandle(8))
    assert np.array_equal(out, x)


def test_sparsify_magnitude_order():
    out = sparsify(np.array([3.0, -2.0, 1.0]), 1, RngHandle(9))
    assert np.array_equal(out, np.array([3.0, 0.0, 0.0]))


def test_sparsify_tie_breaking_is_uniformish():
    x = np.ones(4)
    rng = RngHandle(10)
    counts = np.zeros(4)
    for _ in range(2000):
        counts += sparsify(x, 1, rng) != 0
    assert np.all(counts / 2000 > 0.15) and np.all(counts / 2000 < 0.35)


def test_sparsify_idempotent():
    gen = RngHandle(11).generator
    x = gen.standard_normal(30)
    once = sparsify(x, 7, RngHandle(12))
    twice = sparsify(once, 7, RngHandle(13))
    assert np.array_equal(once, twice)


@given(st.integers(1, 10), st.integers(0, 10_000))
@settings(max_examples=400, deadline=None)
def test_sparsify_factor_four_bound(k, seed):
    # projecting onto the top-k magnitudes at most quadruples the distance
    # to any k-sparse target
    gen = RngHandle(14, seed).generator
    x = gen.standard_normal(20) * gen.uniform(0.1, 10)
    y = np.zeros(20)
    support = gen.choice(20, size=k, replace=False)
    y[support] = gen.standard_normal(k) * gen.uniform(0.1, 10)
    out = sparsify(x, k, RngHandle(15, seed))
    assert np.linalg.norm(out - y) <= 4.0 * np.linalg.norm(x - y) + 1e-12


# --- support mass ------------------------------------------------------------

def test_support_mass_superset_is_one():
    truth = GroundTruth(mu=np.array([1.0, 2.0, 0.0]), k=2, sigma2=1.0,
                        support=np.array([0, 1]))
    assert support_mass_fraction([0, 1, 2], truth) == 1.0


def test_support_mass_disjoint_is_zero():
    truth = GroundTruth(mu=np.array([1.0, 2.0, 0.0, 0.0]), k=2, sigma2=1.0,
                        support=np.array([0, 1]))
    assert support_mass_fraction([2, 3], truth) == 0.0


def test_support_mass_partial():
    # mu = (3, 4, 0, 0); selecting the 4-coordinate captures 16/25
    truth = GroundTruth(mu=np.array([3.0, 4.0, 0.0, 0.0]), k=2, sigma2=1.0,
                        support=np.array([0, 1]))
    assert support_mass_fraction([1], truth) == pytest.approx(0.64)


def test_support_mass_zero_mean_convention():
    truth = GroundTruth(mu=np.zeros(4), k=0, sigma2=1.0, support=np.array([], dtype=int))
    assert support_mass_fraction([2], truth) == 1.0


# --- CSV round trip ----------------------------------------------------------

def test_dataset_csv_round_trip(tmp_path):
    gen = RngHandle(16).generator
    data = Dataset(gen.standard_normal((17, 5)) * 1e6)
    path = tmp_path / "data.csv"
    data.save_csv(path)
    back = Dataset.load_csv(path)
    assert np.array_equal(back.samples, data.samples)
    first = path.read_text().splitlines()[0]
    assert len(first.split(",")) == 5
