#!/usr/bin/env python3
"""The exponential-time estimator at desk scale, with heavy tails and
contamination.

Enumerates all k-subsets of coordinates, scores each by the best directional
exceedance count over the bucketed means, picks a support with the
exponential mechanism, then refines the dense estimate on those coordinates
with coarse and fine lattice nets.  Works for any distribution with bounded
covariance - demonstrated here on Student-t data - and degrades gracefully
under a 5% adversarial contamination.
"""

import math

import numpy as np

from dpse import (
    ContaminationSpec,
    Dataset,
    GroundTruth,
    RngHandle,
    SubsetSelectionParams,
    contaminate,
    derive_stream,
    subset_selection_estimate,
    support_mass_fraction,
)

D, K, N, B = 10, 2, 5000, 25
MU = np.zeros(D)
MU[[3, 7]] = [3.3, math.sqrt(25 - 3.3**2)]  # norm exactly 5
TRUTH = GroundTruth(mu=MU, k=K, sigma2=1.0, support=np.array([3, 7]))
PARAMS = SubsetSelectionParams(k=K, epsilon=1.0, sigma2=1.0, alpha=0.5,
                               range_bound=10.0, bucket_size=B, L=4.0)


def run(label, make_data):
    errs, masses = [], []
    for trial in range(20):
        root = RngHandle(100 + trial)
        data = make_data(root)
        est, support, spent = subset_selection_estimate(
            derive_stream(root, "alg"), data, PARAMS
        )
        errs.append(np.linalg.norm(est - MU))
        masses.append(support_mass_fraction(support, TRUTH))
    print(f"  {label:<28} median l2 err = {np.median(errs):.3f}   "
          f"median support mass = {np.median(masses):.3f}")


def gaussian(root):
    g = derive_stream(root, "data").generator
    return Dataset(MU + g.standard_normal((N, D)))


def heavy_tailed(root):
    g = derive_stream(root, "data").generator
    return Dataset(MU + g.standard_t(3, size=(N, D)) / math.sqrt(3.0))


def contaminated(root):
    data = gaussian(root)
    spec = ContaminationSpec(eta=0.05, strategy="shift_cluster", magnitude=5.0)
    return contaminate(derive_stream(root, "adv"), data, TRUTH, spec)


print(f"=== subset selection: d={D}, k={K}, n={N}, eps=1, ||mu||=5 ===")
run("clean Gaussian", gaussian)
run("Student-t (3 dof, unit var)", heavy_tailed)
run("5% shift contamination", contaminated)
print("\nerror stays near alpha + O(sqrt(eta)) - the bounded-covariance")
print("contract, not Gaussianity, is what the estimator uses.")
