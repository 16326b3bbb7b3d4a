"""Differentially private, adversarially robust sparse mean estimation.

A numpy library offering: seeded DP noise primitives, the Laplace and
exponential mechanisms with budget accounting, an automatic-robustness bound
calculator and empirical checker, three sparse mean estimators (a linear-time
threshold method, an exponential-time subset-selection method, and a
range-sensitive peeling baseline), plus an experiment harness with a frozen
CSV schema.
"""

from .baselines import PeelingParams, cwz_peeling_estimate, nonprivate_baseline
from .data import (
    BucketedDataset,
    ContaminationSpec,
    Dataset,
    GroundTruth,
    bucket_means,
    contaminate,
    generate_sparse_gaussian,
    sparsify,
    support_mass_fraction,
)
from .errors import EstimationError, ScaleError
from .harness import (
    ExperimentConfig,
    RobustnessCheckConfig,
    TrialRecord,
    bootstrap_ci,
    emit_csv,
    preset_config,
    print_bounds,
    read_csv,
    run_experiment,
    run_robustness_check,
)
from .kv1d import Kv1dParams, kv1d_estimate
from .mechanisms import (
    PrivacyBudget,
    RobustnessBound,
    ScoredCandidates,
    compose,
    exponential_mechanism,
    laplace_mechanism,
    meta_theorem_eta,
    meta_theorem_failure_bound,
    softmax_probabilities,
    zcdp_to_approx,
)
from .rng import LaplaceParams, RngHandle, derive_stream, sample_gaussian_vector, sample_laplace
from .subset_selection import (
    DenseNetParams,
    SubsetScoreParams,
    SubsetSelectionParams,
    coarse_dense,
    fine_dense,
    select_subset,
    subset_score,
    subset_selection_estimate,
)
from .threshold import (
    CoordinateScores,
    ThresholdParams,
    coordinate_scores,
    select_support,
    threshold_estimate,
)

__version__ = "0.1.0"
