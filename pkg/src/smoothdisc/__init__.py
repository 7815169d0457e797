"""Discrepancy of Komlós matrices under random Rademacher perturbation.

Exact combinatorics for parity-conditioned sign vectors, a Gram-Schmidt walk
sampler, relevance tests, the parity-padding reduction and Monte Carlo
experiments around them.
"""
from ._accel import HAS_NUMBA, backend
from .core import (
    DiscrepancyReport,
    KomlosMatrix,
    RademacherMatrix,
    SignVector,
    brute_force_disc,
    disc_value,
    perturb,
    read_matrix,
    validate_komlos,
    write_matrix,
)
from .errors import *  # noqa: F401,F403
from .exact import (
    ExactProbability,
    SpencerEstimate,
    count_S_t,
    enumerate_even_oracle,
    prob_joint_even,
    prob_single_even,
    spencer_estimate,
    support_even_inner,
)
from .experiments import (
    ExperimentConfig,
    SecondMomentReport,
    TrialRecord,
    generate_matrix,
    run_trial,
    second_moment_diag,
    sweep,
    sweep_csv,
    verify_core,
)
from .perturbation import (
    pad_matrix,
    pad_vector,
    resample_first_column,
    sample_even_rademacher,
    sample_rademacher,
    target_sets,
    unpad,
)
from .relevance import RelevanceConfig, RelevantSet, find_relevant_set
from .walk import TruncationConfig, gs_walk_sample, gs_walk_samples, sample_truncated, subgaussian_tail_report

__version__ = "0.1.0"
