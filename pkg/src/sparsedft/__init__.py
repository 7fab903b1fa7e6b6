"""Reconstruction of DFT-sparse and nonsparse signals from a random subset of samples."""

from .analysis import (
    TheoremPrediction,
    coherence,
    missing_noise_model,
    missing_noise_variance,
    nonsparse_error_theory,
    rip_constant_brute_force,
    snr_between,
    snr_output_theory,
    spark_brute_force,
    spark_sparsity_bound,
    welch_ratio,
)
from .recovery import (
    RecoveryResult,
    SupportSelection,
    recover_exhaustive,
    recover_iterative,
    recover_known_support,
    recover_one_step,
    residual_ratio,
)
from .signals import (
    ComponentSpec,
    NoiseSpec,
    SamplingMask,
    add_noise,
    apply_mask,
    random_mask,
    synthesize_sparse_signal,
)
from .transform import full_dft, initial_estimate, inverse_dft, partial_matrix

__version__ = "0.1.0"
