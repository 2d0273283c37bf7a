"""Dependency spectra of Boolean functions, agreement bounds, and
random-codebook experiments over memoryless sources."""

from .model import (
    AlphabetError,
    BooleanFunction,
    DomainError,
    Marginal,
    PairSource,
    SizeLimitError,
    SubsetMask,
    enumerate_submasks,
    product_prob,
    product_weights,
)
from .decomposition import (
    BiasedBasis,
    ComponentTable,
    DependencySpectrum,
    RealTransform,
    all_components,
    biased_basis,
    component,
    k_letter_profile,
    real_transform,
    spectrum,
    spectrum_fast_binary,
)
from .correlation import (
    AgreementStats,
    CorrelationBoundReport,
    MaximalCorrelation,
    bound_coefficients,
    disagreement_bounds,
    exact_agreement,
    maximal_correlation,
)
from .ensemble import (
    Codebook,
    ConcentrationResult,
    DiscontinuityReport,
    EncoderRealization,
    EnsembleConfig,
    MarginalCheckResult,
    bsc_channel,
    concentration_experiment,
    discontinuity_experiment,
    encoder_bit_spectrum,
    sample_codebook,
    sample_encoder,
    single_letter_marginal_check,
    typical_set_size,
    typical_weights,
)
from .netbounds import (
    binary_entropy,
    entropy_bits,
    ic_hz_bound,
    mac_hx_bound,
    mac_single_user_rate,
    noise_entropy_bits,
    suboptimality_gap,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementStats",
    "AlphabetError",
    "BiasedBasis",
    "BooleanFunction",
    "Codebook",
    "ComponentTable",
    "ConcentrationResult",
    "CorrelationBoundReport",
    "DependencySpectrum",
    "DiscontinuityReport",
    "DomainError",
    "EncoderRealization",
    "EnsembleConfig",
    "Marginal",
    "MarginalCheckResult",
    "MaximalCorrelation",
    "PairSource",
    "RealTransform",
    "SizeLimitError",
    "SubsetMask",
    "all_components",
    "biased_basis",
    "binary_entropy",
    "bound_coefficients",
    "bsc_channel",
    "component",
    "concentration_experiment",
    "disagreement_bounds",
    "discontinuity_experiment",
    "encoder_bit_spectrum",
    "entropy_bits",
    "enumerate_submasks",
    "exact_agreement",
    "ic_hz_bound",
    "k_letter_profile",
    "mac_hx_bound",
    "mac_single_user_rate",
    "maximal_correlation",
    "noise_entropy_bits",
    "product_prob",
    "product_weights",
    "real_transform",
    "sample_codebook",
    "sample_encoder",
    "single_letter_marginal_check",
    "spectrum",
    "spectrum_fast_binary",
    "suboptimality_gap",
    "typical_set_size",
    "typical_weights",
]
