"""Experiment harnesses: memorization, language understanding, bias."""

from .bias import BiasConfig, BiasEstimate, run_bias
from .lambada import (
    LambadaExample,
    UnderstandingConfig,
    UnderstandingReport,
    default_stop_words,
    extract_words,
    load_dataset,
    run_language_understanding,
)
from .memorization import (
    CONSTRAINED_ARM,
    DEFAULT_URL_REGEX,
    ArmSummary,
    LiveValidator,
    MemorizationConfig,
    MockValidator,
    ThroughputReport,
    UrlRecord,
    ValidationConfig,
    ValidationOutcome,
    baseline_arm_name,
    conformance_fraction,
    duplicate_fraction,
    run_memorization,
    throughput_report,
    validate_urls,
)

__all__ = [
    "ArmSummary",
    "BiasConfig",
    "BiasEstimate",
    "CONSTRAINED_ARM",
    "DEFAULT_URL_REGEX",
    "LambadaExample",
    "LiveValidator",
    "MemorizationConfig",
    "MockValidator",
    "ThroughputReport",
    "UnderstandingConfig",
    "UnderstandingReport",
    "UrlRecord",
    "ValidationConfig",
    "ValidationOutcome",
    "baseline_arm_name",
    "conformance_fraction",
    "default_stop_words",
    "duplicate_fraction",
    "extract_words",
    "load_dataset",
    "run_bias",
    "run_language_understanding",
    "run_memorization",
    "throughput_report",
    "validate_urls",
]
