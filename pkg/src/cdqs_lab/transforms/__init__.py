from .closure import and_compose, negate, or_compose, qss_2of2, qss_2of3, with_alice_noise
from .qec import (
    AmplifyParams,
    AmplifyResult,
    CodeSpec,
    amplify,
    code_catalog,
    code_rate,
    error_exponent,
    noise_bound,
)

__all__ = [
    "and_compose",
    "negate",
    "or_compose",
    "qss_2of2",
    "qss_2of3",
    "with_alice_noise",
    "AmplifyParams",
    "AmplifyResult",
    "CodeSpec",
    "amplify",
    "code_catalog",
    "code_rate",
    "error_exponent",
    "noise_bound",
]
