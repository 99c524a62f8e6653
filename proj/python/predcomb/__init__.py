"""Joint denoising of predictors (NPC, LPC and OPC) with a C++ core."""

from ._predcomb import (
    Error,
    InvalidArgument,
    IoError,
    NumericalError,
    bench,
    center_normalize,
    classification_accuracy,
    denoise,
    gen_attribute_benchmark,
    gen_toy,
    inverse_normalize,
    kendall_x100,
    linear_predictability,
    nonlinear_predictability,
    relevance_weights,
)

__all__ = [
    "Error",
    "InvalidArgument",
    "IoError",
    "NumericalError",
    "bench",
    "center_normalize",
    "classification_accuracy",
    "denoise",
    "gen_attribute_benchmark",
    "gen_toy",
    "inverse_normalize",
    "kendall_x100",
    "linear_predictability",
    "nonlinear_predictability",
    "relevance_weights",
]
