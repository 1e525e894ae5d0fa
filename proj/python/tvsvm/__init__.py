"""Total variation SVMs: learned virtual support vectors and deep multiple kernels."""

from ._tvsvm import (
    DataError,
    DimensionMismatch,
    DomainError,
    InvalidArgument,
    KernelSpec,
    Model,
    NonDifferentiable,
    NumericalError,
    TrainConfig,
    TvsvmError,
    berg_transform,
    cpd_check,
    gradcheck,
    gram_matrix,
    kernel_families,
    kernel_forward,
    make_two_moons,
    make_xor_gaussians,
    neural_forward,
    simplex_weights,
    temporal_chunking,
    train,
    video_descriptor,
)

__all__ = [name for name in dir() if not name.startswith("_")]
