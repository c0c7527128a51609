"""Python bindings for the speclab C++ core."""

from ._core import (
    ConfigError,
    Kernel,
    Kpca,
    LaplacianEmbedding,
    NumericalError,
    PopulationOracle,
    constant_kernel,
    gaussian_kernel,
    kpca,
    laplacian_embedding,
    linear_kernel,
    newton_solve,
    nk_demo,
    population_oracle,
    procrustes,
    rate_study,
    sample_uniform,
    second_moment_spectrum,
    sep,
    uniform_error,
)

__all__ = [
    "ConfigError",
    "Kernel",
    "Kpca",
    "LaplacianEmbedding",
    "NumericalError",
    "PopulationOracle",
    "constant_kernel",
    "gaussian_kernel",
    "kpca",
    "laplacian_embedding",
    "linear_kernel",
    "newton_solve",
    "nk_demo",
    "population_oracle",
    "procrustes",
    "rate_study",
    "sample_uniform",
    "second_moment_spectrum",
    "sep",
    "uniform_error",
]
