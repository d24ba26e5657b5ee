"""Exact and Monte Carlo tools for anti-concentration of random-permutation sums."""

__version__ = "0.1.0"

from .numerics import (  # noqa: E402
    CapExceededError,
    DiscreteDistribution,
    GridEmbedding,
    Interval,
    PreconditionError,
    RationalVector,
    concentration_function,
    embed,
    prob_mass,
)
from .engines import (  # noqa: E402
    max_point_mass,
    perm_sum_distribution,
    point_mass,
    rademacher_sum_distribution,
    subset_sum_with_replacement,
    subset_sum_without_replacement,
)

__all__ = [
    "CapExceededError", "DiscreteDistribution", "GridEmbedding", "Interval",
    "PreconditionError", "RationalVector", "concentration_function", "embed",
    "prob_mass", "max_point_mass", "perm_sum_distribution", "point_mass",
    "rademacher_sum_distribution", "subset_sum_with_replacement",
    "subset_sum_without_replacement",
]
