"""Explicit error bounds for random sums of equally-correlated summands.

``Y = X_1 + ... + X_N`` where, with probability ``rho``, every summand equals
``X_1`` and otherwise the summands are IID, all independent of the count
``N``.  The package evaluates normal, gamma and Poisson approximation bounds
for ``Y`` together with the distances they control.
"""

from ._kernels import BACKEND
from .bounds import (
    BOUND_KINDS,
    BoundError,
    BoundReport,
    beta,
    bound_gamma_stoploss,
    bound_normal_count_coupling_alt,
    bound_normal_poisson,
    bound_normal_zero_mean,
    bound_poisson_tv,
    bound_poisson_wasserstein,
    compute_bound,
    gamma_params,
    sigma,
    stein_factor_cr,
    tau,
)
from .laws import (
    Bernoulli,
    Binomial,
    ClaimLaw,
    CountLaw,
    ExactPmf,
    FiniteCount,
    FiniteIntPmf,
    FiniteLatticePmf,
    GammaMixedPoisson,
    Hypergeometric,
    LawError,
    Poisson,
    point_claim,
    rademacher,
)
from .metrics import (
    DistanceEstimate,
    GammaTarget,
    NormalTarget,
    stoploss_distance,
    tv_pmf,
    wasserstein_empirical_vs_normal,
    wasserstein_pmf_vs_normal,
    wasserstein_pmf_vs_pmf,
)
from .model import RandomSumModel, exact_pmf, mean_var, sample_sum

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BOUND_KINDS",
    "Bernoulli",
    "Binomial",
    "BoundError",
    "BoundReport",
    "ClaimLaw",
    "CountLaw",
    "DistanceEstimate",
    "ExactPmf",
    "FiniteCount",
    "FiniteIntPmf",
    "FiniteLatticePmf",
    "GammaMixedPoisson",
    "GammaTarget",
    "Hypergeometric",
    "LawError",
    "NormalTarget",
    "Poisson",
    "RandomSumModel",
    "beta",
    "bound_gamma_stoploss",
    "bound_normal_count_coupling_alt",
    "bound_normal_poisson",
    "bound_normal_zero_mean",
    "bound_poisson_tv",
    "bound_poisson_wasserstein",
    "compute_bound",
    "exact_pmf",
    "gamma_params",
    "mean_var",
    "point_claim",
    "rademacher",
    "sample_sum",
    "sigma",
    "stein_factor_cr",
    "stoploss_distance",
    "tau",
    "tv_pmf",
    "wasserstein_empirical_vs_normal",
    "wasserstein_pmf_vs_normal",
    "wasserstein_pmf_vs_pmf",
]
