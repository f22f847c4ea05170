"""Moment-level checks of the zero-bias and non-zero-bias representations of ``Y``.

A zero-type bias of a lattice law has a density, so the representations are
compared through moments.  The left side comes from the defining identity
applied to the exact law of ``Y``.  The right side is the mixture: the biased
comonotone part ``(N X_1)^b`` with weight ``tau`` (or ``sigma``), and
otherwise a biased single claim plus an independent compound sum, combined
with the binomial theorem.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .bounds import sigma, tau
from .laws import LawError, Poisson
from .model import RandomSumModel, comonotone_pmf, compound_pmf, exact_pmf
from .transforms import biased_moment, shifted_size_bias_pmf

IDENTITY_TAIL_EPS = 1e-30


@dataclass(frozen=True)
class MomentCheck:
    order: int
    direct: float
    mixture: float

    @property
    def scale(self) -> float:
        return max(abs(self.direct), abs(self.mixture))

    def relative_error(self, floor: float = 0.0) -> float:
        """``|direct - mixture| / max(|direct|, |mixture|, floor)``."""
        denom = max(self.scale, floor)
        return 0.0 if denom == 0 else abs(self.direct - self.mixture) / denom


def _sum_moment(a_moments, b_pmf, k):
    # E[(A + B)^k] for independent A, B; a_moments[j] = E[A^j]
    return sum(comb(k, j) * a_moments[j] * b_pmf.moment(k - j) for j in range(k + 1))


def zero_bias_moments(model: RandomSumModel, orders=(1, 2, 3, 4), tail_eps: float = IDENTITY_TAIL_EPS):
    """Moments of ``Y^z`` two ways, for centred claims and any count."""
    if abs(model.claim.moments().mean) > 1e-12:
        raise LawError("the zero-bias representation needs centred claims")
    counts = model.count.exact_pmf(tail_eps)
    y = exact_pmf(model, tail_eps)
    t = tau(model)
    comon = comonotone_pmf(model.claim, counts)
    rest = compound_pmf(model.claim, shifted_size_bias_pmf(model.count, tail_eps))
    out = []
    for k in orders:
        direct = biased_moment(y, "zero", k)
        single = [1.0] + [biased_moment(model.claim, "zero", j) for j in range(1, k + 1)]
        comon_k = biased_moment(comon, "zero", k) if t > 0 else 0.0
        mixture = t * comon_k + (1 - t) * _sum_moment(single, rest, k)
        out.append(MomentCheck(k, direct, mixture))
    return out


def non_zero_bias_moments(model: RandomSumModel, orders=(1, 2, 3, 4), tail_eps: float = IDENTITY_TAIL_EPS):
    """Moments of ``Y^nz`` two ways, for a Poisson count."""
    if not isinstance(model.count, Poisson):
        raise LawError("the non-zero-bias representation needs a Poisson count")
    lam = model.count.lam
    counts = model.count.exact_pmf(tail_eps)
    y = exact_pmf(model, tail_eps)
    s = sigma(lam, model.claim, model.rho)
    comon = comonotone_pmf(model.claim, counts)
    rest = compound_pmf(model.claim, counts)
    out = []
    for k in orders:
        direct = biased_moment(y, "non_zero", k)
        single = [1.0] + [biased_moment(model.claim, "generalized_zero", j) for j in range(1, k + 1)]
        comon_k = biased_moment(comon, "non_zero", k) if s > 0 else 0.0
        mixture = s * comon_k + (1 - s) * _sum_moment(single, rest, k)
        out.append(MomentCheck(k, direct, mixture))
    return out


def max_relative_error(checks, var_y: float) -> float:
    """Worst relative error; order-``k`` moments are floored at ``Var(Y)^(k/2)``."""
    return max(c.relative_error(var_y ** (c.order / 2)) for c in checks) if checks else 0.0


__all__ = ["MomentCheck", "zero_bias_moments", "non_zero_bias_moments", "max_relative_error", "IDENTITY_TAIL_EPS"]
