"""Explicit approximation error bounds for equally-correlated random sums.

Each ``bound_*`` function returns a :class:`BoundReport` holding the value and
every constant that went into it.  The value is always computed by feeding the
constants through the formula registered for the bound kind, so
``report.reevaluate()`` reproduces it exactly from the stored constants.

Targets and distances:

* ``normal_zero_mean`` / ``normal_zero_mean_indep`` / ``normal_poisson`` /
  ``normal_count_coupling_alt``: Wasserstein distance between standardized
  ``Y`` and ``N(0, 1)``.
* ``gamma_stoploss``: stop-loss distance between ``Y`` and the gamma law
  matching its first two moments.
* ``poisson_wasserstein`` / ``poisson_tv``: Wasserstein and total-variation
  distance between ``Y`` and ``Poisson(E[Y])``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .laws import DEFAULT_TAIL_EPS, ClaimLaw, LawError, Poisson
from .model import RandomSumModel, coupled_gap_exact, coupled_gap_mc, mean_var
from .rng import as_generator
from .transforms import (
    abs_mean_gz,
    abs_mean_nz_product,
    abs_mean_zero_bias,
    coupling_delta_claim,
    coupling_delta_count,
    quantile_coupling_expectation,
)

BOUND_KINDS = (
    "normal_zero_mean",
    "normal_zero_mean_indep",
    "normal_poisson",
    "gamma_stoploss",
    "poisson_wasserstein",
    "poisson_tv",
    "normal_count_coupling_alt",
)

_CENTRED_TOL = 1e-12


class BoundError(ValueError):
    """A bound was requested outside the conditions it is proved under."""


@dataclass(frozen=True)
class BoundReport:
    bound_kind: str
    value: float
    constants: dict
    mc_terms: list = field(default_factory=list)
    notes: str = ""

    def reevaluate(self, conservative: bool = False) -> float:
        """Recompute the value from ``constants``.

        With ``conservative=True`` every Monte Carlo ingredient is replaced by
        its estimate plus three standard errors (all bounds increase in them).
        """
        c = dict(self.constants)
        if conservative:
            for name, est, se in self.mc_terms:
                c[name] = est + 3.0 * se
        return FORMULAS[self.bound_kind](c)

    @property
    def conservative_value(self) -> float:
        return self.reevaluate(conservative=True) if self.mc_terms else self.value

    @property
    def mc_standard_error(self) -> float:
        return float(sum(se for _, _, se in self.mc_terms))

    def to_dict(self) -> dict:
        return {
            "bound_kind": self.bound_kind,
            "value": self.value,
            "conservative_value": self.conservative_value,
            "constants": dict(sorted(self.constants.items())),
            "mc_terms": [{"name": n, "estimate": e, "standard_error": s} for n, e, s in self.mc_terms],
            "notes": self.notes,
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# formulas on constants
# --------------------------------------------------------------------------


def _normal_zero_mean(c):
    sd = math.sqrt(c["var_y"])
    comon = 2 * c["tau"] * (1 + c["EN3"] * c["m3abs"] / (2 * c["EN2"] * c["var_x"] * sd))
    indep = 2 * (1 - c["tau"]) / sd * (c["zero_bias_abs_mean"] + c["gap"])
    return comon + indep


def _normal_zero_mean_indep(c):
    return 2 / math.sqrt(c["EN"] * c["var_x"]) * (c["zero_bias_abs_mean"] + c["delta_count"] * c["m1abs"])


def _normal_poisson(c):
    s = c["sigma"]
    inner = 2 * s * c["alpha"] + (1 - s) * c["m3abs"] / c["m2"] + 2 * c["lambda"] * (1 - s) * c["abs_diff_copies"]
    return inner / math.sqrt(c["var_y"])


def _gamma_stoploss(c):
    lam, rho, s, mu, m2 = c["lambda"], c["rho"], c["sigma"], c["mean_x"], c["m2"]
    braces = lam * rho * m2 / mu + s * (m2 / mu + c["beta"]) + (s - rho) * lam * mu + (1 - s) * c["delta_claim"]
    return 2 * math.sqrt(lam * c["c_r"] * mu * braces)


def _poisson_bracket(c):
    ratio = c["m2"] / c["mean_x"] - 1
    comon = c["delta_count"] + c["EN"] * c["m1absdev1"] + c["EN2"] / c["EN"] * ratio
    indep = ratio + c["gap"]
    return c["rho"] * comon + (1 - c["rho"]) * indep


def _poisson_wasserstein(c):
    return 3 * math.sqrt(c["EN"] * c["mean_x"]) * _poisson_bracket(c)


def _poisson_tv(c):
    return _poisson_bracket(c)


def _normal_count_coupling_alt(c):
    return (c["m3abs"] / c["var_x"] + c["dw_count_poisson"] * c["m1abs"]) / math.sqrt(c["var_x"] * c["EN"])


FORMULAS: dict[str, Callable[[dict], float]] = {
    "normal_zero_mean": _normal_zero_mean,
    "normal_zero_mean_indep": _normal_zero_mean_indep,
    "normal_poisson": _normal_poisson,
    "gamma_stoploss": _gamma_stoploss,
    "poisson_wasserstein": _poisson_wasserstein,
    "poisson_tv": _poisson_tv,
    "normal_count_coupling_alt": _normal_count_coupling_alt,
}


def _report(kind, constants, mc_terms=(), notes=""):
    constants = {k: float(v) for k, v in constants.items()}
    return BoundReport(kind, float(FORMULAS[kind](constants)), constants, list(mc_terms), notes)


# --------------------------------------------------------------------------
# mixing weights and gamma constants
# --------------------------------------------------------------------------


def tau(model: RandomSumModel) -> float:
    """Weight of the comonotone part in the zero-bias representation of ``Y``."""
    n1, n2, _ = model.count.raw_moments()
    denom = n1 + model.rho * (n2 - n1)
    if not denom > 0:
        raise BoundError("tau needs E[N] + rho E[N(N-1)] > 0")
    return model.rho * n2 / denom


def sigma(lam: float, claim: ClaimLaw, rho: float) -> float:
    """Weight of the comonotone part in the non-zero-bias representation (Poisson count)."""
    mo = claim.moments()
    denom = mo.m2 + lam * rho * mo.variance
    if not denom > 0:
        raise BoundError("sigma needs E[X^2] + lambda rho Var(X) > 0")
    s = rho * (mo.m2 + lam * mo.variance) / denom
    assert s >= rho - 1e-12 * max(1.0, rho), "sigma fell below rho"
    return s


def gamma_params(lam: float, claim: ClaimLaw, rho: float) -> tuple[float, float]:
    """Shape and rate of the gamma law matching the mean and variance of ``Y``."""
    mo = claim.moments()
    if not claim.non_negative or not mo.mean > 0:
        raise BoundError("gamma approximation needs non-negative claims with positive mean")
    denom = mo.m2 + lam * rho * mo.variance
    return lam * mo.mean**2 / denom, mo.mean / denom


def stein_factor_cr(r: float) -> float:
    if not r > 0:
        raise BoundError("c_r needs r > 0")
    return (math.sqrt(2 * math.pi) + math.exp(-1)) / math.sqrt(r + 2) + 2 / (r + 2)


def beta(lam: float, claim: ClaimLaw) -> float:
    """``E|(N X)^nz|`` for non-negative claims and ``N ~ Poisson(lam)``."""
    mo = claim.moments()
    denom = 2 * (mo.m2 + lam * mo.variance)
    if not denom > 0:
        raise BoundError("beta needs E[X^2] + lambda Var(X) > 0")
    return ((lam**2 + 3 * lam + 1) * mo.m3 - lam * (lam + 1) * mo.mean * mo.m2) / denom


def abs_diff_copies(claim: ClaimLaw) -> float:
    """``E|X' - X|`` for independent copies."""
    x, p = claim.atoms, claim.probs
    return float(p @ np.abs(x[:, None] - x[None, :]) @ p)


# --------------------------------------------------------------------------
# bounds
# --------------------------------------------------------------------------


def _require_centred(claim: ClaimLaw):
    mo = claim.moments()
    if abs(mo.mean) > _CENTRED_TOL * max(1.0, float(np.max(np.abs(claim.atoms)))):
        raise BoundError(f"this bound needs centred claims, E[X] = {mo.mean:g}")
    if not mo.variance > 0:
        raise BoundError("this bound needs Var(X) > 0")


def _require_poisson(model: RandomSumModel) -> float:
    if not isinstance(model.count, Poisson):
        raise BoundError("this bound needs a Poisson count")
    return model.count.lam


def _gap(model, d_method, mc_budget, rng, tail_eps):
    if d_method == "exact":
        g = coupled_gap_exact(model, tail_eps)
        return g.value, [], {"gap_truncation_mass": g.truncation_mass}
    if d_method == "mc":
        g = coupled_gap_mc(model, as_generator(rng), mc_budget, tail_eps)
        return g.value, [("gap", g.value, g.standard_error)], {"gap_truncation_mass": g.truncation_mass}
    raise BoundError(f"unknown d_method {d_method!r}; expected 'exact' or 'mc'")


def bound_normal_zero_mean(
    model: RandomSumModel,
    mc_budget: int = 10**6,
    rng=None,
    d_method: str = "exact",
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> BoundReport:
    """Wasserstein bound for standardized ``Y`` against ``N(0, 1)``, centred claims.

    At ``rho = 0`` this is the independent-claims corollary, reported as
    ``normal_zero_mean_indep``; the coupled gap then has the closed form
    ``E|N + 1 - N^s| E|X|``.  For ``rho > 0`` the gap
    ``E|sum_{j < N^s} X'_j - Y|`` is evaluated exactly (``d_method="exact"``)
    or by Monte Carlo with ``mc_budget`` coupled draws (``d_method="mc"``).
    """
    _require_centred(model.claim)
    mo = model.claim.moments()
    n1, n2, n3 = model.count.raw_moments()
    _, var_y = mean_var(model)
    if not var_y > 0:
        raise BoundError("Var(Y) must be positive")
    base = {
        "EN": n1,
        "EN2": n2,
        "EN3": n3,
        "var_x": mo.variance,
        "m3abs": mo.m3abs,
        "m1abs": mo.m1abs,
        "var_y": var_y,
        "zero_bias_abs_mean": abs_mean_zero_bias(model.claim),
        "rho": model.rho,
    }
    if model.rho == 0:
        base["delta_count"] = coupling_delta_count(model.count, tail_eps)
        return _report("normal_zero_mean_indep", base)
    gap, mc_terms, extra = _gap(model, d_method, mc_budget, rng, tail_eps)
    base.update(extra, tau=tau(model), gap=gap)
    return _report("normal_zero_mean", base, mc_terms)


def bound_normal_poisson(lam: float, claim: ClaimLaw, rho: float) -> BoundReport:
    """Wasserstein bound for standardized ``Y`` against ``N(0, 1)``, Poisson count.

    At ``rho = 0`` the primed claims coincide with the claims of ``Y`` and the
    bound reduces to ``E|X|^3 / (sqrt(lam) E[X^2]^{3/2})``.
    """
    mo = claim.moments()
    var_y = lam * mo.m2 + lam**2 * rho * mo.variance
    if not var_y > 0:
        raise BoundError("Var(Y) must be positive")
    ey2 = lam * (1 + lam * rho) * mo.m2 + lam**2 * (1 - rho) * mo.mean**2
    c = {
        "lambda": lam,
        "rho": rho,
        "m2": mo.m2,
        "m3abs": mo.m3abs,
        "var_y": var_y,
        "sigma": sigma(lam, claim, rho),
        "gz_abs_mean": abs_mean_gz(claim),
        "abs_diff_copies": 0.0 if rho == 0 else abs_diff_copies(claim),
    }
    if rho > 0:
        c["nz_abs_mean"] = abs_mean_nz_product(lam, claim)
        c["alpha"] = math.sqrt(ey2) + c["nz_abs_mean"]
    else:
        c["alpha"] = 0.0
    return _report("normal_poisson", c)


def bound_gamma_stoploss(lam: float, claim: ClaimLaw, rho: float) -> BoundReport:
    """Stop-loss bound for ``Y`` against the moment-matched gamma law, Poisson count."""
    r, s = gamma_params(lam, claim, rho)
    mo = claim.moments()
    c = {
        "lambda": lam,
        "rho": rho,
        "mean_x": mo.mean,
        "m2": mo.m2,
        "r": r,
        "s": s,
        "c_r": stein_factor_cr(r),
        "sigma": sigma(lam, claim, rho),
        "beta": beta(lam, claim),
        "delta_claim": coupling_delta_claim(claim),
    }
    return _report("gamma_stoploss", c)


def _poisson_constants(model, d_method, mc_budget, rng, tail_eps):
    claim = model.claim
    if not (claim.non_negative and claim.integer_valued):
        raise BoundError("Poisson approximation needs non-negative integer claims")
    mo = claim.moments()
    if not mo.mean > 0:
        raise BoundError("Poisson approximation needs E[X] > 0")
    n1, n2, _ = model.count.raw_moments()
    delta = coupling_delta_count(model.count, tail_eps)
    c = {
        "rho": model.rho,
        "EN": n1,
        "EN2": n2,
        "mean_x": mo.mean,
        "m2": mo.m2,
        "m1absdev1": mo.m1absdev1,
        "delta_count": delta,
    }
    mc_terms = []
    if model.rho == 0:
        c["gap"] = delta * mo.mean
    else:
        gap, mc_terms, extra = _gap(model, d_method, mc_budget, rng, tail_eps)
        c.update(extra, gap=gap)
    return c, mc_terms


def bound_poisson_wasserstein(
    model: RandomSumModel, d_method: str = "exact", mc_budget: int = 10**6, rng=None, tail_eps: float = DEFAULT_TAIL_EPS
) -> BoundReport:
    """Wasserstein bound for ``Y`` against ``Poisson(E[N] E[X])``."""
    c, mc = _poisson_constants(model, d_method, mc_budget, rng, tail_eps)
    return _report("poisson_wasserstein", c, mc)


def bound_poisson_tv(
    model: RandomSumModel, d_method: str = "exact", mc_budget: int = 10**6, rng=None, tail_eps: float = DEFAULT_TAIL_EPS
) -> BoundReport:
    """Total-variation bound for ``Y`` against ``Poisson(E[N] E[X])``.

    For ``rho > 0`` the bound is assembled from the Wasserstein argument with
    the total-variation Stein factor ``1 / E[Y]`` in place of ``3 / sqrt(E[Y])``.
    """
    c, mc = _poisson_constants(model, d_method, mc_budget, rng, tail_eps)
    return _report("poisson_tv", c, mc, notes="assembled" if model.rho > 0 else "")


def bound_normal_count_coupling_alt(
    model: RandomSumModel, lam_proxy: float | None = None, tail_eps: float = DEFAULT_TAIL_EPS
) -> BoundReport:
    """Wasserstein bound via a Poisson proxy count ``M ~ Poisson(E[N])``.

    Independent centred claims only; ``d_W(M, N)`` is computed exactly from
    the two pmfs.
    """
    if model.rho != 0:
        raise BoundError("the count-coupling alternative holds for rho = 0 only")
    _require_centred(model.claim)
    mo = model.claim.moments()
    n1 = model.count.moments().mean
    proxy = Poisson(n1 if lam_proxy is None else lam_proxy)
    dw = quantile_coupling_expectation(proxy.exact_pmf(tail_eps), model.count.exact_pmf(tail_eps))
    c = {"EN": n1, "var_x": mo.variance, "m3abs": mo.m3abs, "m1abs": mo.m1abs, "dw_count_poisson": dw, "lambda_proxy": proxy.lam}
    return _report("normal_count_coupling_alt", c)


def compute_bound(
    kind: str,
    model: RandomSumModel,
    *,
    d_method: str = "exact",
    mc_budget: int = 10**6,
    rng=None,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> BoundReport:
    """Dispatch by bound kind; raises :class:`BoundError` on unmet preconditions."""
    try:
        if kind in ("normal_zero_mean", "normal_zero_mean_indep"):
            if kind == "normal_zero_mean_indep" and model.rho != 0:
                raise BoundError("normal_zero_mean_indep needs rho = 0")
            return bound_normal_zero_mean(model, mc_budget, rng, d_method, tail_eps)
        if kind == "normal_poisson":
            return bound_normal_poisson(_require_poisson(model), model.claim, model.rho)
        if kind == "gamma_stoploss":
            return bound_gamma_stoploss(_require_poisson(model), model.claim, model.rho)
        if kind == "poisson_wasserstein":
            return bound_poisson_wasserstein(model, d_method, mc_budget, rng, tail_eps)
        if kind == "poisson_tv":
            return bound_poisson_tv(model, d_method, mc_budget, rng, tail_eps)
        if kind == "normal_count_coupling_alt":
            return bound_normal_count_coupling_alt(model, tail_eps=tail_eps)
    except LawError as exc:
        raise BoundError(str(exc)) from exc
    raise BoundError(f"unknown bound kind {kind!r}; expected one of {', '.join(BOUND_KINDS)}")
