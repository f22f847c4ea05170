"""Size, zero, generalized-zero and non-zero biasing.

Size biasing of a lattice law is again a lattice law and is built as an exact
pmf.  The three zero-type biases of a lattice law are absolutely continuous
with piecewise-constant densities; the bounds only ever need ``E|.|`` of them,
so they are exposed as moment functionals, with the density available for
cross-checks.

Every "for any coupling" freedom is filled with the comonotone (quantile)
coupling, which minimizes ``E|A - B|`` on the line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .laws import (
    DEFAULT_TAIL_EPS,
    Binomial,
    ClaimLaw,
    CountLaw,
    ExactPmf,
    GammaMixedPoisson,
    Hypergeometric,
    LawError,
    Poisson,
    _moment_set_from_pmf,
)

BiasKind = Literal["size", "zero", "generalized_zero", "non_zero"]
_MEAN_ZERO_TOL = 1e-12


def _as_pmf(law, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    if isinstance(law, ExactPmf):
        return law
    if isinstance(law, CountLaw):
        return law.exact_pmf(tail_eps)
    return law.exact_pmf()


def _law_mean(law, pmf: ExactPmf) -> float:
    if isinstance(law, (CountLaw, ClaimLaw)):
        return law.moments().mean
    return pmf.mean()


def size_bias_pmf(law, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    """Exact pmf of the size-biased law, ``P(X^s = j) = j P(X = j) / E[X]``.

    The weights use the law's exact mean, so on a truncated support the
    returned probabilities sum to slightly less than one; the deficit is
    reported as ``truncation_mass``.
    """
    pmf = _as_pmf(law, tail_eps)
    if pmf.atoms.size and pmf.atoms[0] < 0:
        raise LawError("size bias needs a non-negative law")
    mean = _law_mean(law, pmf)
    if not mean > 0:
        raise LawError("size bias needs a positive mean")
    probs = pmf.atoms * pmf.probs / mean
    keep = probs > 0
    out = ExactPmf(pmf.atoms[keep], probs[keep])
    return ExactPmf(out.atoms, out.probs, max(0.0, 1.0 - out.mass))


def shifted_size_bias_pmf(law: CountLaw, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    """Pmf of ``N^s - 1``."""
    sb = size_bias_pmf(law, tail_eps)
    return ExactPmf(sb.atoms - 1.0, sb.probs, sb.truncation_mass)


def quantile_coupling_expectation(a: ExactPmf, b: ExactPmf) -> float:
    """``E|A - B|`` under the comonotone coupling, i.e. the integral of ``|F_A - F_B|``."""
    return float(_kernels.cdf_l1(a.atoms, a.probs, b.atoms, b.probs))


def quantile_coupling_joint(a: ExactPmf, b: ExactPmf):
    """Joint pmf of ``(F_A^{-1}(U), F_B^{-1}(U))``.

    Returns ``(xa, xb, prob)`` arrays.  Mass missing from either pmf (tail
    truncation) is left out.
    """
    ca, cb = a.cdf(), b.cdf()
    top = min(ca[-1], cb[-1])
    levels = np.union1d(ca[ca <= top], cb[cb <= top])
    levels = np.concatenate(([0.0], levels[levels > 0]))
    widths = np.diff(levels)
    mid = levels[:-1] + 0.5 * widths
    ia = np.minimum(np.searchsorted(ca, mid, side="right"), ca.size - 1)
    ib = np.minimum(np.searchsorted(cb, mid, side="right"), cb.size - 1)
    keep = widths > 0
    return a.atoms[ia][keep], b.atoms[ib][keep], widths[keep]


def coupling_delta_count(law: CountLaw, tail_eps: float = DEFAULT_TAIL_EPS, analytic: bool = True) -> float:
    """``E|N + 1 - N^s|`` under the quantile coupling.

    Families with a stochastic ordering between ``N + 1`` and ``N^s`` have a
    closed form; otherwise the coupling is evaluated exactly on truncated
    supports.
    """
    if analytic:
        if isinstance(law, Poisson):
            return 0.0
        if isinstance(law, Binomial):
            return float(law.p)
        if isinstance(law, GammaMixedPoisson):
            return law.rate_variance / law.rate_mean
        if isinstance(law, Hypergeometric):
            m1, m2, _ = law.raw_moments()
            return 1.0 + m1 - m2 / m1
    return quantile_coupling_expectation(law.exact_pmf(tail_eps), shifted_size_bias_pmf(law, tail_eps))


# --------------------------------------------------------------------------
# zero-type biases
# --------------------------------------------------------------------------


def abs_mean_zero_bias(law) -> float:
    """``E|X^z| = E|X|^3 / (2 Var X)`` for a centred law."""
    pmf = _as_pmf(law)
    mean, var = pmf.mean(), pmf.variance()
    if abs(mean) > _MEAN_ZERO_TOL * max(1.0, np.max(np.abs(pmf.atoms))):
        raise LawError(f"zero bias needs a centred law, mean is {mean:g}")
    if not var > 0:
        raise LawError("zero bias needs positive variance")
    return float(np.dot(pmf.probs, np.abs(pmf.atoms) ** 3) / (2.0 * var))


def abs_mean_gz(law) -> float:
    """``E|X^gz| = E|X|^3 / (2 E[X^2])``."""
    pmf = _as_pmf(law)
    m2 = pmf.moment(2)
    if not m2 > 0:
        raise LawError("generalized-zero bias needs E[X^2] > 0")
    return float(np.dot(pmf.probs, np.abs(pmf.atoms) ** 3) / (2.0 * m2))


def abs_mean_nz_product(lam: float, law) -> float:
    """``E|(N X)^nz|`` for ``N ~ Poisson(lam)`` independent of ``X``."""
    mo = law.moments() if not isinstance(law, ExactPmf) else _moment_set_from_pmf(law.atoms, law.probs)
    denom = 2.0 * (mo.m2 + lam * mo.variance)
    if not denom > 0:
        raise LawError("non-zero bias of N*X needs positive variance")
    num = (lam**2 + 3 * lam + 1) * mo.m3abs - lam * (lam + 1) * mo.mean * mo.m2sgn
    return float(num / denom)


def biased_moment(law, kind: BiasKind, k: int) -> float:
    """``E[(X^b)^k]`` straight from the defining identity with ``g(x) = x^(k+1)/(k+1)``."""
    pmf = _as_pmf(law)
    x, p = pmf.atoms, pmf.probs
    if kind == "size":
        return float(np.dot(p, x ** (k + 1)) / np.dot(p, x))
    if kind == "generalized_zero":
        return float(np.dot(p, x ** (k + 2)) / ((k + 1) * np.dot(p, x**2)))
    mean = float(np.dot(p, x))
    if kind == "zero" and abs(mean) > _MEAN_ZERO_TOL * max(1.0, np.max(np.abs(x))):
        raise LawError("zero bias needs a centred law")
    var = float(np.dot(p, (x - mean) ** 2))
    if kind in ("zero", "non_zero"):
        return float(np.dot(p, (x - mean) * x ** (k + 1)) / ((k + 1) * var))
    raise LawError(f"unknown bias kind {kind!r}")


def bias_density(law, kind: BiasKind):
    """Piecewise-constant density of a zero-type bias of a lattice law.

    Returns ``(edges, values)``: the density equals ``values[i]`` on
    ``[edges[i], edges[i+1])`` and vanishes outside ``[edges[0], edges[-1]]``.
    """
    pmf = _as_pmf(law)
    x, p = pmf.atoms, pmf.probs
    if kind in ("zero", "non_zero"):
        mean = float(np.dot(p, x))
        var = float(np.dot(p, (x - mean) ** 2))
        edges = x
        # E[(X - mu) 1{X > t}] for t in [x_i, x_{i+1})
        tail = np.cumsum(((x - mean) * p)[::-1])[::-1]
        return edges, tail[1:] / var
    if kind == "generalized_zero":
        m2 = float(np.dot(p, x**2))
        edges = np.union1d(x, [0.0])
        mids = 0.5 * (edges[:-1] + edges[1:])
        values = np.empty(mids.size)
        for i, t in enumerate(mids):
            if t >= 0:
                values[i] = np.dot(p, x * (x > t))
            else:
                values[i] = -np.dot(p, x * (x < t))
        return edges, values / m2
    raise LawError(f"{kind!r} bias has no density")


def abs_mean_from_density(edges: np.ndarray, values: np.ndarray) -> float:
    """``integral |t| f(t) dt`` for a piecewise-constant density."""
    a, b = edges[:-1], edges[1:]
    # integral of |t| over [a, b]
    both = np.where(a >= 0, 0.5 * (b * b - a * a), np.where(b <= 0, 0.5 * (a * a - b * b), 0.5 * (a * a + b * b)))
    return float(np.dot(values, both))


@dataclass(frozen=True)
class BiasedLaw:
    """A biased version of a lattice law.

    ``pmf`` is set for size bias; zero-type biases carry only their moment
    functionals.
    """

    base: object
    kind: BiasKind
    pmf: ExactPmf | None = None

    @property
    def abs_mean(self) -> float:
        if self.kind == "size":
            return float(np.dot(self.pmf.probs, np.abs(self.pmf.atoms)))
        if self.kind == "generalized_zero":
            return abs_mean_gz(self.base)
        if self.kind == "zero":
            return abs_mean_zero_bias(self.base)
        return abs_mean_from_density(*bias_density(self.base, "non_zero"))

    def moment(self, k: int) -> float:
        return biased_moment(self.base, self.kind, k)


def bias(law, kind: BiasKind, tail_eps: float = DEFAULT_TAIL_EPS) -> BiasedLaw:
    if kind == "size":
        return BiasedLaw(law, kind, size_bias_pmf(law, tail_eps))
    pmf = _as_pmf(law, tail_eps)
    var = pmf.variance()
    if kind in ("zero", "non_zero") and not var > 0:
        raise LawError(f"{kind} bias needs positive variance")
    if kind == "zero" and abs(pmf.mean()) > _MEAN_ZERO_TOL * max(1.0, np.max(np.abs(pmf.atoms))):
        raise LawError("zero bias needs a centred law")
    if kind == "generalized_zero" and not pmf.moment(2) > 0:
        raise LawError("generalized-zero bias needs E[X^2] > 0")
    return BiasedLaw(law, kind)


# --------------------------------------------------------------------------
# size bias vs generalized-zero bias of a claim
# --------------------------------------------------------------------------


def _l1_const_vs_linear(c, g0, g1, h):
    """Exact integral of ``|c - g(t)|`` where ``g`` runs linearly from g0 to g1 over a length-h interval."""
    d0, d1 = c - g0, c - g1
    same = d0 * d1 >= 0
    safe = np.where(same, 1.0, d0 - d1)
    t = np.where(same, 0.0, d0 / safe)
    crossed = h * 0.5 * (t * np.abs(d0) + (1 - t) * np.abs(d1))
    return np.where(same, h * 0.5 * (np.abs(d0) + np.abs(d1)), crossed)


def coupling_delta_claim(law) -> float:
    """``E|X^s - X^gz|`` under the quantile coupling, for a non-negative claim.

    ``X^s`` is a lattice law and ``X^gz`` has a piecewise-linear cdf, so the
    Wasserstein integral is evaluated exactly piece by piece.
    """
    pmf = _as_pmf(law)
    if pmf.atoms[0] < 0:
        raise LawError("coupling_delta_claim needs a non-negative claim")
    sb = size_bias_pmf(law)
    edges, dens = bias_density(pmf, "generalized_zero")
    h = np.diff(edges)
    g = np.concatenate(([0.0], np.cumsum(dens * h)))
    fs = np.concatenate(([0.0], np.cumsum(sb.probs)))
    c = fs[np.searchsorted(sb.atoms, edges[:-1], side="right")]
    return float(np.sum(_l1_const_vs_linear(c, g[:-1], g[1:], h)))


def gz_cdf(law, t: float) -> float:
    """``P(X^gz <= t) = E[X min(X, t)] / E[X^2]`` for a non-negative claim."""
    pmf = _as_pmf(law)
    x, p = pmf.atoms, pmf.probs
    return float(np.dot(p, x * np.minimum(x, t)) / np.dot(p, x**2))
