"""The exchangeable random-sum model.

With probability ``rho`` every summand equals one draw ``X_1`` (comonotone
branch, ``Y = N X_1``); otherwise the summands are independent.  This mixture
realizes the joint characteristic function of the equally-correlated model.

For lattice claims the law of ``Y`` is built exactly by direct convolution on
the claim lattice, which also gives exact pmfs for the right-hand sides of the
size-bias representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .laws import DEFAULT_TAIL_EPS, ClaimLaw, CountLaw, ExactPmf, LawError
from .transforms import quantile_coupling_joint, shifted_size_bias_pmf

_CHUNK = 1 << 22  # claim draws per kernel call
MAX_CLAIM_LATTICE_WIDTH = 10**5


@dataclass(frozen=True)
class RandomSumModel:
    count: CountLaw
    claim: ClaimLaw
    rho: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise LawError(f"rho must lie in [0, 1], got {self.rho}")

    def with_rho(self, rho: float) -> "RandomSumModel":
        return RandomSumModel(self.count, self.claim, rho)

    def to_config(self) -> dict:
        return {"count": self.count.to_config(), "claim": self.claim.to_config(), "rho": self.rho}


# --------------------------------------------------------------------------
# lattice vectors
# --------------------------------------------------------------------------


@dataclass
class _Lattice:
    """Dense probabilities on the integers ``offset, offset+1, ...``."""

    offset: int
    probs: np.ndarray

    def to_pmf(self, span: float, truncation_mass: float = 0.0, drop: bool = True) -> ExactPmf:
        atoms = (self.offset + np.arange(self.probs.size)) * span
        keep = self.probs > 0 if drop else slice(None)
        return ExactPmf(atoms[keep], self.probs[keep], truncation_mass)

    def convolve(self, other: "_Lattice") -> "_Lattice":
        return _Lattice(self.offset + other.offset, np.convolve(self.probs, other.probs))


def _claim_lattice(claim: ClaimLaw) -> tuple[_Lattice, float]:
    idx = claim.lattice_indices
    lo = int(idx.min())
    if int(idx.max()) - lo > MAX_CLAIM_LATTICE_WIDTH:
        raise LawError(
            f"claim atoms span {int(idx.max()) - lo} lattice steps of {claim.span}; "
            "exact laws need a coarser lattice (irrational-looking atoms are not supported)"
        )
    dense = np.zeros(int(idx.max()) - lo + 1)
    np.add.at(dense, idx - lo, claim.probs)
    return _Lattice(lo, dense), float(claim.span)


def _pmf_on_lattice(pmf: ExactPmf, span: float) -> _Lattice:
    idx = np.rint(pmf.atoms / span).astype(np.int64)
    if not np.allclose(idx * span, pmf.atoms, rtol=1e-12, atol=1e-12):
        raise LawError("pmf does not live on the claim lattice")
    lo = int(idx.min())
    dense = np.zeros(int(idx.max()) - lo + 1)
    np.add.at(dense, idx - lo, pmf.probs)
    return _Lattice(lo, dense)


def _compound(q: _Lattice, counts: ExactPmf) -> _Lattice:
    """``sum_n P(N = n) q^{*n}`` for integer counts."""
    ns = np.rint(counts.atoms).astype(np.int64)
    if ns.size == 0:
        return _Lattice(0, np.zeros(1))
    kmax = int(ns.max())
    width = q.probs.size - 1
    lo = min(0, kmax * q.offset)
    hi = max(0, kmax * (q.offset + width))
    acc = np.zeros(hi - lo + 1)
    weight = dict(zip(ns.tolist(), counts.probs.tolist()))
    cur = _Lattice(0, np.ones(1))
    for n in range(kmax + 1):
        w = weight.get(n, 0.0)
        if w:
            start = cur.offset - lo
            acc[start : start + cur.probs.size] += w * cur.probs
        if n < kmax:
            cur = cur.convolve(q)
    return _Lattice(lo, acc)


def _comonotone(claim: ClaimLaw, counts: ExactPmf) -> _Lattice:
    """Law of ``N X_1`` by collision accumulation over the outer product."""
    ns = np.rint(counts.atoms).astype(np.int64)
    idx = claim.lattice_indices
    vals = np.outer(ns, idx).ravel()
    w = np.outer(counts.probs, claim.probs).ravel()
    lo = int(min(0, vals.min()))
    dense = np.bincount(vals - lo, weights=w)
    return _Lattice(lo, dense)


def _size_bias_lattice(lat: _Lattice, span: float, mean: float) -> _Lattice:
    x = (lat.offset + np.arange(lat.probs.size)) * span
    return _Lattice(lat.offset, lat.probs * x / mean)


# --------------------------------------------------------------------------
# moments and exact laws
# --------------------------------------------------------------------------


def mean_var(model: RandomSumModel) -> tuple[float, float]:
    """Exact mean and variance of ``Y``.

    Conditionally on ``N = n`` the mean is ``n E[X]`` and the variance is
    ``Var(X) (n + rho n (n-1))``, since distinct summands have covariance
    ``rho Var(X)``.
    """
    n1, n2, _ = model.count.raw_moments()
    cm = model.claim.moments()
    var_n = n2 - n1 * n1
    mean = n1 * cm.mean
    var = cm.variance * (n1 + model.rho * (n2 - n1)) + cm.mean**2 * var_n
    return mean, var


def exact_pmf(model: RandomSumModel, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    """Exact law of ``Y`` on the claim lattice, with the count tail truncated."""
    counts = model.count.exact_pmf(tail_eps)
    q, span = _claim_lattice(model.claim)
    return _mix(model.rho, _comonotone(model.claim, counts), _compound(q, counts)).to_pmf(span, counts.truncation_mass)


def _mix(rho: float, comon: _Lattice, indep: _Lattice) -> _Lattice:
    if rho == 0.0:
        return indep
    if rho == 1.0:
        return comon
    lo = min(comon.offset, indep.offset)
    hi = max(comon.offset + comon.probs.size, indep.offset + indep.probs.size)
    out = np.zeros(hi - lo)
    out[comon.offset - lo : comon.offset - lo + comon.probs.size] += rho * comon.probs
    out[indep.offset - lo : indep.offset - lo + indep.probs.size] += (1.0 - rho) * indep.probs
    return _Lattice(lo, out)


def compound_pmf(claim: ClaimLaw, counts: ExactPmf) -> ExactPmf:
    """Law of ``X_1 + ... + X_M`` with IID claims and ``M`` distributed as ``counts``."""
    q, span = _claim_lattice(claim)
    return _compound(q, counts).to_pmf(span, counts.truncation_mass)


def comonotone_pmf(claim: ClaimLaw, counts: ExactPmf) -> ExactPmf:
    """Law of ``N X_1``."""
    return _comonotone(claim, counts).to_pmf(float(claim.span), counts.truncation_mass)


def _check_size_biasable(model: RandomSumModel):
    if not model.claim.non_negative:
        raise LawError("size bias of Y needs non-negative claims")
    if not mean_var(model)[0] > 0:
        raise LawError("size bias of Y needs a positive mean")


def exact_pmf_size_bias_lhs(model: RandomSumModel, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    """``Y^s`` by direct reweighting of the exact law of ``Y``."""
    _check_size_biasable(model)
    y = exact_pmf(model, tail_eps)
    mean = mean_var(model)[0]
    probs = y.atoms * y.probs / mean
    keep = probs > 0
    return ExactPmf(y.atoms[keep], probs[keep], max(0.0, 1.0 - float(probs.sum())))


def exact_pmf_size_bias_rhs(model: RandomSumModel, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    """``Y^s`` built from its mixture representation.

    With probability ``rho`` it is ``(N X_1)^s``, otherwise ``X_1^s`` plus an
    independent sum of ``N^s - 1`` IID claims.
    """
    _check_size_biasable(model)
    counts = model.count.exact_pmf(tail_eps)
    q, span = _claim_lattice(model.claim)
    n1 = model.count.moments().mean
    mu = model.claim.moments().mean
    comon = _size_bias_lattice(_comonotone(model.claim, counts), span, n1 * mu)
    shifted = shifted_size_bias_pmf(model.count, tail_eps)
    indep = _size_bias_lattice(q, span, mu).convolve(_compound(q, shifted))
    out = _mix(model.rho, comon, indep)
    keep_mass = float(out.probs.sum())
    return out.to_pmf(span, max(0.0, 1.0 - keep_mass))


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def _claim_table(claim: ClaimLaw):
    atoms = claim.atoms
    cdf = np.cumsum(claim.probs)
    cdf[-1] = 1.0
    return cdf, atoms


def compound_sums(claim: ClaimLaw, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sums of ``counts[i]`` IID claims each, drawn through the kernel backend."""
    counts = np.asarray(counts, dtype=np.int64)
    cdf, atoms = _claim_table(claim)
    out = np.empty(counts.size)
    i = 0
    while i < counts.size:
        csum = np.cumsum(counts[i:])
        j = i + max(1, int(np.searchsorted(csum, _CHUNK, side="right")))
        block = counts[i:j]
        out[i:j] = _kernels.compound_sums(block, cdf, atoms, rng.random(int(block.sum())))
        i = j
    return out


def sample_sum(model: RandomSumModel, rng: np.random.Generator, size=None):
    """Draw ``Y``: a Bernoulli(rho) branch flag, a count, then the claims."""
    n_draws = 1 if size is None else int(size)
    branch = rng.random(n_draws) < model.rho
    n = np.asarray(model.count.sample(rng, n_draws), dtype=np.int64)
    x1 = model.claim.sample(rng, n_draws)
    y = np.where(branch, n * x1, 0.0)
    idx = np.flatnonzero(~branch)
    y[idx] = compound_sums(model.claim, n[idx], rng)
    return float(y[0]) if size is None else y


# --------------------------------------------------------------------------
# coupled gap E|Y - (X'_1 + ... + X'_{N^s - 1})|
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GapEstimate:
    value: float
    standard_error: float
    method: str
    truncation_mass: float = 0.0


def _count_coupling(model: RandomSumModel, tail_eps: float):
    counts = model.count.exact_pmf(tail_eps)
    shifted = shifted_size_bias_pmf(model.count, tail_eps)
    n, m, w = quantile_coupling_joint(counts, shifted)
    tm = max(0.0, 1.0 - float(w.sum()))
    return np.rint(n).astype(np.int64), np.rint(m).astype(np.int64), w, tm


def coupled_gap_exact(model: RandomSumModel, tail_eps: float = DEFAULT_TAIL_EPS) -> GapEstimate:
    """Exact ``E|Y - sum_{j < N^s} X'_j|`` under the coupling used by the bounds.

    ``(N, N^s)`` are quantile coupled and the branch flag of ``Y`` is
    independent of everything else.  On the independent branch the primed
    claims are the claims of ``Y`` itself, so the gap is a sum of
    ``|N^s - 1 - N|`` claims.  On the comonotone branch ``Y = N X_1`` and
    ``X'_1 = X_1``, the remaining primed claims being fresh.
    """
    n, m, w, tm = _count_coupling(model, tail_eps)
    q, span = _claim_lattice(model.claim)
    x = model.claim.atoms
    px = model.claim.probs

    k_indep = np.abs(m - n)
    k_comon = m - 1  # only for m >= 1
    need = set(k_indep.tolist()) if model.rho < 1 else set()
    if model.rho > 0:
        need |= set(k_comon[m >= 1].tolist())
    abs_sum = {}
    comon_terms = np.zeros(n.size)
    if model.rho > 0:
        zero = m == 0
        comon_terms[zero] = n[zero] * float(np.dot(px, np.abs(x)))
    by_k: dict[int, np.ndarray] = {}
    if model.rho > 0:
        for k in np.unique(k_comon[m >= 1]):
            by_k[int(k)] = np.flatnonzero((m >= 1) & (k_comon == k))

    cur = _Lattice(0, np.ones(1))
    kmax = max(need) if need else 0
    for k in range(kmax + 1):
        if k in need:
            s = (cur.offset + np.arange(cur.probs.size)) * span
            abs_sum[k] = float(np.dot(cur.probs, np.abs(s)))
            if k in by_k:
                rows = by_k[k]
                # E|(n - 1) X - S_k| over X and S_k independent
                coef = (n[rows] - 1).astype(float)
                diff = np.abs(coef[:, None, None] * x[None, :, None] - s[None, None, :])
                comon_terms[rows] = np.einsum("rxs,x,s->r", diff, px, cur.probs)
        if k < kmax:
            cur = cur.convolve(q)

    indep_terms = np.array([abs_sum[int(k)] for k in k_indep]) if model.rho < 1 else np.zeros(n.size)
    value = float(np.dot(w, (1.0 - model.rho) * indep_terms + model.rho * comon_terms))
    return GapEstimate(value, 0.0, "exact", tm)


def coupled_gap_mc(
    model: RandomSumModel,
    rng: np.random.Generator,
    budget: int = 10**6,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> GapEstimate:
    """Monte Carlo estimate of the same coupled gap, with its standard error."""
    counts = model.count.exact_pmf(tail_eps)
    shifted = shifted_size_bias_pmf(model.count, tail_eps)
    cdf_claim, atoms = _claim_table(model.claim)
    cn, cm = counts.cdf(), shifted.cdf()
    total = 0.0
    total_sq = 0.0
    done = 0
    block = max(1, min(budget, 1 << 18))
    while done < budget:
        size = min(block, budget - done)
        u = rng.random(size)
        n = np.rint(counts.atoms[np.minimum(np.searchsorted(cn, u, side="right"), cn.size - 1)]).astype(np.int64)
        m = np.rint(shifted.atoms[np.minimum(np.searchsorted(cm, u, side="right"), cm.size - 1)]).astype(np.int64)
        b = rng.random(size) < model.rho
        k = _kernels.gap_draws(n, m, b)
        # split further so one kernel call never holds more than _CHUNK draws
        start = 0
        csum = np.cumsum(k)
        while start < size:
            base = csum[start - 1] if start else 0
            stop = start + max(1, int(np.searchsorted(csum[start:] - base, _CHUNK, side="right")))
            draws = int(k[start:stop].sum())
            g = _kernels.coupled_gaps(n[start:stop], m[start:stop], b[start:stop], cdf_claim, atoms, rng.random(draws))
            total += float(g.sum())
            total_sq += float(np.dot(g, g))
            start = stop
        done += size
    mean = total / budget
    var = max(0.0, total_sq / budget - mean * mean)
    se = np.sqrt(var / max(1, budget - 1)) if budget > 1 else float("inf")
    return GapEstimate(mean, float(se), "monte_carlo", counts.truncation_mass)
