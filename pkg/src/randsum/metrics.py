"""Wasserstein, stop-loss and total-variation distances.

Distances between two exact pmfs are sums over lattice gaps.  Distances to a
continuous target use closed forms for the target: the antiderivative
``x Phi(x) + phi(x)`` for the normal and regularized incomplete gamma
functions for the gamma partial expectation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np
from scipy import integrate
from scipy.special import gammainc, gammaincc, gammainccinv, ndtr, ndtri

from . import _kernels
from .laws import DEFAULT_TAIL_EPS, ExactPmf, LawError, Poisson

DistanceKind = Literal["wasserstein", "stoploss", "tv"]
Method = Literal["exact_pmf", "empirical"]

STOPLOSS_GRID_POINTS = 4096
_UPPER_QUANTILE = 0.9999
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DistanceEstimate:
    kind: DistanceKind
    value: float
    method: Method
    error_bound: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# continuous targets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaTarget:
    """Gamma law with shape ``r`` and rate ``s``."""

    r: float
    s: float

    def __post_init__(self):
        if not (self.r > 0 and self.s > 0):
            raise LawError(f"gamma target needs r > 0 and s > 0, got r={self.r}, s={self.s}")

    @property
    def mean(self) -> float:
        return self.r / self.s

    @property
    def sd(self) -> float:
        return math.sqrt(self.r) / self.s

    def cdf(self, a):
        return gammainc(self.r, self.s * np.maximum(np.asarray(a, dtype=float), 0.0))

    def ppf(self, q):
        return gammainccinv(self.r, 1.0 - np.asarray(q, dtype=float)) / self.s

    def stoploss(self, a):
        """``E(Z - a)_+`` for ``a >= 0``."""
        a = np.asarray(a, dtype=float)
        x = self.s * np.maximum(a, 0.0)
        out = self.mean * gammaincc(self.r + 1.0, x) - a * gammaincc(self.r, x)
        return np.where(a < 0, self.mean - a, out)

    @property
    def lower(self) -> float:
        return 0.0


@dataclass(frozen=True)
class NormalTarget:
    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise LawError(f"normal target needs sd > 0, got {self.sd}")

    def cdf(self, a):
        return ndtr((np.asarray(a, dtype=float) - self.mean) / self.sd)

    def ppf(self, q):
        return self.mean + self.sd * ndtri(np.asarray(q, dtype=float))

    def stoploss(self, a):
        z = (np.asarray(a, dtype=float) - self.mean) / self.sd
        return (self.mean - np.asarray(a, dtype=float)) * ndtr(-z) + self.sd * _INV_SQRT_2PI * np.exp(-0.5 * z * z)

    @property
    def lower(self) -> float:
        return float(self.ppf(1.0 - _UPPER_QUANTILE))


def poisson_target(mean: float, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
    return Poisson(mean).exact_pmf(tail_eps)


# --------------------------------------------------------------------------
# pmf vs pmf
# --------------------------------------------------------------------------


def _tail_error(p: ExactPmf, q: ExactPmf) -> float:
    tm = p.truncation_mass + q.truncation_mass
    if tm == 0:
        return 0.0
    lo = min(p.atoms[0], q.atoms[0])
    hi = max(p.atoms[-1], q.atoms[-1])
    return float(tm * (1.0 + hi - lo))


def wasserstein_pmf_vs_pmf(p: ExactPmf, q: ExactPmf) -> DistanceEstimate:
    """``sum gap * |F_p - F_q|`` over the merged support.

    Truncated mass is charged at ``1 + width of the support`` per unit into
    ``error_bound``; that is a heuristic, not a proof.
    """
    value = _kernels.cdf_l1(p.atoms, p.probs, q.atoms, q.probs)
    return DistanceEstimate("wasserstein", float(value), "exact_pmf", _tail_error(p, q))


def tv_pmf(p: ExactPmf, q: ExactPmf) -> DistanceEstimate:
    atoms = np.union1d(p.atoms, q.atoms)
    pp = np.zeros(atoms.size)
    qq = np.zeros(atoms.size)
    pp[np.searchsorted(atoms, p.atoms)] = p.probs
    qq[np.searchsorted(atoms, q.atoms)] = q.probs
    value = 0.5 * float(np.abs(pp - qq).sum())
    return DistanceEstimate("tv", value, "exact_pmf", 0.5 * (p.truncation_mass + q.truncation_mass))


# --------------------------------------------------------------------------
# Wasserstein to the normal
# --------------------------------------------------------------------------


def _dkw_constant() -> float:
    # integral of sqrt(Phi (1 - Phi)) over the real line
    val, _ = integrate.quad(lambda x: math.sqrt(ndtr(x) * ndtr(-x)), -np.inf, np.inf)
    return val


_SPREAD = _dkw_constant()


def _normal_l1_steps(z: np.ndarray, w: np.ndarray) -> float:
    F = np.cumsum(w)
    F /= F[-1]
    F[-1] = 1.0
    return float(_kernels.normal_l1(z, F))


def wasserstein_empirical_vs_normal(samples, mean: float, sd: float) -> DistanceEstimate:
    """``int |F_n - Phi|`` for ``(samples - mean) / sd``, integrated exactly.

    The integral runs over the whole line; both tails are closed forms, so
    nothing is truncated.  ``error_bound`` is ``int sqrt(Phi (1 - Phi) / n)``,
    the pointwise standard deviation of ``F_n`` integrated over the line; it
    sizes the sampling noise but is not a confidence band.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if not sd > 0:
        raise ValueError(f"sd must be positive, got {sd}")
    z, counts = np.unique((x - mean) / sd, return_counts=True)
    value = _normal_l1_steps(z, counts.astype(float))
    return DistanceEstimate("wasserstein", value, "empirical", _SPREAD / math.sqrt(x.size))


def wasserstein_pmf_vs_normal(pmf: ExactPmf, mean: float | None = None, sd: float | None = None) -> DistanceEstimate:
    """Exact ``d_W`` between the standardized lattice law and ``N(0, 1)``.

    ``mean`` and ``sd`` default to the moments of ``pmf``.  Missing mass is
    put on the last atom before integrating and charged into ``error_bound``.
    """
    mean = pmf.mean() / pmf.mass if mean is None else mean
    if sd is None:
        sd = math.sqrt(pmf.variance() / pmf.mass)
    if not sd > 0:
        raise ValueError("standardizing needs a positive sd")
    keep = pmf.probs > 0
    z = (pmf.atoms[keep] - mean) / sd
    value = _normal_l1_steps(z, pmf.probs[keep].copy())
    err = pmf.truncation_mass * (1.0 + z[-1] - z[0]) if pmf.truncation_mass else 0.0
    return DistanceEstimate("wasserstein", value, "exact_pmf", float(err))


# --------------------------------------------------------------------------
# stop-loss
# --------------------------------------------------------------------------


def stoploss_grid(lo: float, hi: float, points: int = STOPLOSS_GRID_POINTS) -> np.ndarray:
    """Half uniform, half geometric (dense near ``lo``) retentions on ``[lo, hi]``."""
    if not hi > lo:
        return np.array([lo])
    half = points // 2
    uni = np.linspace(lo, hi, points - half)
    geo = lo + np.geomspace(1e-6 * (hi - lo), hi - lo, half)
    return np.unique(np.concatenate([[lo], uni, geo]))


def _pmf_stoploss(atoms, probs, a):
    # E(Y - a)_+ = sum_{x > a} p (x - a)
    tail0 = np.concatenate([np.cumsum(probs[::-1])[::-1], [0.0]])
    tail1 = np.concatenate([np.cumsum((probs * atoms)[::-1])[::-1], [0.0]])
    idx = np.searchsorted(atoms, a, side="right")
    return tail1[idx] - a * tail0[idx]


def stoploss_distance(y, target, points: int = STOPLOSS_GRID_POINTS) -> DistanceEstimate:
    """``sup_a |E(Y - a)_+ - E(Z - a)_+|`` over retentions up to the 0.9999 quantile.

    ``y`` is an :class:`ExactPmf` or a 1-d array of samples; ``target`` is a
    :class:`GammaTarget` or :class:`NormalTarget`.  Retentions start at 0 for
    a gamma target and at the 0.0001 quantile for a normal one.

    Besides the fixed grid, for an exact pmf the maximum is also evaluated at
    every atom and at every point where ``F_Z`` crosses a flat stretch of
    ``F_Y``.  Between atoms the difference has derivative ``F_Y - F_Z``, so
    these candidates make the sup exact on the retention range.
    """
    if isinstance(y, ExactPmf):
        keep = y.probs > 0
        atoms, probs = y.atoms[keep], y.probs[keep]
        method = "exact_pmf"
        hi_y = atoms[np.searchsorted(np.cumsum(probs), _UPPER_QUANTILE * y.mass)] if atoms.size else 0.0
        lo_y = atoms[0]
    else:
        atoms, counts = np.unique(np.asarray(y, dtype=float).ravel(), return_counts=True)
        if atoms.size == 0:
            raise ValueError("empty sample")
        probs = counts / counts.sum()
        method = "empirical"
        hi_y = float(np.quantile(np.asarray(y, dtype=float), _UPPER_QUANTILE))
        lo_y = atoms[0]
    hi = max(float(target.ppf(_UPPER_QUANTILE)), float(hi_y))
    lo = target.lower if isinstance(target, GammaTarget) else min(target.lower, float(lo_y))
    a = stoploss_grid(lo, hi, points)
    if method == "exact_pmf":
        F = np.cumsum(probs) / probs.sum()
        crossings = target.ppf(np.clip(F[:-1], 0.0, 1.0))
        inside = (crossings > atoms[:-1]) & (crossings < atoms[1:])
        extra = np.concatenate([atoms, crossings[inside]])
        a = np.unique(np.concatenate([a, extra[(extra >= lo) & (extra <= hi)]]))
    diff = np.abs(_pmf_stoploss(atoms, probs, a) - target.stoploss(a))
    value = float(diff.max())
    if method == "exact_pmf":
        err = y.truncation_mass * (1.0 + hi - lo) if y.truncation_mass else 0.0
    else:
        x = np.asarray(y, dtype=float).ravel()
        at = a[int(np.argmax(diff))]
        err = 3.0 * float(np.std(np.maximum(x - at, 0.0))) / math.sqrt(x.size)
    return DistanceEstimate("stoploss", value, method, float(err))


# --------------------------------------------------------------------------
# empirical laws against an exact lattice target
# --------------------------------------------------------------------------


def empirical_pmf(samples) -> ExactPmf:
    atoms, counts = np.unique(np.asarray(samples, dtype=float).ravel(), return_counts=True)
    if atoms.size == 0:
        raise ValueError("empty sample")
    return ExactPmf(atoms, counts / counts.sum())


def wasserstein_empirical_vs_pmf(samples, target: ExactPmf) -> DistanceEstimate:
    """``d_W`` from an empirical law to an exact one.

    ``error_bound`` is ``sum gap * sqrt(F (1 - F) / n)`` over the target's
    cdf, the analogue of the normal-target heuristic.
    """
    emp = empirical_pmf(samples)
    n = np.asarray(samples).size
    value = _kernels.cdf_l1(emp.atoms, emp.probs, target.atoms, target.probs)
    F = np.cumsum(target.probs)
    spread = float(np.sum(np.diff(target.atoms) * np.sqrt(np.clip(F[:-1] * (1 - F[:-1]), 0, None))))
    return DistanceEstimate("wasserstein", float(value), "empirical", spread / math.sqrt(n) + _tail_error(emp, target))


def tv_empirical_vs_pmf(samples, target: ExactPmf) -> DistanceEstimate:
    """Total variation from an empirical law; ``error_bound`` is ``sum sqrt(p (1 - p) / n) / 2``."""
    emp = empirical_pmf(samples)
    n = np.asarray(samples).size
    est = tv_pmf(emp, target)
    spread = 0.5 * float(np.sum(np.sqrt(target.probs * (1 - target.probs)))) / math.sqrt(n)
    return DistanceEstimate("tv", est.value, "empirical", spread + est.error_bound)
