"""Count and claim laws.

Count laws describe the number of summands ``N``; claim laws describe a single
summand ``X``.  Every law is immutable, knows its pmf, can sample from an
explicit :class:`numpy.random.Generator`, and exposes the moments the bound
formulas consume through :class:`MomentSet`.

Claims are finite lattice laws only.  Counts may have unbounded support, in
which case exact computations work on a truncated prefix ``[0, K]`` and carry
the neglected tail mass along.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy import stats

DEFAULT_TAIL_EPS = 1e-12
_SUM_TOL = 1e-12


class LawError(ValueError):
    """Invalid law parameters or an operation outside a law's domain."""


def sgn(x):
    """Sign with ``sgn(0) = +1``."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    m2: float
    m3: float
    m3abs: float
    m2sgn: float
    m1abs: float
    m1absdev1: float


@dataclass(frozen=True, eq=False)
class ExactPmf:
    """A finite pmf on sorted atoms, plus the probability mass it leaves out.

    ``probs.sum()`` equals ``1 - truncation_mass`` up to rounding.
    """

    atoms: np.ndarray
    probs: np.ndarray
    truncation_mass: float = 0.0

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if atoms.shape != probs.shape or atoms.ndim != 1:
            raise LawError("atoms and probs must be 1-d arrays of equal length")
        order = np.argsort(atoms, kind="stable")
        atoms, probs = atoms[order], probs[order]
        if atoms.size and np.any(np.diff(atoms) == 0):
            uniq, inv = np.unique(atoms, return_inverse=True)
            probs = np.bincount(inv, weights=probs, minlength=uniq.size)
            atoms = uniq
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, x: float) -> "ExactPmf":
        return cls(np.array([float(x)]), np.array([1.0]))

    @classmethod
    def from_dict(cls, weights: Mapping, truncation_mass: float = 0.0) -> "ExactPmf":
        items = sorted((float(Fraction(str(k))), float(v)) for k, v in weights.items())
        return cls(np.array([a for a, _ in items]), np.array([p for _, p in items]), truncation_mass)

    @property
    def mass(self) -> float:
        return float(self.probs.sum())

    def moment(self, k: int) -> float:
        return float(np.dot(self.probs, self.atoms**k))

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot(self.probs, (self.atoms - m) ** 2))

    def cdf(self) -> np.ndarray:
        """Cumulative probabilities at each atom (right-continuous)."""
        return np.cumsum(self.probs)

    def drop_zeros(self, tol: float = 0.0) -> "ExactPmf":
        keep = self.probs > tol
        return ExactPmf(self.atoms[keep], self.probs[keep], self.truncation_mass)

    def prob(self, x: float) -> float:
        i = np.searchsorted(self.atoms, x)
        if i < self.atoms.size and self.atoms[i] == x:
            return float(self.probs[i])
        return 0.0

    def to_text(self) -> str:
        """Two-column table: support point and probability."""
        lines = [f"# truncation_mass {self.truncation_mass:.17g}", "# atom probability"]
        lines += [f"{a:.17g} {p:.17g}" for a, p in zip(self.atoms, self.probs)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExactPmf":
        tm = 0.0
        atoms, probs = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "truncation_mass":
                    tm = float(parts[1])
                continue
            a, p = line.split()
            atoms.append(float(a))
            probs.append(float(p))
        return cls(np.array(atoms), np.array(probs), tm)


def _moment_set_from_pmf(atoms: np.ndarray, probs: np.ndarray) -> MomentSet:
    mean = float(np.dot(probs, atoms))
    m2 = float(np.dot(probs, atoms**2))
    return MomentSet(
        mean=mean,
        variance=float(np.dot(probs, (atoms - mean) ** 2)),
        m2=m2,
        m3=float(np.dot(probs, atoms**3)),
        m3abs=float(np.dot(probs, np.abs(atoms) ** 3)),
        m2sgn=float(np.dot(probs, atoms**2 * sgn(atoms))),
        m1abs=float(np.dot(probs, np.abs(atoms))),
        m1absdev1=float(np.dot(probs, np.abs(atoms - 1.0))),
    )


# --------------------------------------------------------------------------
# count laws
# --------------------------------------------------------------------------


class CountLaw:
    """Law of a non-negative integer count with positive mean."""

    family: str = ""

    def _frozen(self):
        raise NotImplementedError

    def pmf(self, k):
        return self._frozen().pmf(k)

    def sf(self, k):
        """``P(N > k)``."""
        return self._frozen().sf(k)

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def factorial_moments(self) -> tuple[float, float, float]:
        """``E[N]``, ``E[N(N-1)]``, ``E[N(N-1)(N-2)]``."""
        raise NotImplementedError

    def raw_moments(self) -> tuple[float, float, float]:
        f1, f2, f3 = self.factorial_moments()
        return f1, f2 + f1, f3 + 3.0 * f2 + f1

    @property
    def bounded(self) -> bool:
        return False

    def truncated_support(self, tail_eps: float = DEFAULT_TAIL_EPS) -> int:
        """Smallest ``K`` such that ``P(N <= K) >= 1 - tail_eps``."""
        if not 0.0 < tail_eps < 1.0:
            raise LawError(f"tail_eps must lie in (0, 1), got {tail_eps}")
        frozen = self._frozen()
        k = int(max(0.0, frozen.isf(tail_eps)))
        while k > 0 and frozen.sf(k - 1) <= tail_eps:
            k -= 1
        while frozen.sf(k) > tail_eps:
            k += 1
        # the prefix sum is what callers see; keep it honest up to the
        # rounding of a (k + 1)-term float sum, below which only sf is meaningful
        total = float(np.sum(frozen.pmf(np.arange(k + 1))))
        while total < 1.0 - tail_eps - 4 * (k + 1) * np.finfo(float).eps:
            k += 1
            step = float(frozen.pmf(k))
            if step == 0.0:
                raise LawError("no finite truncation reaches the requested mass")
            total += step
        return k

    def exact_pmf(self, tail_eps: float = DEFAULT_TAIL_EPS) -> ExactPmf:
        k = self.truncated_support(tail_eps)
        support = np.arange(k + 1)
        tm = 0.0 if self.bounded else float(self.sf(k))
        return ExactPmf(support.astype(float), self.pmf(support), tm)

    def moments(self) -> MomentSet:
        m1, m2, m3 = self.raw_moments()
        return MomentSet(
            mean=m1,
            variance=m2 - m1 * m1,
            m2=m2,
            m3=m3,
            m3abs=m3,
            m2sgn=m2,
            m1abs=m1,
            m1absdev1=m1 - 1.0 + 2.0 * float(self.pmf(0)),
        )

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Poisson(CountLaw):
    lam: float
    family = "poisson"

    def __post_init__(self):
        if not self.lam > 0:
            raise LawError(f"Poisson rate must be positive, got {self.lam}")

    def _frozen(self):
        return stats.poisson(self.lam)

    def sample(self, rng, size=None):
        return rng.poisson(self.lam, size)

    def factorial_moments(self):
        lam = self.lam
        return lam, lam**2, lam**3

    def to_config(self):
        return {"family": "poisson", "lambda": self.lam}


@dataclass(frozen=True)
class Binomial(CountLaw):
    n: int
    p: float
    family = "binomial"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise LawError(f"binomial n must be a positive integer, got {self.n}")
        if not 0.0 < self.p <= 1.0:
            raise LawError(f"binomial p must lie in (0, 1], got {self.p}")

    @property
    def bounded(self):
        return True

    def _frozen(self):
        return stats.binom(self.n, self.p)

    def sample(self, rng, size=None):
        return rng.binomial(self.n, self.p, size)

    def factorial_moments(self):
        n, p = self.n, self.p
        return n * p, n * (n - 1) * p**2, n * (n - 1) * (n - 2) * p**3

    def to_config(self):
        return {"family": "binomial", "n": self.n, "p": self.p}


@dataclass(frozen=True)
class GammaMixedPoisson(CountLaw):
    """Poisson count whose rate is Gamma with shape ``r`` and scale ``(1-p)/p``.

    The marginal is negative binomial with ``P(N = 0) = p**r``.
    """

    r: float
    p: float
    family = "gamma_mixed_poisson"

    def __post_init__(self):
        if not self.r > 0:
            raise LawError(f"shape r must be positive, got {self.r}")
        if not 0.0 < self.p < 1.0:
            raise LawError(f"p must lie in (0, 1), got {self.p}")

    @property
    def scale(self) -> float:
        return (1.0 - self.p) / self.p

    @property
    def rate_mean(self) -> float:
        return self.r * self.scale

    @property
    def rate_variance(self) -> float:
        return self.r * self.scale**2

    def _frozen(self):
        return stats.nbinom(self.r, self.p)

    def sample(self, rng, size=None):
        return rng.poisson(rng.gamma(self.r, self.scale, size))

    def factorial_moments(self):
        # factorial moments of a mixed Poisson are the raw moments of the rate
        r, th = self.r, self.scale
        return r * th, r * (r + 1) * th**2, r * (r + 1) * (r + 2) * th**3

    def to_config(self):
        return {"family": "gamma_mixed_poisson", "r": self.r, "p": self.p}


@dataclass(frozen=True)
class Hypergeometric(CountLaw):
    population: int
    successes: int
    draws: int
    family = "hypergeometric"

    def __post_init__(self):
        M, K, n = self.population, self.successes, self.draws
        if M < 1 or not 0 <= K <= M or not 1 <= n <= M:
            raise LawError(f"invalid hypergeometric parameters ({M}, {K}, {n})")
        if K == 0:
            raise LawError("hypergeometric count needs a positive mean")

    @property
    def bounded(self):
        return True

    def _frozen(self):
        return stats.hypergeom(self.population, self.successes, self.draws)

    def sample(self, rng, size=None):
        return rng.hypergeometric(self.successes, self.population - self.successes, self.draws, size)

    def factorial_moments(self):
        M, K, n = self.population, self.successes, self.draws

        def ff(a, j):
            return math.prod(a - i for i in range(j))

        return tuple(ff(n, j) * ff(K, j) / ff(M, j) if M >= j else 0.0 for j in (1, 2, 3))

    def to_config(self):
        return {
            "family": "hypergeometric",
            "population": self.population,
            "successes": self.successes,
            "draws": self.draws,
        }


@dataclass(frozen=True, eq=False)
class FiniteCount(CountLaw):
    weights: Mapping[int, float]
    family = "finite"
    _support: np.ndarray = field(init=False, repr=False)
    _probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        items = sorted((int(k), float(v)) for k, v in dict(self.weights).items())
        if any(k < 0 for k, _ in items):
            raise LawError("count support must be non-negative")
        probs = np.array([v for _, v in items])
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > _SUM_TOL:
            raise LawError("count weights must be non-negative and sum to 1")
        keep = probs > 0
        object.__setattr__(self, "_support", np.array([k for k, _ in items])[keep])
        object.__setattr__(self, "_probs", probs[keep])
        if float(np.dot(self._support, self._probs)) <= 0:
            raise LawError("count law must have positive mean")

    @property
    def bounded(self):
        return True

    def pmf(self, k):
        k = np.asarray(k)
        idx = np.searchsorted(self._support, k)
        idx = np.clip(idx, 0, self._support.size - 1)
        return np.where(self._support[idx] == k, self._probs[idx], 0.0)

    def sf(self, k):
        return float(self._probs[self._support > k].sum())

    def truncated_support(self, tail_eps=DEFAULT_TAIL_EPS):
        if not 0.0 < tail_eps < 1.0:
            raise LawError(f"tail_eps must lie in (0, 1), got {tail_eps}")
        return int(self._support[-1])

    def sample(self, rng, size=None):
        return rng.choice(self._support, size=size, p=self._probs)

    def factorial_moments(self):
        k, p = self._support.astype(float), self._probs
        return tuple(float(np.dot(p, np.prod([k - i for i in range(j)], axis=0))) for j in (1, 2, 3))

    def to_config(self):
        return {"family": "finite", "weights": {str(int(k)): float(v) for k, v in zip(self._support, self._probs)}}


# --------------------------------------------------------------------------
# claim laws
# --------------------------------------------------------------------------


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(str(x)).limit_denominator(10**6)


@dataclass(frozen=True, eq=False)
class ClaimLaw:
    """A finite lattice law for a single claim.

    Atoms are kept as exact fractions so that the lattice span (the largest
    ``h`` with every atom in ``h * Z``) is exact.
    """

    weights: Mapping
    family = "lattice"
    _fracs: tuple = field(init=False, repr=False)
    _probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        merged: dict[Fraction, float] = {}
        for k, v in dict(self.weights).items():
            f = _as_fraction(k)
            merged[f] = merged.get(f, 0.0) + float(v)
        items = sorted((k, v) for k, v in merged.items() if v != 0.0)
        probs = np.array([v for _, v in items])
        if not items or np.any(probs < 0) or abs(probs.sum() - 1.0) > _SUM_TOL:
            raise LawError("claim weights must be non-negative and sum to 1")
        object.__setattr__(self, "_fracs", tuple(k for k, _ in items))
        object.__setattr__(self, "_probs", probs)

    @property
    def atoms(self) -> np.ndarray:
        return np.array([float(f) for f in self._fracs])

    @property
    def probs(self) -> np.ndarray:
        return self._probs.copy()

    @cached_property
    def span(self) -> Fraction:
        nonzero = [f for f in self._fracs if f != 0]
        if not nonzero:
            return Fraction(1)
        num = 0
        den = 1
        for f in nonzero:
            num = math.gcd(num, f.numerator)
            den = den * f.denominator // math.gcd(den, f.denominator)
        return Fraction(num, 1) / den if den else Fraction(num)

    @cached_property
    def lattice_indices(self) -> np.ndarray:
        """Atoms divided by the span, as integers."""
        h = self.span
        return np.array([int(f / h) for f in self._fracs], dtype=np.int64)

    @property
    def non_negative(self) -> bool:
        return self._fracs[0] >= 0

    @property
    def integer_valued(self) -> bool:
        return all(f.denominator == 1 for f in self._fracs)

    def exact_pmf(self) -> ExactPmf:
        return ExactPmf(self.atoms, self.probs)

    def pmf(self, x) -> float:
        f = _as_fraction(x)
        try:
            return float(self._probs[self._fracs.index(f)])
        except ValueError:
            return 0.0

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(self.atoms, size=size, p=self._probs)

    def moments(self) -> MomentSet:
        return _moment_set_from_pmf(self.atoms, self._probs)

    def to_config(self) -> dict:
        return {"family": "lattice", "weights": {str(f): float(p) for f, p in zip(self._fracs, self._probs)}}


class FiniteLatticePmf(ClaimLaw):
    family = "lattice"


class FiniteIntPmf(ClaimLaw):
    family = "finite_int"

    def __post_init__(self):
        super().__post_init__()
        if not all(f.denominator == 1 and f >= 0 for f in self._fracs):
            raise LawError("FiniteIntPmf needs non-negative integer support")

    def to_config(self):
        return {"family": "finite_int", "weights": {str(int(f)): float(p) for f, p in zip(self._fracs, self._probs)}}


class Bernoulli(ClaimLaw):
    family = "bernoulli"

    def __init__(self, p: float):
        if not 0.0 <= p <= 1.0:
            raise LawError(f"Bernoulli p must lie in [0, 1], got {p}")
        object.__setattr__(self, "p", float(p))
        super().__init__({0: 1.0 - p, 1: p})

    def __repr__(self):
        return f"Bernoulli(p={self.p})"

    def moments(self):
        p = self.p
        return MomentSet(p, p * (1 - p), p, p, p, p, p, 1.0 - p)

    def to_config(self):
        return {"family": "bernoulli", "p": self.p}


def rademacher(scale=1) -> FiniteLatticePmf:
    return FiniteLatticePmf({-scale: 0.5, scale: 0.5})


def point_claim(c=1) -> FiniteIntPmf | FiniteLatticePmf:
    if _as_fraction(c).denominator == 1 and c >= 0:
        return FiniteIntPmf({c: 1.0})
    return FiniteLatticePmf({c: 1.0})


# --------------------------------------------------------------------------
# module-level vocabulary
# --------------------------------------------------------------------------


def pmf(law, k):
    return law.pmf(k)


def sample(law, rng: np.random.Generator, size=None):
    return law.sample(rng, size)


def moments(law) -> MomentSet:
    return law.moments()


def truncated_support(law: CountLaw, tail_eps: float = DEFAULT_TAIL_EPS) -> range:
    return range(0, law.truncated_support(tail_eps) + 1)


_COUNT_FAMILIES = {
    "poisson": lambda c: Poisson(float(c["lambda"])),
    "binomial": lambda c: Binomial(int(c["n"]), float(c["p"])),
    "gamma_mixed_poisson": lambda c: GammaMixedPoisson(float(c["r"]), float(c["p"])),
    "negative_binomial": lambda c: GammaMixedPoisson(float(c["r"]), float(c["p"])),
    "hypergeometric": lambda c: Hypergeometric(int(c["population"]), int(c["successes"]), int(c["draws"])),
    "finite": lambda c: FiniteCount({int(k): float(v) for k, v in c["weights"].items()}),
}

_COUNT_KEYS = {
    "poisson": {"lambda"},
    "binomial": {"n", "p"},
    "gamma_mixed_poisson": {"r", "p"},
    "negative_binomial": {"r", "p"},
    "hypergeometric": {"population", "successes", "draws"},
    "finite": {"weights"},
}

_CLAIM_FAMILIES = {
    "bernoulli": lambda c: Bernoulli(float(c["p"])),
    "finite_int": lambda c: FiniteIntPmf(dict(c["weights"])),
    "lattice": lambda c: FiniteLatticePmf(dict(c["weights"])),
    "rademacher": lambda c: rademacher(_as_fraction(c.get("scale", 1))),
    "constant": lambda c: point_claim(_as_fraction(c["value"])),
}

_CLAIM_KEYS = {
    "bernoulli": {"p"},
    "finite_int": {"weights"},
    "lattice": {"weights"},
    "rademacher": {"scale"},
    "constant": {"value"},
}


def _check_keys(cfg: Mapping, allowed: set, what: str):
    extra = set(cfg) - allowed - {"family"}
    if extra:
        raise LawError(f"unknown {what} keys: {sorted(extra)}")


def count_from_config(cfg: Mapping) -> CountLaw:
    """Build a count law from ``{"family": ..., <parameters>}``.

    Families and their keys: ``poisson`` (lambda), ``binomial`` (n, p),
    ``gamma_mixed_poisson`` / ``negative_binomial`` (r, p),
    ``hypergeometric`` (population, successes, draws), ``finite`` (weights).
    """
    fam = cfg.get("family")
    if fam not in _COUNT_FAMILIES:
        raise LawError(f"unknown count family {fam!r}; expected one of {sorted(_COUNT_FAMILIES)}")
    _check_keys(cfg, _COUNT_KEYS[fam], "count")
    try:
        return _COUNT_FAMILIES[fam](cfg)
    except KeyError as exc:
        raise LawError(f"count family {fam!r} is missing parameter {exc}") from None


def claim_from_config(cfg: Mapping) -> ClaimLaw:
    """Build a claim law from ``{"family": ..., <parameters>}``.

    Families and their keys: ``bernoulli`` (p), ``finite_int`` (weights),
    ``lattice`` (weights; keys may be integers, decimals or ``"a/b"``),
    ``rademacher`` (optional scale), ``constant`` (value).
    """
    fam = cfg.get("family")
    if fam not in _CLAIM_FAMILIES:
        raise LawError(f"unknown claim family {fam!r}; expected one of {sorted(_CLAIM_FAMILIES)}")
    _check_keys(cfg, _CLAIM_KEYS[fam], "claim")
    try:
        return _CLAIM_FAMILIES[fam](cfg)
    except KeyError as exc:
        raise LawError(f"claim family {fam!r} is missing parameter {exc}") from None
