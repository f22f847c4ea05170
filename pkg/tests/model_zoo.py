"""Randomized small lattice models shared by the identity and acceptance tests."""

import numpy as np

from randsum.laws import Bernoulli, Binomial, FiniteCount, FiniteIntPmf, FiniteLatticePmf, Poisson
from randsum.model import RandomSumModel

RHOS = (0.0, 0.3, 0.7, 1.0)


def random_count(rng, poisson_only=False):
    kind = 0 if poisson_only else int(rng.integers(3))
    if kind == 0:
        return Poisson(float(rng.uniform(0.2, 5.0)))
    if kind == 1:
        return Binomial(int(rng.integers(1, 11)), float(rng.uniform(0.05, 0.95)))
    support = rng.choice(9, size=int(rng.integers(2, 5)), replace=False)
    return FiniteCount(dict(zip(support.tolist(), rng.dirichlet(np.ones(support.size)).tolist())))


def random_int_claim(rng):
    if rng.random() < 0.3:
        return Bernoulli(float(rng.uniform(0.05, 0.95)))
    support = rng.choice(6, size=int(rng.integers(2, 6)), replace=False)
    support[0] = max(support[0], 1)  # keep a positive atom
    support = np.unique(support)
    return FiniteIntPmf(dict(zip(support.tolist(), rng.dirichlet(np.ones(support.size)).tolist())))


def random_centred_claim(rng):
    # two negative and one or two positive atoms with probabilities that cancel the mean
    neg = -rng.choice(np.arange(1, 4), size=2, replace=False)
    pos = rng.choice(np.arange(1, 4), size=int(rng.integers(1, 3)), replace=False)
    wn = rng.dirichlet(np.ones(2)) * 0.5
    wp = rng.dirichlet(np.ones(pos.size))
    # scale the positive side so that sum w x = 0, then normalise
    wp *= -float(wn @ neg) / float(wp @ pos)
    atoms = np.concatenate([neg, pos]).tolist()
    w = np.concatenate([wn, wp])
    w /= w.sum()
    return FiniteLatticePmf(dict(zip(atoms, w.tolist())))


def random_models(n, seed, claims="int", poisson_only=False):
    rng = np.random.default_rng(seed)
    make = random_centred_claim if claims == "centred" else random_int_claim
    return [
        RandomSumModel(random_count(rng, poisson_only), make(rng), RHOS[i % len(RHOS)]) for i in range(n)
    ]
