"""Pure numpy versions of the hot kernels.

``compound_sums`` and ``coupled_gaps`` add their terms in the same order as
the compiled versions, so both backends return bit-identical results for the
same uniforms.  The two integral kernels agree to rounding.
"""

import numpy as np
from scipy.special import ndtr, ndtri

_INV_SQRT_2PI = 0.3989422804014327


def _lookup(cdf, atoms, u):
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, cdf.size - 1, out=idx)
    return atoms[idx]


def compound_sums(counts, cdf, atoms, u):
    counts = np.asarray(counts, dtype=np.int64)
    if u.size != counts.sum():
        raise ValueError("need exactly one uniform per claim draw")
    vals = _lookup(cdf, atoms, u)
    seg = np.repeat(np.arange(counts.size), counts)
    return np.bincount(seg, weights=vals, minlength=counts.size)


def gap_draws(n, m, b):
    """Claims consumed per coupled-gap sample."""
    n = np.asarray(n, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    b = np.asarray(b, dtype=bool)
    return np.where(b, np.maximum(m, 1), np.abs(m - n))


def coupled_gaps(n, m, b, cdf, atoms, u):
    n = np.asarray(n, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    b = np.asarray(b, dtype=bool)
    k = gap_draws(n, m, b)
    if u.size != k.sum():
        raise ValueError("need exactly one uniform per claim draw")
    vals = _lookup(cdf, atoms, u)
    seg = np.repeat(np.arange(k.size), k)
    starts = np.cumsum(k) - k
    pos = np.arange(u.size) - np.repeat(starts, k)
    first = np.where(m >= 1, n - 1, n).astype(float)
    coef = np.where(b[seg], np.where(pos == 0, first[seg], -1.0), 1.0)
    return np.abs(np.bincount(seg, weights=coef * vals, minlength=k.size))


def cdf_l1(xa, pa, xb, pb):
    xa, pa, xb, pb = (np.asarray(v, dtype=float) for v in (xa, pa, xb, pb))
    x = np.union1d(xa, xb)
    if x.size < 2:
        return 0.0
    ca = np.concatenate(([0.0], np.cumsum(pa)))
    cb = np.concatenate(([0.0], np.cumsum(pb)))
    fa = ca[np.searchsorted(xa, x, side="right")]
    fb = cb[np.searchsorted(xb, x, side="right")]
    return float(np.sum(np.diff(x) * np.abs(fa - fb)[:-1]))


def _G(x):
    # antiderivative of the standard normal cdf
    return x * ndtr(x) + _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def normal_l1(z, F):
    """Integral over the real line of ``|F(x) - Phi(x)|`` for a step cdf.

    ``F[i]`` is the cdf value on ``[z[i], z[i+1])``; the last step must reach 1.
    """
    z = np.asarray(z, dtype=float)
    F = np.asarray(F, dtype=float)
    if z.size == 0:
        raise ValueError("empty support")
    left = _G(z[0])
    right = _INV_SQRT_2PI * np.exp(-0.5 * z[-1] ** 2) - z[-1] * ndtr(-z[-1])
    if z.size == 1:
        return float(left + right)
    a, b, c = z[:-1], z[1:], F[:-1]
    Ga, Gb = _G(a), _G(b)
    below = ndtr(b) <= c
    above = ndtr(a) >= c
    cross = ~(below | above)
    out = np.where(below, c * (b - a) - (Gb - Ga), (Gb - Ga) - c * (b - a))
    if np.any(cross):
        ac, bc, cc = a[cross], b[cross], c[cross]
        xs = ndtri(cc)
        Gx = _G(xs)
        out[cross] = (cc * (xs - ac) - (Gx - Ga[cross])) + ((Gb[cross] - Gx) - cc * (bc - xs))
    return float(left + np.sum(out) + right)
