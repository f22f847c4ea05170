import os
import subprocess
import sys

import numpy as np
import pytest

from randsum import _kernels
from randsum._kernels import _fallback

try:
    from randsum._kernels import _core
except ImportError:  # extension not built
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def _case(seed, size=5000):
    rng = np.random.default_rng(seed)
    atoms = np.array([-1.5, 0.0, 0.5, 2.0])
    cdf = np.cumsum([0.2, 0.3, 0.4, 0.1])
    cdf[-1] = 1.0
    counts = rng.poisson(6, size)
    n = rng.poisson(6, size)
    m = rng.poisson(6, size)
    b = rng.random(size) < 0.4
    draws = _fallback.gap_draws(n, m, b)
    return {
        "compound_sums": (counts, cdf, atoms, rng.random(int(counts.sum()))),
        "coupled_gaps": (n, m, b, cdf, atoms, rng.random(int(draws.sum()))),
        "cdf_l1": (np.arange(50.0), rng.dirichlet(np.ones(50)), np.arange(0.0, 60.0, 1.5), rng.dirichlet(np.ones(40))),
        "normal_l1": (np.sort(rng.standard_normal(size)), np.arange(1, size + 1) / size),
    }


@needs_core
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sampling_kernels_bit_identical(seed):
    case = _case(seed)
    for name in ("compound_sums", "coupled_gaps"):
        np.testing.assert_array_equal(getattr(_core, name)(*case[name]), getattr(_fallback, name)(*case[name]))


@needs_core
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_integral_kernels_agree(seed):
    case = _case(seed)
    for name in ("cdf_l1", "normal_l1"):
        assert getattr(_core, name)(*case[name]) == pytest.approx(getattr(_fallback, name)(*case[name]), rel=1e-12)


def test_compound_sums_by_hand():
    atoms = np.array([1.0, 10.0])
    cdf = np.array([0.5, 1.0])
    # counts 2 and 1 consume three uniforms: 0.1 -> 1, 0.9 -> 10, 0.3 -> 1
    out = _fallback.compound_sums(np.array([2, 1]), cdf, atoms, np.array([0.1, 0.9, 0.3]))
    np.testing.assert_array_equal(out, [11.0, 1.0])


def test_cdf_l1_point_masses():
    assert _fallback.cdf_l1(np.array([0.0]), np.array([1.0]), np.array([3.0]), np.array([1.0])) == pytest.approx(3.0)


def test_backend_is_named():
    assert _kernels.BACKEND in ("compiled", "python")


def test_pure_python_switch():
    env = dict(os.environ, RANDSUM_PURE_PYTHON="1")
    code = "import randsum; print(randsum.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
