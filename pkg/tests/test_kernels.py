import os
import subprocess
import sys

import numpy as np
import pytest

from meanlab import _kernels_py, kernels
from meanlab import scalar_means as sm

from conftest import mp_weighted_log_mean

IMPLS = [_kernels_py]
if kernels.compiled_available():
    from meanlab import _kernels
    IMPLS.append(_kernels)

ids = [m.__name__.rsplit(".", 1)[-1] for m in IMPLS]


def sample(rng, n=4000):
    a = np.exp(rng.uniform(-14, 14, n))
    b = np.exp(rng.uniform(-14, 14, n))
    b[:200] = a[:200] * (1 + rng.uniform(-1e-9, 1e-9, 200))
    b[200:220] = a[200:220]
    v = rng.uniform(0, 1, n)
    v[300:320] = 0.0
    v[320:340] = 1.0
    v[340:360] = 1e-13
    return a, b, v


SCALAR = {
    "weighted_arithmetic": lambda a, b, v: sm.arithmetic_k(a, b, v),
    "weighted_geometric": lambda a, b, v: sm.geometric_k(a, b, v),
    "weighted_harmonic": lambda a, b, v: sm.harmonic_k(a, b, v),
    "weighted_log_mean": lambda a, b, v: sm.weighted_log_mean_k(a, b, v),
    "heinz": lambda a, b, v: sm.heinz_k(a, b, v),
}
SCALAR2 = {
    "log_ratio": sm.log_ratio_k,
    "log_mean": sm.log_mean_k,
    "power_mean_third": sm.power_mean_third_k,
    "identric": sm.identric_k,
    "contraharmonic": sm.contraharmonic_k,
}


class TestKernelAgreement:
    @pytest.mark.parametrize("impl", IMPLS, ids=ids)
    @pytest.mark.parametrize("name", sorted(SCALAR))
    def test_weighted_vs_scalar(self, impl, name, rng):
        a, b, v = sample(rng)
        got = getattr(kernels, name)(a, b, v, impl)
        want = np.array([SCALAR[name](x, y, z) for x, y, z in zip(a, b, v)])
        np.testing.assert_allclose(got, want, rtol=1e-14)

    @pytest.mark.parametrize("impl", IMPLS, ids=ids)
    @pytest.mark.parametrize("name", sorted(SCALAR2))
    def test_unweighted_vs_scalar(self, impl, name, rng):
        a, b, _ = sample(rng)
        got = getattr(kernels, name)(a, b, impl)
        want = np.array([SCALAR2[name](x, y) for x, y in zip(a, b)])
        np.testing.assert_allclose(got, want, rtol=1e-14, atol=0 if name != "log_ratio" else 1e-300)

    @pytest.mark.parametrize("impl", IMPLS, ids=ids)
    def test_r_log(self, impl, rng):
        x = np.exp(rng.uniform(-5, 5, 500))
        r = rng.uniform(-2, 2, 500)
        r[:10] = 0.0
        got = kernels.r_log(x, r, impl)
        want = np.array([sm.r_log_k(p, q) for p, q in zip(x, r)])
        np.testing.assert_allclose(got, want, rtol=1e-14)

    @pytest.mark.parametrize("impl", IMPLS, ids=ids)
    def test_weighted_log_mean_vs_mp(self, impl, rng):
        a, b, v = sample(rng, 300)
        got = kernels.weighted_log_mean(a, b, v, impl)
        want = np.array([float(mp_weighted_log_mean(x, y, z)) for x, y, z in zip(a, b, v)])
        np.testing.assert_allclose(got, want, rtol=2e-14)

    def test_broadcasting(self):
        out = kernels.weighted_arithmetic(np.array([[1.0], [3.0]]), 2.0, np.array([0.0, 0.5, 1.0]))
        np.testing.assert_allclose(out, [[1.0, 1.5, 2.0], [3.0, 2.5, 2.0]])


class TestSelection:
    def test_backend_name(self):
        assert kernels.BACKEND in ("cython", "python")
        forced = os.environ.get("MEANLAB_PURE_PYTHON", "") not in ("", "0")
        assert (kernels.BACKEND == "cython") == (kernels.compiled_available() and not forced)

    def test_forced_fallback(self):
        env = dict(os.environ, MEANLAB_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", "from meanlab import kernels; print(kernels.BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"
