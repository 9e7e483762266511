"""Agreement between the compiled kernels and the numpy fallback."""

import numpy as np
import pytest

from photonpair._kernels import BACKEND, fallback

try:
    from photonpair._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled kernels not built")


def random_coefs(rng, m):
    c = rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1)
    c[0] = c[0].real
    return np.ascontiguousarray(c / (1 + np.arange(m + 1)) ** 2)


@needs_core
class TestCombAmplitude:
    def test_matches_fallback(self, rng):
        tau = np.ascontiguousarray(rng.uniform(-1e-6, 1e-6, 512))
        coefs = random_coefs(rng, 800)
        a = _core.comb_amplitude(tau, coefs, 120.8e6)
        b = fallback.comb_amplitude(tau, coefs, 120.8e6)
        scale = np.abs(a).max()
        assert np.allclose(a, b, atol=1e-9 * scale, rtol=1e-9)

    def test_single_coefficient(self, rng):
        tau = np.ascontiguousarray(rng.uniform(-1e-6, 1e-6, 16))
        coefs = np.array([2.5 + 0j])
        assert np.allclose(_core.comb_amplitude(tau, coefs, 1e8), 2.5)
        assert np.allclose(fallback.comb_amplitude(tau, coefs, 1e8), 2.5)


@needs_core
class TestCorrelateKernel:
    @pytest.mark.parametrize("n", [0, 1, 10, 1000, 20000])
    def test_bit_identical(self, rng, n):
        s = np.sort(rng.integers(0, 2_000_000, n)).astype(np.int64)
        i = np.sort(rng.integers(0, 2_000_000, n)).astype(np.int64)
        args = (1.001e-10, 8.2e-9, 1e-6, 243)
        a = _core.correlate_ticks(s, i, *args)
        b = fallback.correlate_ticks(s, i, *args)
        assert np.array_equal(a, b)

    def test_dense_coincidences(self, rng):
        # many tags inside one window: exercises the inner scan loop
        s = np.sort(rng.integers(0, 20_000, 3000)).astype(np.int64)
        i = np.sort(rng.integers(0, 20_000, 3000)).astype(np.int64)
        args = (1.001e-10, 2e-7, 2e-6, 20)
        assert np.array_equal(_core.correlate_ticks(s, i, *args),
                              fallback.correlate_ticks(s, i, *args))


def test_backend_reports_something():
    assert BACKEND in ("compiled", "python")


def test_pure_env_var_selects_fallback():
    import os
    import subprocess
    import sys
    out = subprocess.run(
        [sys.executable, "-c", "import photonpair; print(photonpair.BACKEND)"],
        capture_output=True, text=True,
        env={**os.environ, "PHOTONPAIR_PURE": "1"})
    assert out.stdout.strip() == "python"
