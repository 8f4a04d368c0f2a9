"""The compiled kernels and the NumPy fallback must agree bit-for-bit-ish."""
import numpy as np
import pytest

from relaysim.kernels import _pure

try:
    from relaysim.kernels import _speed
except ImportError:
    _speed = None

needs_ext = pytest.mark.skipif(_speed is None, reason="compiled core not built")


@needs_ext
def test_cis_matches(rng):
    theta = rng.standard_normal(512) * 10
    assert np.allclose(_speed.cis(theta), _pure.cis(theta), atol=1e-15)


@needs_ext
def test_upa_phases_matches(rng):
    alpha = rng.standard_normal(9)
    beta = rng.standard_normal(9)
    a = _speed.upa_phases(alpha, beta, 4, 3)
    b = _pure.upa_phases(alpha, beta, 4, 3)
    assert a.shape == (12, 9)
    assert np.allclose(a, b, atol=1e-14)


@needs_ext
def test_cascade_response_matches(rng):
    L = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    a_rd, b_rd = rng.standard_normal(6), rng.standard_normal(6) * 1e-8
    a_sr, b_sr = rng.standard_normal(5), rng.standard_normal(5) * 1e-8
    freqs = np.linspace(-5e7, 5e7, 50)
    out = _speed.cascade_response(L, a_rd, b_rd, a_sr, b_sr, freqs)
    ref = _pure.cascade_response(L, a_rd, b_rd, a_sr, b_sr, freqs)
    assert np.allclose(out, ref, rtol=1e-12)


@needs_ext
def test_direct_response_matches(rng):
    L = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    a, b = rng.standard_normal(7), rng.standard_normal(7) * 1e-8
    freqs = np.linspace(-5e7, 5e7, 50)
    assert np.allclose(_speed.direct_response(L, a, b, freqs),
                       _pure.direct_response(L, a, b, freqs), rtol=1e-12)


def test_pure_cis_is_unit_modulus(rng):
    theta = rng.standard_normal(100)
    assert np.allclose(np.abs(_pure.cis(theta)), 1.0)


def test_backend_selected():
    import relaysim.kernels as k
    assert k.BACKEND in ("cython", "pure")
