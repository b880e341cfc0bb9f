import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from borda_ae import _fallback
from borda_ae.kernels import KernelInputError, KernelSpec, eval_kernel, gram_matrix

try:
    from borda_ae import _native
except ImportError:  # pragma: no cover
    _native = None

FAMILIES = ["squared-exponential", "matern-5/2", "linear"]
unit = st.floats(0.0, 1.0, allow_nan=False)


def test_se_at_zero_distance_is_signal_variance(backend):
    spec = KernelSpec("squared-exponential", (0.7, 0.2), 2.5)
    assert eval_kernel(spec, [0.3, 0.9], [0.3, 0.9]) == 2.5


def test_se_unit_distance(backend):
    spec = KernelSpec("squared-exponential", (1.0, 1.0), 1.0)
    assert eval_kernel(spec, [0.0, 0.0], [0.6, 0.8]) == pytest.approx(np.exp(-0.5), abs=1e-15)
    assert np.exp(-0.5) == pytest.approx(0.60653, abs=1e-5)


def test_linear_is_dot_product(backend):
    spec = KernelSpec("linear", (1.0, 1.0), 1.0)
    assert eval_kernel(spec, [1, 2], [3, 4]) == 11.0


def test_matern_closed_form(backend):
    spec = KernelSpec("matern-5/2", (0.5,), 1.3)
    r = 0.4 / 0.5
    expected = 1.3 * (1 + np.sqrt(5) * r + 5 * r * r / 3) * np.exp(-np.sqrt(5) * r)
    assert eval_kernel(spec, [0.1], [0.5]) == pytest.approx(expected, rel=1e-14)
    assert eval_kernel(spec, [0.2], [0.2]) == 1.3


@pytest.mark.parametrize("u,v", [([0.1], [0.1, 0.2]), ([0.1, 0.2, 0.3], [0.1, 0.2, 0.3])])
def test_dimension_mismatch_rejected(u, v):
    with pytest.raises(KernelInputError):
        eval_kernel(KernelSpec("squared-exponential", (1.0, 1.0)), u, v)


@pytest.mark.parametrize("kwargs", [
    dict(lengthscales=(0.0,)), dict(lengthscales=(-1.0,)), dict(lengthscales=()),
    dict(signal_variance=0.0), dict(jitter=-1e-3), dict(family="cubic"),
])
def test_invalid_spec_rejected(kwargs):
    with pytest.raises(KernelInputError):
        KernelSpec(**kwargs)


def test_default_jitter_scales_with_signal_variance():
    assert KernelSpec("squared-exponential", (1.0,), 4.0).jitter == pytest.approx(4e-6)


def test_gram_single_point(backend):
    spec = KernelSpec("squared-exponential", (0.3,), 1.0, 1e-6)
    M = gram_matrix(spec, [[0.42]])
    assert M.shape == (1, 1)
    assert M[0, 0] == 1.0 + 1e-6


@pytest.mark.parametrize("family", FAMILIES)
def test_gram_symmetric_and_psd(family, rng, backend):
    spec = KernelSpec.isotropic(family, 0.3, 2)
    pts = rng.random((5, 2))
    M = gram_matrix(spec, pts)
    assert M[0, 1] == M[1, 0]
    assert np.array_equal(M, M.T)
    assert np.linalg.eigvalsh(M).min() >= -1e-8


def test_gram_rejects_empty_and_mismatch():
    spec = KernelSpec.isotropic("squared-exponential", 0.3, 2)
    with pytest.raises(KernelInputError):
        gram_matrix(spec, np.zeros((0, 2)))
    with pytest.raises(KernelInputError):
        gram_matrix(spec, np.zeros((3, 3)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FAMILIES), arrays(np.float64, (2, 3), elements=unit))
def test_symmetry_property(family, uv):
    spec = KernelSpec(family, (0.3, 0.5, 0.9), 1.7)
    assert eval_kernel(spec, uv[0], uv[1]) == eval_kernel(spec, uv[1], uv[0])


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(1, 32), st.integers(0, 2**31 - 1))
def test_psd_property(family, n, seed):
    pts = np.random.default_rng(seed).random((n, 3))
    spec = KernelSpec(family, (0.2, 0.4, 1.0), 1.0, 1e-6)
    assert np.linalg.eigvalsh(gram_matrix(spec, pts)).min() >= -1e-8


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FAMILIES[:2]), arrays(np.float64, (2, 2), elements=unit),
       st.integers(0, 1), st.floats(0.1, 10.0))
def test_ard_scaling_invariance(family, uv, axis, c):
    spec = KernelSpec(family, (0.3, 0.6), 1.0)
    ls = list(spec.lengthscales)
    ls[axis] *= c
    scaled = KernelSpec(family, tuple(ls), 1.0)
    u, v = uv[0].copy(), uv[1].copy()
    u[axis] *= c
    v[axis] *= c
    assert abs(eval_kernel(scaled, u, v) - eval_kernel(spec, uv[0], uv[1])) <= 1e-12


@pytest.mark.skipif(_native is None, reason="compiled core not built")
@pytest.mark.parametrize("kind", [0, 1, 2])
def test_backends_agree_on_cross_kernel(kind, rng):
    X, Y = rng.random((40, 3)), rng.random((70, 3))
    inv = 1.0 / np.array([0.2, 0.5, 0.9])
    a = _fallback.cross_kernel(kind, X, Y, inv, 1.4)
    b = _native.cross_kernel(kind, X, Y, inv, 1.4)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.skipif(_native is None, reason="compiled core not built")
def test_backends_agree_on_reductions(rng):
    mean, std = rng.random((13, 17)), rng.random((13, 17))
    wa, ba = _fallback.context_widths(mean, std, 2.3)
    wb, bb = _native.context_widths(mean, std, 2.3)
    assert np.array_equal(wa, wb) and np.array_equal(ba, bb)
    va = np.full((13, 17), -np.inf)
    vb = va.copy()
    for beta in (3.0, 1.0, 2.0):
        _fallback.envelope_absorb(va, mean, std, beta)
        _native.envelope_absorb(vb, mean, std, beta)
    assert np.array_equal(va, vb)
