import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import KERNEL_CASES
from jobperf.errors import DimensionMismatch
from jobperf.svr import Kernel, kernel_eval
from oracles import gram as oracle_gram


def test_linear_dot_product():
    assert kernel_eval(Kernel.linear(2), [1, 2], [3, 4]) == 11.0


def test_polynomial_scaled():
    assert kernel_eval(Kernel.polynomial(2, 2), [1, 2], [3, 4]) == pytest.approx(30.25)


def test_gaussian_identity_and_value():
    k = Kernel.gaussian(2)
    assert kernel_eval(k, [0.3, -1.2], [0.3, -1.2]) == 1.0
    assert kernel_eval(k, [1, 2], [3, 4]) == pytest.approx(math.exp(-4.0), rel=1e-12)
    assert kernel_eval(k, [1, 2], [3, 4]) == pytest.approx(0.0183156, abs=1e-7)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        kernel_eval(Kernel.linear(2), [1, 2, 3], [1, 2, 3])
    with pytest.raises(DimensionMismatch):
        Kernel.linear(3).gram(np.ones((2, 3)), np.ones((2, 2)))


@pytest.mark.parametrize("bad", [("sigmoid", 2, None), ("polynomial", 2, None),
                                 ("polynomial", 2, 0), ("linear", 0, None), ("gaussian", 2, 3)])
def test_invalid_kernels(bad):
    with pytest.raises(ValueError):
        Kernel(*bad)


@pytest.mark.parametrize("kind, degree", KERNEL_CASES)
def test_gram_matches_loop_oracle(kind, degree):
    rng = np.random.default_rng(1)
    A, B = rng.normal(size=(6, 3)), rng.normal(size=(4, 3))
    k = Kernel(kind, 3, degree)
    np.testing.assert_allclose(k.gram(A, B), oracle_gram(kind, A, B, degree), rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(case=st.sampled_from(KERNEL_CASES),
       A=arrays(np.float64, st.tuples(st.integers(1, 8), st.just(3)),
                elements=st.floats(-3, 3, allow_nan=False)))
def test_gram_symmetric_psd(case, A):
    kind, degree = case
    K = Kernel(kind, 3, degree).gram(A, A)
    np.testing.assert_allclose(K, K.T, atol=1e-12)
    scale = max(1.0, np.abs(K).max())
    assert np.linalg.eigvalsh((K + K.T) / 2).min() >= -1e-9 * scale * len(A)


def test_round_trip():
    for kind, degree in KERNEL_CASES:
        k = Kernel(kind, 4, degree)
        assert Kernel.from_dict(k.to_dict()) == k
