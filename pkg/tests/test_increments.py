import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from incfilter.errors import PathTooShort, TauNotOnGrid
from incfilter.increments import IncrementSpec, apply_increment, increment_coefficients, step_composition


@given(st.integers(1, 8))
def test_coefficients_sum_to_zero_and_are_binomial(n):
    c = increment_coefficients(IncrementSpec(n, 1.0))
    assert c.sum() == 0
    assert np.abs(c).sum() == 2 ** n
    assert c[0] == 1 and c[-1] == (-1) ** n


@given(st.integers(1, 4), st.integers(1, 4))
def test_composition_coefficients_sum(n, k):
    A = step_composition(IncrementSpec(n, 1.0), k)
    assert A.sum() == k ** n
    assert len(A) == n * (k - 1) + 1
    assert np.array_equal(A, A[::-1])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.integers(1, 4))
def test_annihilates_low_degree_polynomials(n, coeffs, shift):
    coeffs = coeffs[:n]
    dt = 0.1
    t = np.arange(200) * dt
    y = np.polyval(coeffs[::-1], t)
    out = apply_increment(y, IncrementSpec(n, shift * dt), dt)
    assert np.max(np.abs(out)) < 1e-10 * max(1.0, np.max(np.abs(y)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_step_composition_identity(n, k, seed):
    dt = 0.05
    x = np.random.default_rng(seed).standard_normal(300)
    spec = IncrementSpec(n, dt)
    big = apply_increment(x, IncrementSpec(n, k * dt), dt)
    small = apply_increment(x, spec, dt)
    A = step_composition(spec, k)
    # big[i] <-> x[i + n k]; small[j] <-> x[j + n]
    m = big.size
    off = n * k - n
    comb = sum(a * small[off - l: off - l + m] for l, a in enumerate(A))
    assert np.max(np.abs(comb - big)) < 1e-10


def test_errors():
    with pytest.raises(ValueError):
        IncrementSpec(0, 1.0)
    with pytest.raises(ValueError):
        IncrementSpec(1, -1.0)
    with pytest.raises(TauNotOnGrid):
        apply_increment(np.zeros(10), IncrementSpec(1, 0.15), 0.1)
    with pytest.raises(PathTooShort):
        apply_increment(np.zeros(3), IncrementSpec(2, 0.2), 0.1)
