import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from incfilter.quadrature import FrequencyGrid, fourier_cos, fourier_sin, trapezoid_weights, uniform_panels


@pytest.mark.parametrize("grid", [FrequencyGrid.build(), FrequencyGrid.for_problem(2, 0.5, basis=(26, 1.0))])
def test_half_line_integrals(grid):
    lam = grid.nodes
    assert grid.weights @ (1 / (1 + lam ** 2)) == pytest.approx(np.pi / 2, rel=1e-8)
    assert grid.weights @ (1 / (1 + lam ** 2) ** 2) == pytest.approx(np.pi / 4, rel=1e-8)
    assert grid.full_line(1 / (1 + lam ** 2)) == pytest.approx(0.5, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 8.0))
def test_fourier_transforms_of_lorentzian(u):
    # int_0^inf cos(lam u)/(1+lam^2) = pi/2 e^-u
    assert fourier_cos(lambda x: 1 / (1 + x ** 2), u) == pytest.approx(np.pi / 2 * np.exp(-u), abs=1e-9)
    # int_0^inf lam sin(lam u)/(1+lam^2)^2 = pi/4 u e^-u
    val = fourier_sin(lambda x: x / (1 + x ** 2) ** 2, u)
    assert val == pytest.approx(np.pi / 4 * u * np.exp(-u), abs=1e-9)
    assert fourier_sin(lambda x: x / (1 + x ** 2) ** 2, -u) == pytest.approx(-val)


def test_uniform_panels_and_trapezoid():
    nodes, w = uniform_panels(50.0, 20.0)
    assert w @ np.cos(nodes * 20.0) == pytest.approx(np.sin(1000.0) / 20.0, abs=1e-10)
    t = np.array([0.0, 0.5, 2.0])
    assert trapezoid_weights(t) @ (3 * t + 1) == pytest.approx(8.0)
