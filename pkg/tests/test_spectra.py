from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from incfilter.errors import NonIntegrableWeight
from incfilter.increments import IncrementSpec
from incfilter.spectra import (DensityModel, ObservationModel, WeightFunction, check_minimality,
                               filon_transform, functional_transform, tau_weight, tau_weight_conditions)

from conftest import F, G


def _numeric_transform(w, lam, end):
    re = integrate.quad(lambda t: float(w(t)) * np.cos(lam * t), 0, end, limit=400)[0]
    im = integrate.quad(lambda t: -float(w(t)) * np.sin(lam * t), 0, end, limit=400)[0]
    return re + 1j * im


@pytest.mark.parametrize("w, end", [
    (WeightFunction.exponential(1.0), 60.0),
    (WeightFunction.exppoly([(0.5, [1.0, 2.0])]), 120.0),
    (WeightFunction.exponential(2.0, horizon=1.5), 1.5),
    (WeightFunction.indicator(1.0), 1.0),
    (WeightFunction.piecewise([0.0, 1.0, 2.0], [[1.0, 1.0], [3.0, -1.0]]), 2.0),
])
@pytest.mark.parametrize("lam", [0.0, 0.7, 3.0])
def test_functional_transform_matches_quadrature(w, end, lam):
    assert abs(functional_transform(w, np.array([lam]))[0] - _numeric_transform(w, lam, end)) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 50), st.floats(-2, 2), st.floats(-2, 2))
def test_filon_exact_for_linear_pieces(lam, a, b):
    t = np.array([0.0, 0.3, 1.0])
    y = np.array([a, b, a + b])
    w = WeightFunction.piecewise([0.0, 0.3, 1.0], [[a, (b - a) / 0.3], [b - (a) / 0.7 * 0.3, a / 0.7]])
    exact = np.conj(functional_transform(w, np.array([lam]))[0])
    assert abs(filon_transform(t, y, np.array([lam]))[0] - exact) < 1e-10


def test_density_models():
    lam = np.linspace(-5, 5, 11)
    assert np.allclose(F(lam), 1 / (1 + lam ** 2) ** 2)
    assert F.decay == 4 and G.decay == 2 and F.integrable
    tab = DensityModel.tabulated([0, 1, 2], [1.0, 0.5, 0.2], decay=2.0)
    assert tab(3.0) == pytest.approx(0.2 * (2 / 3) ** 2)
    assert tab(-1.0) == pytest.approx(0.5)
    assert DensityModel.from_dict(tab.to_dict()) == tab
    assert DensityModel.from_dict(F.to_dict()) == F
    with pytest.raises(ValueError):
        DensityModel.rational([1.0, 0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        DensityModel.rational([-1.0], [1.0, 1.0])


def test_weight_round_trip_and_truncation():
    w = WeightFunction.exppoly([(1.0, [1.0]), (2.0, [-2.0])])
    assert WeightFunction.from_dict(w.to_dict()) == w
    wt = w.truncated(2.0)
    assert wt.finite and wt(np.array([1.0]))[0] == pytest.approx(w(np.array([1.0]))[0])
    assert wt(np.array([2.5]))[0] == 0.0
    with pytest.raises(NonIntegrableWeight):
        WeightFunction.exppoly([(0.0, [1.0])])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tau_weight_definition(n):
    w = WeightFunction.exponential(1.0)
    spec = IncrementSpec(n, 0.5)
    tw = tau_weight(w, spec)
    t = np.linspace(0.0, 4.0, 9)
    direct = sum((-1) ** l * comb(n, l) * w(t + l * 0.5) for l in range(n + 1))
    assert np.allclose(tw(t), direct)
    i1, i2 = tau_weight_conditions(tw)
    assert np.isfinite(i1) and np.isfinite(i2) and i1 > 0


def test_minimality_passes_for_suite_model():
    rep = check_minimality(ObservationModel(F, G, IncrementSpec(1, 1.0)))
    assert rep.passed and np.isfinite(rep.first) and np.isfinite(rep.second)


def test_minimality_flags_common_zero():
    # f has a double zero at lam = 1 and there is no noise to fill it
    f = DensityModel.rational([1.0, -2.0, 1.0], [1.0, 4.0, 6.0, 4.0, 1.0])
    rep = check_minimality(ObservationModel(f, DensityModel.zero(), IncrementSpec(1, 1.0)))
    assert not rep.passed
    assert any(abs(z - 1.0) < 1e-3 for _, z, _ in rep.failures)
