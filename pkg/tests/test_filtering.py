import numpy as np
import pytest

from incfilter.errors import DegenerateDensity
from incfilter.filtering import solve_filter, spectral_characteristic_printed
from incfilter.increments import IncrementSpec
from incfilter.kernels import GridConfig
from incfilter.solver import orthogonality_residual
from incfilter.spectra import DensityModel, ObservationModel, WeightFunction

from conftest import F, G


@pytest.mark.parametrize("n, tau", [(1, 1.0), (2, 0.5), (3, 1.0)])
def test_routes_agree(n, tau):
    model = ObservationModel(F, G, IncrementSpec(n, tau))
    fs = solve_filter(model, WeightFunction.exponential(1.0))
    assert fs.route_gap < 1e-2
    assert fs.mse > 0


def test_error_is_tau_independent():
    w = WeightFunction.exponential(1.0)
    vals = [solve_filter(ObservationModel(F, G, IncrementSpec(1, tau)), w).mse_spectral for tau in (0.5, 1.0, 2.0)]
    assert np.ptp(vals) < 1e-3 * vals[0]


def test_printed_and_cancelled_characteristic_agree(model1):
    w = WeightFunction.exponential(1.0)
    fs = solve_filter(model1, w)
    lam = np.array([0.3, 1.7, 4.0, 9.5])
    assert np.allclose(fs.h(lam), spectral_characteristic_printed(model1, w, fs.op_solution, lam), atol=1e-10)


def test_no_noise_means_no_error():
    model = ObservationModel(F, DensityModel.zero(), IncrementSpec(2, 1.0))
    fs = solve_filter(model, WeightFunction.indicator(1.0))
    assert abs(fs.mse) < 1e-8 and abs(fs.mse_spectral) < 1e-8
    assert np.max(np.abs(fs.h(np.linspace(0, 30, 301)))) < 1e-8


def test_finite_horizon_converges_to_infinite(model1):
    w = WeightFunction.exponential(1.0)
    full = solve_filter(model1, w).mse
    gaps = [abs(solve_filter(model1, w.truncated(T)).mse - full) for T in (1.0, 3.0, 8.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3 * full


def test_orthogonality_residual_small(model2):
    fs = solve_filter(model2, WeightFunction.exponential(1.0))
    orth = orthogonality_residual(fs.op_solution)
    assert max(abs(v) for v in orth["values"]) <= 1e-4 * orth["scale"]


def test_grid_refinement_is_stable(model1):
    w = WeightFunction.indicator(1.0)
    a = solve_filter(model1, w, GridConfig(scale=1.0)).mse
    b = solve_filter(model1, w, GridConfig(scale=2.0)).mse
    assert abs(a - b) < 1e-3 * a


def test_degenerate_pair_rejected():
    model = ObservationModel(DensityModel.zero(), DensityModel.zero(), IncrementSpec(1, 1.0))
    with pytest.raises((DegenerateDensity, ValueError)):
        solve_filter(model, WeightFunction.exponential(1.0))
