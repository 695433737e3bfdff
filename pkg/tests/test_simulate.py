import dataclasses

import numpy as np
import pytest

from incfilter.errors import IllConditionedGram
from incfilter.filtering import solve_filter
from incfilter.simulate import (SynthesisPlan, brute_force_projection, empirical_filter_mse, standard_suite,
                                structural_function, synthesize_increment_paths)
from incfilter.spectra import WeightFunction


def test_standard_suite_shape():
    suite = standard_suite()
    assert len(suite) == 8 and len({c.name for c in suite}) == 8
    assert all(c.model.g.is_zero for c in standard_suite(noise=False))


def test_paths_are_seeded_and_batch_invariant(model1):
    times = np.array([-1.0, -0.5, 0.0])
    plan = SynthesisPlan.for_model(model1, replicates=40, seed=7, times=times)
    a = synthesize_increment_paths(plan, model1)
    b = synthesize_increment_paths(dataclasses.replace(plan, batch=7), model1)
    c = synthesize_increment_paths(dataclasses.replace(plan, seed=8), model1)
    assert np.array_equal(a.xi_increments, b.xi_increments) and np.array_equal(a.eta, b.eta)
    assert not np.array_equal(a.xi_increments, c.xi_increments)


def test_path_second_moments(model2):
    times = np.array([-0.5, 0.0])
    plan = SynthesisPlan.for_model(model2, replicates=4000, seed=3, times=times)
    paths = synthesize_increment_paths(plan, model2)
    var_xi = np.var(paths.xi_increments[:, 1])
    cov_xi = np.mean(paths.xi_increments[:, 0] * paths.xi_increments[:, 1])
    # 4000 replicates: relative standard error of a variance is about sqrt(2/4000) = 2.2%
    assert var_xi == pytest.approx(structural_function(model2, 0.0), rel=0.1)
    assert cov_xi == pytest.approx(structural_function(model2, 0.5), abs=0.1 * var_xi)
    assert np.var(paths.eta[:, 1]) == pytest.approx(0.5, rel=0.1)   # (1/2pi) int 1/(1+lam^2)


def test_monte_carlo_matches_analytic(model1):
    w = WeightFunction.exponential(1.0)
    fs = solve_filter(model1, w)
    plan = SynthesisPlan.for_model(model1, w, replicates=2000, seed=11)
    res = empirical_filter_mse(model1, w, fs, plan)
    assert abs(res.z_score) < 4
    assert res.to_dict()["replicates"] == 2000


def test_projection_oracle(model1):
    w = WeightFunction.exponential(1.0)
    fs = solve_filter(model1, w)
    res = brute_force_projection(model1, w)
    assert res.mse == pytest.approx(fs.mse, rel=0.05)
    assert res.mse >= fs.mse * (1 - 1e-3)     # a finite record cannot beat the full past
    with pytest.raises(IllConditionedGram):
        brute_force_projection(model1, w, max_condition=10.0)
