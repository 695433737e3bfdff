import numpy as np
import pytest
from scipy import integrate

from incfilter.increments import IncrementSpec
from incfilter.kernels import GridConfig, IncrementLaguerreBasis, assemble_matrices, default_basis, lattice_factor
from incfilter.spectra import ObservationModel

from conftest import ZERO_MEAN


def _ft(fun, lam, end):
    re = integrate.quad(lambda t: fun(t) * np.cos(lam * t), 0, end, limit=500)[0]
    im = integrate.quad(lambda t: fun(t) * np.sin(lam * t), 0, end, limit=500)[0]
    return re + 1j * im


@pytest.mark.parametrize("order", [1, 2, 3])
@pytest.mark.parametrize("lam", [0.0, 0.4, 2.5])
def test_laguerre_transforms(order, lam):
    b = IncrementLaguerreBasis(size=4, beta=1.3, order=order)
    E = b.transform(np.array([lam]))[:, 0]
    for j in range(4):
        num = _ft(lambda t: b.values(np.array([t]))[j, 0], lam, 80.0)
        assert abs(num - E[j]) < 1e-8


@pytest.mark.parametrize("n", [1, 2])
def test_increments_of_pole_functions(n):
    spec = IncrementSpec(n, 0.7)
    b = IncrementLaguerreBasis(size=2, beta=1.0, order=2, poles=n)
    lam = 1.1
    E = b.transform(np.array([lam]))[:, 0] * lattice_factor(lam, spec.tau, n)
    for j in range(b.count):
        num = _ft(lambda t: b.increment_values(np.array([t]), spec)[j, 0], lam, 120.0)
        assert abs(num - E[j]) < 1e-6 * max(1.0, abs(E[j]))


def test_default_basis_order(model1, model2):
    assert default_basis(model1).order == 2      # f + g ~ lam^-2
    assert default_basis(model2).poles == 2


def test_galerkin_matrix_is_symmetric_positive(model2):
    asm = assemble_matrices(model2, ZERO_MEAN, GridConfig(basis_size=12))
    P = asm.P
    assert np.allclose(P, P.T, atol=1e-12 * np.max(np.abs(P)))
    assert np.min(np.linalg.eigvalsh(P)) > 0
