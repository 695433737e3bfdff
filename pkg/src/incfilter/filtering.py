"""Spectral characteristic and mean-square error of the optimal filter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDensity, RouteMismatch
from .kernels import GridConfig, lattice_factor
from .quadrature import trapezoid_weights
from .solver import OperatorSolution, solve_c
from .spectra import ObservationModel, WeightFunction, functional_transform

LATTICE_EPS = 1e-6


def spectral_characteristic(model: ObservationModel, w: WeightFunction, sol: OperatorSolution, lam):
    """``h_tau(lam)``.

    ``(1+i lam)^n (-i lam)^n [A g - C (1-e^{i lam tau})^-n] / D``; the lattice
    factor is divided out analytically, which is the limit of the printed
    formula at ``lam = 2 pi k / tau`` and at ``lam = 0``.
    """
    lam = np.atleast_1d(np.asarray(lam, float))
    n = model.n
    D = model.denominator(lam)
    if np.any(D <= 0):
        bad = lam[D <= 0]
        raise DegenerateDensity(f"D(lam) = 0 at lam = {bad[:3]}")
    A = functional_transform(w, lam)
    pE = sol.lifted_E_transform(lam)
    return (1 + 1j * lam) ** n * ((-1j * lam) ** n * A * model.g(lam) - pE) / D


def spectral_characteristic_printed(model, w, sol, lam):
    """The two-term formula as printed, valid off the lattice (used as a cross-check)."""
    lam = np.atleast_1d(np.asarray(lam, float))
    n, tau = model.n, model.tau
    D = model.denominator(lam)
    A = functional_transform(w, lam)
    C = sol.C_transform(lam)
    pre = (1 + 1j * lam) ** n * (-1j * lam) ** n
    return pre * A * model.g(lam) / D - pre * C / (lattice_factor(lam, tau, n) * D)


@dataclass
class FilterSolution:
    mse: float
    mse_spectral: float
    components: tuple          # (g-weighted integral, f-weighted integral)
    extra: float               # <S a_tau, P^-1 S a_tau>
    q_term: float              # <Q a, a>
    op_solution: OperatorSolution = field(repr=False)
    weight: WeightFunction = field(repr=False)

    @property
    def model(self) -> ObservationModel:
        return self.op_solution.model

    def h(self, lam):
        return spectral_characteristic(self.model, self.weight, self.op_solution, lam)

    @property
    def route_gap(self) -> float:
        denom = max(abs(self.mse), 1e-300)
        return abs(self.mse - self.mse_spectral) / denom if self.mse else abs(self.mse_spectral)


def spectral_mse_integrands(model: ObservationModel, A, C, lam, f=None, g=None, f0=None, g0=None):
    """Integrands of the two-integral error formula.

    ``(f0, g0)`` build the filter (through ``C`` and the denominators),
    ``(f, g)`` weight the two integrals; by default both are the model
    densities.
    """
    lam = np.asarray(lam, float)
    n, tau = model.n, model.tau
    f0 = model.f(lam) if f0 is None else f0
    g0 = model.g(lam) if g0 is None else g0
    f = f0 if f is None else f
    g = g0 if g is None else g
    s = lam * lam
    lat = lattice_factor(lam, tau, n)
    lat2 = np.abs(lat) ** 2
    D0 = (1 + s) ** n * f0 + s ** n * g0
    near = lat2 < LATTICE_EPS ** (2 * n)
    safe = np.where(near, 1.0, lat)
    # E = C / lat with the lattice factor removed where it vanishes
    E = np.where(near, 0.0, C / safe)
    num_g = np.abs(A * (1 + s) ** n * f0 + s ** n * E) ** 2
    num_f = s ** n * np.abs(A * g0 - E) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ig = np.where(D0 > 0, num_g * g / D0 ** 2, 0.0)
        i_f = np.where(D0 > 0, num_f * (1 + s) ** n * f / D0 ** 2, 0.0)
    return ig, i_f


def mean_square_error(model: ObservationModel, w: WeightFunction, sol: OperatorSolution,
                      rel_tol: float = 0.01, check: bool = True) -> FilterSolution:
    """Error of the optimal estimate by the spectral route and the operator route.

    Spectral route: the two frequency integrals with weights ``g`` and ``f``.
    Operator route: ``<S a_tau, P^-1 S a_tau> + <Q a, a>`` with Q by Nystrom.
    """
    asm = sol.assembly
    lam = asm.freq.nodes
    A = functional_transform(w, lam)
    C = sol.C_transform(lam)
    ig, i_f = spectral_mse_integrands(model, A, C, lam)
    # the printed form divides by |1 - e^{i lam tau}|^{2n}; equivalently use E directly
    E = sol.E_transform(lam)
    lat = np.abs(lattice_factor(lam, model.tau, model.n))
    near = lat < LATTICE_EPS
    if np.any(near):
        ig2, if2 = _integrands_from_E(model, A[near], E[near], lam[near])
        ig[near], i_f[near] = ig2, if2
    comp_g = asm.freq.full_line(ig)
    comp_f = asm.freq.full_line(i_f)
    spectral = comp_g + comp_f
    extra = sol.extra_error
    a = asm.a_samples
    q_term = 0.0 if asm.Q.size == 0 else float((a * trapezoid_weights(asm.times)) @ (asm.Q @ a))
    operator = extra + q_term
    out = FilterSolution(operator, spectral, (comp_g, comp_f), extra, q_term, sol, w)
    scale = max(abs(operator), abs(spectral))
    if check and scale > 1e-12 and abs(operator - spectral) > rel_tol * scale:
        raise RouteMismatch(f"operator route {operator:.6g} vs spectral route {spectral:.6g}")
    return out


def _integrands_from_E(model, A, E, lam):
    n = model.n
    s = lam * lam
    f, g = model.f(lam), model.g(lam)
    D = (1 + s) ** n * f + s ** n * g
    ig = np.abs(A * (1 + s) ** n * f + s ** n * E) ** 2 * g / D ** 2
    i_f = s ** n * np.abs(A * g - E) ** 2 * (1 + s) ** n * f / D ** 2
    return ig, i_f


def solve_filter(model: ObservationModel, w: WeightFunction, cfg: GridConfig | None = None,
                 check: bool = True) -> FilterSolution:
    sol = solve_c(model, w, cfg)
    return mean_square_error(model, w, sol, check=check)
