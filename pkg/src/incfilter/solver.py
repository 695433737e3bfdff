"""Solution of the operator equation ``S a_tau = P c`` and the transform of ``c_tau``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DegenerateDensity, NonConverged, SingularOperator
from .kernels import Assembly, GridConfig, assemble_matrices, lattice_factor
from .increments import increment_coefficients
from .quadrature import uniform_panels
from .spectra import ObservationModel, WeightFunction, filon_transform

RIDGE_SWEEP = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
NEGATIVE_TIMES = (-0.1, -0.5, -1.0, -2.0, -5.0)


@dataclass
class OperatorSolution:
    times: np.ndarray
    c_values: np.ndarray
    coefficients: np.ndarray
    residual_norm: float
    regularization_used: float
    converged: bool
    assembly: Assembly = field(repr=False)

    @property
    def model(self) -> ObservationModel:
        return self.assembly.model

    def E_transform(self, lam):
        """``E(lam) = C(lam) / (1 - exp(i lam tau))^n``, regular at the lattice."""
        return self.coefficients @ self.assembly.basis.transform(lam)

    def lifted_E_transform(self, lam):
        """``(-i lam)^n E(lam)``, finite at ``lam = 0``."""
        return self.coefficients @ self.assembly.basis.transform(lam, lift=self.model.n)

    def C_transform(self, lam):
        """``C^tau(lam) = int_0^inf c_tau(t) exp(i lam t) dt`` (closed form in the basis)."""
        lam = np.atleast_1d(np.asarray(lam, float))
        return lattice_factor(lam, self.model.tau, self.model.n) * self.E_transform(lam)

    def c(self, t):
        return self.coefficients @ self.assembly.basis.increment_values(t, self.model.spec)

    @property
    def extra_error(self) -> float:
        """``<S a_tau, P^-1 S a_tau>`` in the discretisation."""
        return float(self.coefficients @ self.assembly.P @ self.coefficients)


def _ridge_solve(P, b, tol):
    d = np.sqrt(np.clip(np.diag(P), 1e-300, None))
    Ps = P / np.outer(d, d)
    bs = b / d
    bnorm = np.linalg.norm(bs)
    scale = np.trace(Ps) / Ps.shape[0]
    best = None
    for mu in RIDGE_SWEEP:
        try:
            x = linalg.solve(Ps + mu * scale * np.eye(len(bs)), bs, assume_a="pos")
        except (linalg.LinAlgError, ValueError):
            continue
        res = np.linalg.norm(Ps @ x - bs) / bnorm
        if best is None or res < best[1]:
            best = (x, res, mu * scale)
        if res <= tol:
            return x / d, res, mu * scale, True
    if best is None:
        raise SingularOperator("P is not positive definite even with the largest ridge")
    x, res, mu = best
    return x / d, res, mu, False


def solve_c(model: ObservationModel, weight: WeightFunction, cfg: GridConfig | None = None,
            tol: float = 1e-8, strict: bool = False, assembly: Assembly | None = None) -> OperatorSolution:
    """Galerkin solution of ``P c = S a_tau``.

    The smallest ridge in the sweep that brings the relative residual below
    ``tol`` is used; otherwise the best attempt is returned flagged
    non-converged (``strict=True`` raises instead).
    """
    if model.f.is_zero and model.g.is_zero:
        raise DegenerateDensity("f and g are both identically zero")
    asm = assembly or assemble_matrices(model, weight, cfg)
    b = asm.source
    if not np.any(b) or weight.is_zero or model.g.is_zero:
        x = np.zeros_like(b)
        res, mu, ok = 0.0, 0.0, True
    else:
        x, res, mu, ok = _ridge_solve(asm.P, b, tol)
        if not ok and strict:
            raise NonConverged(f"relative residual {res:.2e} > {tol:.0e} after ridge sweep")
    c_vals = x @ asm.basis.increment_values(asm.times, model.spec)
    return OperatorSolution(asm.times, c_vals, x, float(res), float(mu), ok, asm)


def transform_c(sol: OperatorSolution, lam, tail_fraction: float = 0.1):
    """``int_0^inf c(t) exp(i lam t) dt`` from the tabulated ``c`` (Filon) plus an exponential tail.

    The tail beyond the grid end is a single exponential fitted to the last
    ``tail_fraction`` of the samples.
    """
    return transform_samples(sol.times, sol.c_values, lam, tail_fraction)


def transform_samples(t, c, lam, tail_fraction: float = 0.1):
    t = np.asarray(t, float)
    c = np.asarray(c, float)
    lam = np.atleast_1d(np.asarray(lam, float))
    body = filon_transform(t, c, lam)
    k0 = int((1 - tail_fraction) * t.size)
    tt, cc = t[k0:], c[k0:]
    L = t[-1]
    if np.all(cc == 0) or np.any(cc == 0) or np.any(np.sign(cc) != np.sign(cc[-1])):
        return body
    slope, _ = np.polyfit(tt, np.log(np.abs(cc)), 1)
    kappa = -slope
    if kappa <= 0:
        return body
    return body + c[-1] * np.exp(1j * lam * L) / (kappa - 1j * lam)


def negative_time_value(sol: OperatorSolution, t: float, cutoff: float = 2000.0, order: int = 10) -> float:
    """``(1/2pi) int C(lam) exp(-i lam t) dlam`` for one ``t < 0``.

    Gauss panels on ``[0, cutoff]``; beyond it ``C`` is split into
    ``sum_k b_k E(lam) exp(i lam k tau)`` so that every tail term has the
    single frequency ``k tau - t > 0`` and a smooth amplitude, integrated by
    parts three times.
    """
    n, tau = sol.model.n, sol.model.tau
    nodes, w = uniform_panels(cutoff, abs(t) + n * tau, order)
    body = float(w @ np.real(sol.C_transform(nodes) * np.exp(-1j * nodes * t)))
    d = 1e-4 * cutoff
    Em, E0, Ep = sol.E_transform(np.array([cutoff - d, cutoff, cutoff + d]))
    derivs = (E0, (Ep - Em) / (2 * d), (Ep - 2 * E0 + Em) / d ** 2)
    tail = 0.0j
    for k, b in enumerate(increment_coefficients(sol.model.spec)):
        s = 1j * (k * tau - t)
        # int_L^inf F e^{s lam} = -e^{sL} sum_j (-1)^j F^(j)(L) / s^(j+1)
        tail += b * -np.exp(s * cutoff) * sum((-1) ** j * Fj / s ** (j + 1) for j, Fj in enumerate(derivs))
    return (body + float(np.real(tail))) / np.pi


def orthogonality_residual(sol: OperatorSolution, times=None) -> dict:
    """Inverse transform of ``C`` at sampled ``t < 0`` (zero for a causal ``c``).

    Returned with the scale ``max_{t>=0} |c(t)|`` used for the relative bound.
    """
    tau = sol.model.tau
    times = np.asarray(times if times is not None else [k * tau for k in NEGATIVE_TIMES], float)
    if np.any(times >= 0):
        raise ValueError("orthogonality residual is defined for t < 0")
    vals = [negative_time_value(sol, t) for t in times]
    scale = float(np.max(np.abs(sol.c_values))) if sol.c_values.size else 0.0
    return {"times": times.tolist(), "values": vals, "scale": scale}
