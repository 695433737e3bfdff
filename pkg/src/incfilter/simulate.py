"""Validation engine: spectral synthesis, Monte Carlo error and a projection oracle.

The oracle never touches the filter machinery.  It samples the observed
increments ``Y(t_k) = zeta^(n)(t_k, tau)`` on ``[-M, 0]``, builds their
covariance and the cross-covariance with ``A eta`` by quadrature of
the spectral representations, and returns the least-squares residual
variance of ``A eta`` given ``Y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, special

from .errors import GridResolutionFailure, IllConditionedGram
from .increments import IncrementSpec, increment_coefficients
from .quadrature import FrequencyGrid, fourier_cos, uniform_panels
from .spectra import DensityModel, ObservationModel, WeightFunction, functional_transform

# ---------------------------------------------------------------------------
# standard suite


@dataclass(frozen=True)
class SuiteCase:
    name: str
    model: ObservationModel
    weight: WeightFunction


def standard_suite(noise: bool = True) -> list[SuiteCase]:
    """n in {1,2}, tau in {1, 0.5}, f = 1/(1+lam^2)^2, g = 1/(1+lam^2), a in {e^-t, 1_[0,1]}.

    ``noise=False`` replaces g by zero.
    """
    f = DensityModel.rational([1.0], [1.0, 2.0, 1.0])
    g = DensityModel.rational([1.0], [1.0, 1.0]) if noise else DensityModel.zero()
    weights = {"exp": WeightFunction.exponential(1.0), "ind": WeightFunction.indicator(1.0)}
    cases = []
    for n in (1, 2):
        for tau in (1.0, 0.5):
            for wname, w in weights.items():
                model = ObservationModel(f, g, IncrementSpec(n, tau))
                cases.append(SuiteCase(f"n{n}-tau{tau:g}-{wname}", model, w))
    return cases


# ---------------------------------------------------------------------------
# spectral synthesis


def _increment_symbol(model: ObservationModel, lam):
    """``(1 - e^{-i lam tau})^n (1+i lam)^n / (i lam)^n``, regular at 0."""
    lam = np.asarray(lam, float)
    n, tau = model.n, model.tau
    # (1 - e^{-ix tau}) / (i x) = tau e^{-i x tau/2} sinc(x tau / 2pi)
    ratio = tau * np.exp(-0.5j * lam * tau) * np.sinc(lam * tau / (2 * np.pi))
    return (ratio * (1 + 1j * lam)) ** n


@dataclass(frozen=True)
class SynthesisPlan:
    """Spectral cells (nodes, weights on ``lam >= 0``), time grid, replicate count and seed."""

    freq: FrequencyGrid
    times: np.ndarray
    replicates: int = 10_000
    seed: int = 0
    batch: int = 250

    @classmethod
    def for_model(cls, model: ObservationModel, weight: WeightFunction | None = None,
                  replicates: int = 10_000, seed: int = 0, scale: float = 1.0,
                  times=None) -> "SynthesisPlan":
        horizon = weight.horizon if weight is not None else None
        freq = FrequencyGrid.for_problem(model.n, model.tau, horizon, scale)
        if times is None:
            times = -np.arange(0, int(round(10 / (0.1 / scale))) + 1)[::-1] * (0.1 / scale)
        return cls(freq, np.asarray(times, float), replicates, seed)

    def cell_masses(self, model: ObservationModel):
        """Variances of the cell increments of the spectral measures (``E|Z_k|^2``)."""
        lam, wts = self.freq.nodes, self.freq.weights
        phi = _increment_symbol(model, lam)
        return wts * np.abs(phi) ** 2 * model.f(lam) / (2 * np.pi), wts * model.g(lam) / (2 * np.pi)


def check_resolution(plan: SynthesisPlan, model: ObservationModel, rel_tol: float = 1e-3):
    """Compare total cell masses with a grid refined by two; raise if they differ by more than ``rel_tol``."""
    fine = FrequencyGrid.build(cutoff=plan.freq.cutoff, panel=_panel(plan.freq) / 2,
                               tail_panels=32)
    for a, b, name in zip(plan.cell_masses(model),
                          SynthesisPlan(fine, plan.times).cell_masses(model), ("signal", "noise")):
        ta, tb = a.sum(), b.sum()
        if max(ta, tb) > 0 and abs(ta - tb) > rel_tol * max(ta, tb):
            raise GridResolutionFailure(f"{name} cell mass changes by {abs(ta - tb) / max(ta, tb):.2e} under refinement")


def _panel(freq: FrequencyGrid) -> float:
    inner = freq.nodes[freq.nodes <= freq.cutoff]
    return float(np.max(np.diff(inner))) * 2 if inner.size > 1 else freq.cutoff


def _replicate_normals(seed: int, start: int, count: int, size: int) -> np.ndarray:
    """Complex standard normals, one independent substream per replicate."""
    children = np.random.SeedSequence(seed).spawn(start + count)[start:]
    out = np.empty((count, size), complex)
    for i, ss in enumerate(children):
        z = np.random.Generator(np.random.PCG64(ss)).standard_normal(2 * size)
        out[i] = (z[:size] + 1j * z[size:]) / np.sqrt(2)
    return out


@dataclass
class IncrementPaths:
    times: np.ndarray
    xi_increments: np.ndarray   # (replicates, len(times)) samples of xi^(n)(t, tau)
    eta: np.ndarray             # (replicates, len(times)) samples of eta(t)


def synthesize_increment_paths(plan: SynthesisPlan, model: ObservationModel,
                               replicates: int | None = None, check: bool = True) -> IncrementPaths:
    """Gaussian paths of ``xi^(n)(t, tau)`` and ``eta(t)`` from independent spectral cells.

    Each cell ``k`` carries circular Gaussians ``Z_k`` with ``E|Z_k|^2`` equal to
    the cell mass; real paths are ``2 Re sum_k e^{i lam_k t} Z_k``.
    """
    if check:
        check_resolution(plan, model)
    N = plan.replicates if replicates is None else replicates
    lam = plan.freq.nodes
    ms, mn = plan.cell_masses(model)
    wave = np.exp(1j * np.outer(lam, plan.times))
    phi = _increment_symbol(model, lam)
    sx = phi * np.sqrt(ms) / np.where(np.abs(phi) > 0, np.abs(phi), 1.0)
    K = lam.size
    xi = np.empty((N, plan.times.size))
    eta = np.empty((N, plan.times.size))
    for start in range(0, N, plan.batch):
        cnt = min(plan.batch, N - start)
        z = _replicate_normals(plan.seed, start, cnt, 2 * K)
        xi[start:start + cnt] = 2 * np.real((z[:, :K] * sx) @ wave)
        eta[start:start + cnt] = 2 * np.real((z[:, K:] * np.sqrt(mn)) @ wave)
    return IncrementPaths(plan.times, xi, eta)


def structural_function(model: ObservationModel, t: float = 0.0) -> float:
    """``E xi^(n)(s+t, tau) xi^(n)(s, tau)`` by adaptive quadrature."""
    fn = lambda x: np.abs(_increment_symbol(model, x)) ** 2 * model.f(x)
    return fourier_cos(fn, t) / np.pi


# ---------------------------------------------------------------------------
# Monte Carlo error of the spectral estimate


@dataclass
class OracleResult:
    empirical_mse: float
    standard_error: float
    oracle_mse: float | None
    analytic_mse: float
    replicates: int

    @property
    def z_score(self) -> float:
        return (self.empirical_mse - self.analytic_mse) / self.standard_error if self.standard_error else 0.0

    def to_dict(self) -> dict:
        return {"empirical_mse": self.empirical_mse, "standard_error": self.standard_error,
                "oracle_mse": self.oracle_mse, "analytic_mse": self.analytic_mse,
                "replicates": self.replicates}


def empirical_filter_mse(model: ObservationModel, w: WeightFunction, filt, plan: SynthesisPlan,
                         oracle_mse: float | None = None, h=None) -> OracleResult:
    """Monte Carlo ``E|A eta - hat A eta|^2`` for the estimate ``int h dZ``.

    Per replicate the estimate applies ``h`` to the signal cells and
    ``h (i lam)^n / (1+i lam)^n`` to the noise cells, exactly as it acts on
    the spectral measure of the observed increments.  ``h`` defaults to the
    filter's spectral characteristic.
    """
    lam = plan.freq.nodes
    hv = filt.h(lam) if h is None else np.asarray(h(lam))
    A = functional_transform(w, lam)
    n = model.n
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(lam > 0, hv * (1j * lam) ** n / (1 + 1j * lam) ** n, 0.0)
    ms_f = plan.freq.weights * model.f(lam) / (2 * np.pi)
    ms_g = plan.freq.weights * model.g(lam) / (2 * np.pi)
    cx = -hv * np.sqrt(ms_f)
    ce = (A - phi) * np.sqrt(ms_g)
    K = lam.size
    errs = np.empty(plan.replicates)
    for start in range(0, plan.replicates, plan.batch):
        cnt = min(plan.batch, plan.replicates - start)
        z = _replicate_normals(plan.seed, start, cnt, 2 * K)
        errs[start:start + cnt] = 2 * np.real(z[:, :K] @ cx + z[:, K:] @ ce)
    sq = errs ** 2
    mean = float(np.mean(sq))
    se = float(np.std(sq, ddof=1) / np.sqrt(sq.size))
    return OracleResult(mean, se, oracle_mse, float(filt.mse), plan.replicates)


# ---------------------------------------------------------------------------
# brute-force projection oracle


@dataclass
class ProjectionResult:
    mse: float
    condition: float
    length: float
    step: float
    points: int
    variance: float
    refinement: dict = field(default_factory=dict)


def _trig_lattice(n: int):
    """``(2 - 2 cos x)^n = sum_j c_j cos(j x)``, ``j = -n..n``."""
    return {j: (-1) ** j * special.comb(2 * n, n + j, exact=True) for j in range(-n, n + 1)}


def _cos_tail(s, L: float, v: np.ndarray):
    """``int_L^inf s(lam) cos(lam v) dlam`` for smooth algebraically decaying ``s``."""
    v = np.abs(np.asarray(v, float))
    sL = float(s(L))
    h = 1e-4 * L
    ds = (float(s(L + h)) - float(s(L - h))) / (2 * h)
    out = np.empty_like(v)
    pos = v > 0
    vp = v[pos]
    out[pos] = -sL * np.sin(L * vp) / vp - ds * np.cos(L * vp) / vp ** 2
    if np.any(~pos):
        out[~pos] = integrate.quad(lambda x: float(s(x)), L, np.inf, limit=200)[0]
    return out


def _fourier_table(values, nodes, weights, u, chunk: int = 8192):
    """``sum_k w_k Re(values_k e^{-i lam_k u})`` for every ``u``."""
    out = np.zeros(np.size(u))
    vw = values * weights
    for s in range(0, nodes.size, chunk):
        ph = np.exp(-1j * np.outer(u, nodes[s:s + chunk]))
        out += np.real(ph @ vw[s:s + chunk])
    return out


def observation_covariance(model: ObservationModel, lags, cutoff: float = 400.0) -> np.ndarray:
    """``E Y(t+u) Y(t)`` for the observed increments ``Y = zeta^(n)(., tau)``.

    Composite Gauss quadrature on ``[0, cutoff]``; beyond the cutoff the
    lattice factor is expanded in cosines and each term of the smooth tail
    is integrated by parts.
    """
    lags = np.asarray(lags, float)
    n, tau = model.n, model.tau
    x, wx = uniform_panels(cutoff, float(np.max(np.abs(lags))) + n * tau)
    body = np.abs(_increment_symbol(model, x)) ** 2 * model.f(x) + (2 - 2 * np.cos(x * tau)) ** n * model.g(x)
    low = _fourier_table(body.astype(complex), x, wx, lags)

    def smooth(lam):
        lam = np.asarray(lam, float)
        return (1 + lam * lam) ** n * model.f(lam) / lam ** (2 * n) + model.g(lam)

    tail = np.zeros_like(lags)
    for j, c in _trig_lattice(n).items():
        tail += c * _cos_tail(smooth, cutoff, lags + j * tau)
    return (low + tail) / np.pi


def cross_covariance(model: ObservationModel, w: WeightFunction, times, cutoff: float = 400.0) -> np.ndarray:
    """``E[A eta Y(t_k)]`` for ``t_k <= 0``.

    The integrand beyond ``cutoff`` is bounded by ``2^n |A| g``; for the
    weights in use its contribution is below ``1e-5`` absolute.
    """
    times = np.asarray(times, float)
    n, tau = model.n, model.tau
    x, wx = uniform_panels(cutoff, float(np.max(np.abs(times))) + n * tau + (w.horizon or 0.0))
    B = functional_transform(w, x) * model.g(x) * (1 - np.exp(1j * x * tau)) ** n
    return _fourier_table(B, x, wx, times) / np.pi


def functional_variance(model: ObservationModel, w: WeightFunction) -> float:
    fn = lambda x: float(np.abs(functional_transform(w, np.array([x]))[0]) ** 2 * model.g(x))
    return integrate.quad(fn, 0.0, np.inf, limit=1000)[0] / np.pi


def _projection(model, w, length, step, cutoff, max_condition):
    count = int(round(length / step)) + 1
    times = -step * np.arange(count)
    R = observation_covariance(model, step * np.arange(count), cutoff)
    G = linalg.toeplitz(R)
    r = cross_covariance(model, w, times, cutoff)
    ev = np.linalg.eigvalsh(G)
    cond = float(ev[-1] / ev[0]) if ev[0] > 0 else np.inf
    if cond > max_condition:
        raise IllConditionedGram(f"Gram condition number {cond:.3e} exceeds {max_condition:.0e}", cond)
    x = linalg.solve(G, r, assume_a="pos")
    return float(r @ x), cond, count


def brute_force_projection(model: ObservationModel, w: WeightFunction, length: float | None = None,
                           step: float | None = None, scale: float = 1.0, cutoff: float = 400.0,
                           refine: bool = False, max_condition: float = 1e12) -> ProjectionResult:
    """Residual variance of ``A eta`` after least squares on ``Y(t_k)``, ``t_k in [-M, 0]``.

    Defaults: ``M = 20 tau n`` times ``scale`` and step ``tau / 10`` divided by
    ``scale``; the residual decays like ``1/M`` and like the step, so
    ``scale = 2`` roughly halves the gap to the exact error.
    ``refine=True`` also reports the step-halved and length-doubled values;
    a change above 2% under step halving raises ``GridResolutionFailure``.
    """
    var = functional_variance(model, w)
    M = (20 * model.tau * model.n if length is None else float(length)) * scale
    h = (model.tau / 10 if step is None else float(step)) / scale
    if model.g.is_zero or w.is_zero:
        return ProjectionResult(0.0, 1.0, M, h, 0, var)
    explained, cond, count = _projection(model, w, M, h, cutoff, max_condition)
    out = ProjectionResult(max(var - explained, 0.0), cond, M, h, count, var)
    if refine:
        e_half = _projection(model, w, M, h / 2, cutoff, max_condition)[0]
        e_long = _projection(model, w, 2 * M, h, cutoff, max_condition)[0]
        half, longer = var - e_half, var - e_long
        out.refinement = {"half_step": half, "double_length": longer}
        if abs(half - out.mse) > 0.02 * max(out.mse, 1e-300):
            raise GridResolutionFailure(f"oracle changes by {abs(half - out.mse) / out.mse:.2%} when the step is halved")
    return out
