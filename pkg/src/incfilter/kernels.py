"""Operator kernels and their discretisation.

The three spectral symbols are

* P: ``lam^(2n) |1-e^{i lam tau}|^(-2n) / D``
* S: the P symbol times ``g``
* Q: ``(1+lam^2)^n f g / D``

with ``D = (1+lam^2)^n f + lam^(2n) g``.  Only Q has an ordinary Fourier
kernel: P and S have poles of order ``2n`` at ``lam = 2 pi k / tau``, so the
operator equation ``P c = S a_tau`` is discretised by Galerkin projection onto
``c_j = (1 - B_tau)^n e_j`` with causal Laguerre-type ``e_j``.  Against these
trial functions the lattice factors cancel exactly:

    <c_i, P c_j> = (1/2pi) int lam^(2n)/D  E_i conj(E_j) dlam
    <c_i, S a_tau> = (1/2pi) int lam^(2n) g/D  A conj(E_i) dlam

where ``E_j(lam) = int_0^inf e_j(t) exp(i lam t) dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy import special

from .errors import GridTooCoarse, QuadratureFailure
from .increments import increment_coefficients
from .quadrature import FrequencyGrid, fourier_cos, trapezoid_weights
from .spectra import ObservationModel, WeightFunction, functional_transform

KINDS = ("P", "S", "Q")


def lattice_factor(lam, tau: float, n: int):
    """``(1 - exp(i lam tau))^n``."""
    return (1 - np.exp(1j * np.asarray(lam, float) * tau)) ** n


def symbol(model: ObservationModel, kind: str, lam):
    lam = np.asarray(lam, float)
    n, tau = model.n, model.tau
    D = model.denominator(lam)
    s = lam * lam
    if kind == "Q":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (1 + s) ** n * model.f(lam) * model.g(lam) / D
        return np.where(D > 0, out, 0.0)
    lat = np.abs(1 - np.exp(1j * lam * tau)) ** (2 * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(lam) < 1e-8, tau ** (-2 * n), s ** n / lat)
        out = ratio / D
    if kind == "S":
        out = out * model.g(lam)
    elif kind != "P":
        raise ValueError(f"unknown kernel kind {kind!r}")
    return out


@dataclass
class KernelFamily:
    model: ObservationModel
    kind: str
    cache: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")


def _screen_symbol(family: KernelFamily, lam_max: float):
    """Reject symbols that are unbounded at a lattice point or do not decay."""
    model, kind = family.model, family.kind
    if kind != "Q":
        tau = model.tau
        kmax = max(1, int(np.floor(lam_max * tau / (2 * np.pi))))
        for k in range(1, kmax + 1):
            lk = 2 * np.pi * k / tau
            near = symbol(model, kind, np.array([lk * (1 + 1e-4), lk * (1 + 1e-6)]))
            if near[1] > 1e3 * near[0] and near[1] > 0:
                raise QuadratureFailure(
                    f"{kind}-symbol has a non-integrable pole at lam = 2*pi*{k}/tau",
                    region=(lk - np.pi / tau, lk + np.pi / tau))
    big = np.array([1e3, 1e4]) * max(1.0, lam_max / 40)
    env = [np.max(np.abs(symbol(model, kind, np.linspace(b, 1.01 * b, 101)))) * b for b in big]
    if env[1] > 0.5 * env[0] and env[1] > 1e-14:
        raise QuadratureFailure(f"{kind}-symbol does not decay at infinity", region=(big[0], np.inf))


def kernel_value(family: KernelFamily, u: float) -> float:
    """``(1/2pi) int exp(i lam u) symbol(lam) dlam`` by adaptive Fourier quadrature."""
    u = abs(float(u))
    if u in family.cache:
        return family.cache[u]
    model = family.model
    if family.kind in ("Q", "S") and model.g.is_zero:
        family.cache[u] = 0.0
        return 0.0
    if "screened" not in family.cache:
        _screen_symbol(family, 40.0 * model.n / model.tau)
        family.cache["screened"] = True
    val = fourier_cos(lambda x: np.real(symbol(model, family.kind, x)), u) / np.pi
    family.cache[u] = val
    return val


# ---------------------------------------------------------------------------
# Galerkin basis


@dataclass(frozen=True)
class IncrementLaguerreBasis:
    """Causal functions ``e_j`` with transforms ``beta^m (p-beta)^j / (p+beta)^(j+m)``, ``p = -i lam``.

    ``e_j(t) = beta^m j!/(j+m-1)! t^(m-1) L_j^(m-1)(2 beta t) exp(-beta t)``.
    The trial functions of the operator equation are their nth increments.
    ``poles`` appends ``beta^m (beta/p)^j / (p+beta)^m`` for ``j = 1..poles``:
    these grow like ``t^(j-1)`` but their nth increments decay, and they
    capture the ``p^-j`` behaviour of the solution where ``lam^(2n)/D``
    vanishes at the origin.
    """

    size: int
    beta: float
    order: int
    poles: int = 0

    @property
    def count(self) -> int:
        return self.size + self.poles

    def transform(self, lam, lift: int = 0) -> np.ndarray:
        """``p^lift E_j(lam)`` as an array of shape ``(count, len(lam))``.

        ``lift >= poles`` gives values that stay finite at ``lam = 0``.
        """
        lam = np.atleast_1d(np.asarray(lam, float))
        p = -1j * lam
        z = (p - self.beta) / (p + self.beta)
        base = self.beta ** self.order / (p + self.beta) ** self.order
        powers = np.cumprod(np.vstack([np.ones_like(z)] + [z] * (self.size - 1)), axis=0)
        out = base * powers * p ** lift
        if self.poles:
            with np.errstate(divide="ignore", invalid="ignore"):
                extra = [base * self.beta ** j * (p ** (lift - j) if lift >= j else 1 / p ** (j - lift))
                         for j in range(1, self.poles + 1)]
            out = np.vstack([out] + extra)
        return out

    def values(self, t) -> np.ndarray:
        """``e_j(t)``, zero for ``t < 0``; shape ``(size, len(t))``."""
        t = np.atleast_1d(np.asarray(t, float))
        m = self.order
        tp = np.clip(t, 0, None)
        b = self.beta
        out = np.empty((self.count, t.size))
        pref = tp ** (m - 1) * np.exp(-b * tp) * b ** m
        for j in range(self.size):
            c = np.exp(lgamma(j + 1) - lgamma(j + m))
            out[j] = c * special.eval_genlaguerre(j, m - 1, 2 * b * tp) * pref
        # (beta/p)^j beta^m/(p+beta)^m: j-fold integral of the Gamma(m) density
        for j in range(1, self.poles + 1):
            acc = np.zeros_like(tp)
            for k in range(j):
                coef = special.comb(j - 1, k) * (-1) ** k * np.exp(lgamma(m + k) - lgamma(m) - lgamma(j))
                acc += coef * b * (b * tp) ** (j - 1 - k) * special.gammainc(m + k, b * tp)
            out[self.size + j - 1] = acc
        out[:, t < 0] = 0.0
        return out

    def increment_values(self, t, spec) -> np.ndarray:
        """``c_j(t) = sum_l (-1)^l C(n,l) e_j(t - l tau)``."""
        t = np.atleast_1d(np.asarray(t, float))
        out = np.zeros((self.count, t.size))
        for l, c in enumerate(increment_coefficients(spec)):
            out += c * self.values(t - l * spec.tau)
        return out


def default_basis(model: ObservationModel, size: int = 24, beta: float = 1.0) -> IncrementLaguerreBasis:
    """Basis whose members have finite energy ``int lam^(2n)/D |E|^2``.

    ``lam^(2n)/D ~ lam^d`` at infinity when ``f + g ~ lam^-d``; the trial
    transforms decay like ``lam^-m``, so ``m = floor(d/2) + 1``.
    """
    d = model.decay_exponent()
    if not np.isfinite(d):
        d = 0.0
    order = int(np.floor(d / 2)) + 1
    return IncrementLaguerreBasis(size=size, beta=beta, order=order, poles=model.n)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class GridConfig:
    """Discretisation parameters.

    ``length``: truncation L of ``[0, inf)`` (``None``: support of a_tau + 10/beta).
    ``step``: time step h.  ``basis_size``/``basis_beta``: Galerkin basis.
    ``cutoff``: spectral cutoff before the algebraic tail map (``None``: 40 n / tau).
    ``scale``: multiplies all resolutions.
    """

    length: float | None = None
    step: float = 0.02
    basis_size: int = 24
    basis_beta: float = 1.0
    cutoff: float | None = None
    scale: float = 1.0

    def resolved_step(self) -> float:
        return self.step / self.scale


@dataclass
class Assembly:
    model: ObservationModel
    weight: WeightFunction
    basis: IncrementLaguerreBasis
    freq: FrequencyGrid
    times: np.ndarray          # time grid on [0, L] (or [0, T])
    P: np.ndarray              # Galerkin matrix <c_i, P c_j>
    S: np.ndarray              # Nystrom columns: S @ a(times) approximates <c_i, S a_tau>
    Q: np.ndarray              # Nystrom matrix of Q on the time grid (weights folded in)
    source: np.ndarray         # <c_i, S a_tau> from the closed-form transform
    a_samples: np.ndarray


def truncation_length(weight: WeightFunction, model: ObservationModel, cfg: GridConfig) -> float:
    if cfg.length is not None:
        return float(cfg.length)
    rate = weight.decay_rate()
    support = weight.horizon if weight.finite else 0.0
    slow = min(rate, cfg.basis_beta) if np.isfinite(rate) else cfg.basis_beta
    return float(support + 10.0 / slow)


def q_kernel_table(model: ObservationModel, step: float, count: int, cutoff: float = 400.0,
                   panel: float = 0.125, order: int = 8) -> np.ndarray:
    """``K_Q(k h)`` for ``k = 0..count-1``.

    Gauss-Legendre panels on ``[0, cutoff]`` for all lags at once; the tail
    uses two integration-by-parts terms of the algebraic decay.
    """
    u = step * np.arange(count)
    if model.g.is_zero:
        return np.zeros(count)
    panel = min(panel, np.pi / (4 * max(u[-1], 1e-9)))
    x, w = np.polynomial.legendre.leggauss(order)
    npan = int(np.ceil(cutoff / panel))
    edges = np.linspace(0.0, cutoff, npan + 1)
    lam = (0.5 * np.diff(edges)[:, None] * x + 0.5 * (edges[:-1] + edges[1:])[:, None]).ravel()
    wl = np.tile(w, npan) * np.repeat(0.5 * np.diff(edges), order)
    q = symbol(model, "Q", lam) * wl
    out = np.empty(count)
    for start in range(0, count, 256):
        uu = u[start:start + 256]
        out[start:start + 256] = np.cos(np.outer(uu, lam)) @ q
    L = cutoff
    qL = float(symbol(model, "Q", L))
    dq = (float(symbol(model, "Q", L * (1 + 1e-4))) - float(symbol(model, "Q", L * (1 - 1e-4)))) / (2e-4 * L)
    d = -dq * L / qL if qL > 0 else np.inf
    safe_u = np.where(u > 0, u, 1.0)
    tail = np.where(u > 0, -qL * np.sin(L * u) / safe_u - dq * np.cos(L * u) / safe_u ** 2, qL * L / max(d - 1, 1e-9))
    return (out + tail) / np.pi


def assemble_matrices(model: ObservationModel, weight: WeightFunction, cfg: GridConfig | None = None,
                      with_q: bool = True) -> Assembly:
    cfg = cfg or GridConfig()
    basis = default_basis(model, cfg.basis_size, cfg.basis_beta)
    freq = FrequencyGrid.for_problem(model.n, model.tau, weight.horizon, cfg.scale, cfg.cutoff,
                                    basis=(basis.count, basis.beta))
    lam = freq.nodes
    E = basis.transform(lam)
    wsig = model.signal_weight(lam)
    g = model.g(lam)
    A = functional_transform(weight, lam)
    P = (E * (freq.weights * wsig)) @ E.conj().T
    P = np.real(P + P.conj().T) / (2 * np.pi)
    source = np.real((E.conj() * (freq.weights * wsig * g)) @ A) / np.pi

    h = cfg.resolved_step()
    L = weight.horizon if weight.finite else truncation_length(weight, model, cfg)
    count = int(np.ceil(L / h)) + 1
    times = np.linspace(0.0, L, count)
    tw = trapezoid_weights(times)
    # kernel of <c_i, S .> acting on a: k_i(t) = (1/2pi) int lam^(2n) g/D conj(E_i) exp(-i lam t)
    phase = np.exp(-1j * np.outer(lam, times))
    k = np.real((E.conj() * (freq.weights * wsig * g)) @ phase) / np.pi
    S = k * tw
    a_samples = weight(times)
    Q = np.zeros((0, 0))
    if with_q:
        kq = q_kernel_table(model, times[1] - times[0], count)
        if kq[0] != 0 and abs(kq[1] - kq[0]) > 0.1 * abs(kq[0]):
            raise GridTooCoarse(f"Q kernel changes by {abs(kq[1] - kq[0]) / abs(kq[0]):.1%} in one step")
        idx = np.abs(np.subtract.outer(np.arange(count), np.arange(count)))
        Q = kq[idx] * tw[None, :]
    return Assembly(model, weight, basis, freq, times, P, S, Q, source, a_samples)
