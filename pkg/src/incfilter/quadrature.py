"""Quadrature on the half line for even / conjugate-symmetric spectral integrands."""

from dataclasses import dataclass

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class FrequencyGrid:
    """Nodes ``lam >= 0`` and weights for ``int_0^inf F(lam) dlam``.

    Gauss-Legendre panels of width ``panel`` on ``[0, cutoff]`` plus the
    algebraic tail ``[cutoff, inf)`` mapped by ``lam = cutoff / u``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    cutoff: float

    @classmethod
    def build(cls, cutoff: float = 40.0, panel: float = 0.25, order: int = 8,
              tail_panels: int = 16, tail_order: int = 8, edges=None) -> "FrequencyGrid":
        x, w = np.polynomial.legendre.leggauss(order)
        if edges is None:
            npan = max(1, int(np.ceil(cutoff / panel)))
            edges = np.linspace(0.0, cutoff, npan + 1)
        edges = np.asarray(edges, float)
        npan = edges.size - 1
        a, b = edges[:-1, None], edges[1:, None]
        nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
        weights = np.tile(w, npan) * np.repeat(0.5 * np.diff(edges), order)
        xt, wt = np.polynomial.legendre.leggauss(tail_order)
        ue = np.linspace(0.0, 1.0, tail_panels + 1) ** 2
        ua, ub = ue[:-1, None], ue[1:, None]
        u = (0.5 * (ub - ua) * xt + 0.5 * (ua + ub)).ravel()
        wu = np.tile(wt, tail_panels) * np.repeat(0.5 * np.diff(ue), tail_order)
        tail_nodes = cutoff / u
        tail_w = wu * cutoff / u ** 2
        order_idx = np.argsort(tail_nodes)
        return cls(np.concatenate([nodes, tail_nodes[order_idx]]),
                   np.concatenate([weights, tail_w[order_idx]]), float(cutoff))

    @classmethod
    def for_problem(cls, n: int, tau: float, horizon=None, scale: float = 1.0,
                    cutoff: float | None = None, basis=None) -> "FrequencyGrid":
        """Panels resolve ``exp(i lam t)`` over the time span of the problem.

        ``basis = (count, beta)`` also resolves the phase of Laguerre-type
        transforms, which turns at rate ``2 count beta / (beta^2 + lam^2)``.
        """
        cutoff = cutoff if cutoff is not None else 40.0 * n / tau
        span = max(tau * n, horizon or 0.0, 1.0)
        panel = min(0.25, np.pi / (4 * span)) / scale
        edges = None
        if basis is not None:
            count, beta = basis
            edges = [0.0]
            while edges[-1] < cutoff:
                lam = edges[-1]
                rate = 2 * count * beta / (beta ** 2 + lam ** 2)
                edges.append(lam + min(panel, np.pi / (2 * rate * scale)))
            edges[-1] = cutoff
        return cls.build(cutoff=cutoff, panel=panel, tail_panels=int(16 * scale), edges=edges)

    def __len__(self):
        return self.nodes.size

    def full_line(self, values) -> float:
        """``(1/2pi) int_R F`` for ``F(-lam) = conj F(lam)`` sampled on the nodes."""
        return float(np.sum(self.weights * np.real(values)) / np.pi)


def _fourier_half_line(fn, u: float, kind: str, cutoff: float, order: int) -> float:
    """``int_0^inf fn(lam) trig(lam u) dlam`` for a vectorised ``fn``.

    Composite Gauss-Legendre on ``[0, cutoff]`` with panels resolving the
    oscillation, plus three integration-by-parts terms for the tail (``fn``
    must be smooth and decaying beyond ``cutoff``; derivatives by central
    differences).
    """
    nodes, weights = uniform_panels(cutoff, u, order)
    trig = np.cos if kind == "cos" else np.sin
    vals = np.asarray(fn(nodes), float)
    body = float(weights @ (vals * trig(nodes * u)))
    d = 1e-4 * cutoff
    f0, fp, fm = (float(np.asarray(fn(np.array([x])), float)[0]) for x in (cutoff, cutoff + d, cutoff - d))
    df = (fp - fm) / (2 * d)
    d2f = (fp - 2 * f0 + fm) / d ** 2
    L = cutoff
    s, c = np.sin(L * u), np.cos(L * u)
    if kind == "cos":
        tail = -f0 * s / u - df * c / u ** 2 + d2f * s / u ** 3
    else:
        tail = f0 * c / u - df * s / u ** 2 - d2f * c / u ** 3
    return body + tail


def fourier_cos(fn, u: float, cutoff: float = 2000.0, order: int = 10) -> float:
    """``int_0^inf fn(lam) cos(lam u) dlam`` for a vectorised, decaying ``fn``."""
    u = abs(float(u))
    if u == 0.0:
        return integrate.quad(lambda x: float(np.asarray(fn(np.array([x])))[0]), 0.0, np.inf, limit=400)[0]
    return _fourier_half_line(fn, u, "cos", cutoff, order)


def fourier_sin(fn, u: float, cutoff: float = 2000.0, order: int = 10) -> float:
    """``int_0^inf fn(lam) sin(lam u) dlam`` for a vectorised, decaying ``fn``."""
    if u == 0.0:
        return 0.0
    sign = 1.0 if u > 0 else -1.0
    return sign * _fourier_half_line(fn, abs(float(u)), "sin", cutoff, order)


def uniform_panels(cutoff: float, max_lag: float, order: int = 10):
    """Gauss-Legendre panels on ``[0, cutoff]`` resolving ``cos(lam u)`` for ``|u| <= max_lag``."""
    width = min(0.25, np.pi / (2 * max(max_lag, 1e-9)))
    npan = int(np.ceil(cutoff / width))
    edges = np.linspace(0.0, cutoff, npan + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    nodes = (half[:, None] * x + 0.5 * (edges[:-1] + edges[1:])[:, None]).ravel()
    return nodes, (half[:, None] * w).ravel()


def trapezoid_weights(t) -> np.ndarray:
    t = np.asarray(t, float)
    w = np.zeros_like(t)
    h = np.diff(t)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w
