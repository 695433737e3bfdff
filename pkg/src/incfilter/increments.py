"""Increment algebra for the operator (1 - B_tau)^n."""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import PathTooShort, TauNotOnGrid

MAX_ORDER = 30


@dataclass(frozen=True)
class IncrementSpec:
    n: int
    tau: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"increment order n must be a positive integer, got {self.n}")
        if self.n > MAX_ORDER:
            raise ValueError(f"increment order n={self.n} exceeds {MAX_ORDER}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def increment_coefficients(spec: IncrementSpec) -> np.ndarray:
    """Signed binomial row ``(-1)^l C(n, l)``, ``l = 0..n``, as int64."""
    n = spec.n
    return np.array([(-1) ** l * comb(n, l) for l in range(n + 1)], dtype=np.int64)


def step_composition(spec: IncrementSpec, k: int) -> np.ndarray:
    """Coefficients of ``(1 + x + ... + x^(k-1))^n``.

    With these, the increment with step ``k*tau`` is
    ``sum_l A_l * incr(t - l*tau, tau)``.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    base = [1] * int(k)
    out = [1]
    for _ in range(spec.n):
        new = [0] * (len(out) + len(base) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(base):
                new[i + j] += a * b
        out = new
    return np.array(out, dtype=np.int64)


def _grid_shift(tau, grid_step):
    ratio = tau / grid_step
    shift = int(round(ratio))
    if shift < 1 or abs(ratio - shift) > 1e-9 * max(1.0, abs(ratio)):
        raise TauNotOnGrid(f"tau={tau} is not an integer multiple of grid_step={grid_step}")
    return shift


def apply_increment(path, spec: IncrementSpec, grid_step: float) -> np.ndarray:
    """Apply ``(1 - B_tau)^n`` to samples on a uniform grid.

    ``out[i]`` corresponds to ``path[i + n*shift]``: the first ``n*shift``
    samples have no complete history and are dropped.
    """
    path = np.asarray(path, dtype=float)
    shift = _grid_shift(spec.tau, grid_step)
    span = spec.n * shift
    if path.shape[-1] <= span:
        raise PathTooShort(f"need more than {span} samples, got {path.shape[-1]}")
    m = path.shape[-1] - span
    out = np.zeros(path.shape[:-1] + (m,))
    for l, c in enumerate(increment_coefficients(spec)):
        start = span - l * shift
        out += c * path[..., start:start + m]
    return out
