"""Least favourable spectral densities and minimax-robust characteristics.

Densities live on the nodes of a :class:`FrequencyGrid` (``lam >= 0``, even
extension implied), so the clip updates are exact pointwise operations and
power constraints are exact weighted sums.  For fixed ``(f, g)`` the filter
is the Galerkin solution of the kernels module evaluated on the same nodes.

With ``Phi = (A g - E) w`` and ``w = lam^(2n)/D`` the stationarity equations are

    |A f~ + E| w                                   = alpha2 + phi      (g)
    |A g - E| w (1+lam^2)^(n/2) / lam^n            = alpha1 + gamma1 + gamma2   (f)

with ``f~ = (1+lam^2)^n f / lam^(2n)``; solving them for the unknown density
gives the clipped update formulas used by the fixed-point iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from .errors import InfeasibleClass, NoConvergence, SaddleViolated
from .increments import IncrementSpec
from .kernels import IncrementLaguerreBasis
from .quadrature import FrequencyGrid, uniform_panels
from .spectra import DensityModel, WeightFunction, functional_transform

CLASS_KINDS = ("D0-power", "Duv-band", "Deps-contamination")


@dataclass(frozen=True)
class DensityClass:
    """Admissible set for one density.

    ``D0-power``: ``(1/2pi) int d <= power``.
    ``Duv-band``: additionally ``lower <= d <= upper`` pointwise.
    ``Deps-contamination``: additionally ``d >= (1 - eps) nominal``.
    """

    kind: str
    power: float
    lower: DensityModel | None = None
    upper: DensityModel | None = None
    nominal: DensityModel | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in CLASS_KINDS:
            raise ValueError(f"unknown class kind {self.kind!r}")
        if not self.power > 0:
            raise ValueError("power bound must be positive")
        if self.kind == "Duv-band":
            if self.lower is None or self.upper is None:
                raise ValueError("band class needs lower and upper densities")
            lam = np.linspace(0.0, 100.0, 2001)
            if np.any(self.lower(lam) > self.upper(lam) + 1e-15):
                raise ValueError("band class needs lower <= upper")
        if self.kind == "Deps-contamination":
            if self.nominal is None or self.eps is None or not 0 < self.eps < 1:
                raise ValueError("contamination class needs a nominal density and 0 < eps < 1")

    @classmethod
    def power_bound(cls, power: float) -> "DensityClass":
        return cls("D0-power", power)

    @classmethod
    def band(cls, lower: DensityModel, upper: DensityModel, power: float) -> "DensityClass":
        return cls("Duv-band", power, lower=lower, upper=upper)

    @classmethod
    def contamination(cls, nominal: DensityModel, eps: float, power: float) -> "DensityClass":
        return cls("Deps-contamination", power, nominal=nominal, eps=eps)

    def floor(self, lam):
        lam = np.asarray(lam, float)
        if self.kind == "Duv-band":
            return self.lower(lam)
        if self.kind == "Deps-contamination":
            return (1 - self.eps) * self.nominal(lam)
        return np.zeros_like(lam)

    def ceiling(self, lam):
        lam = np.asarray(lam, float)
        if self.kind == "Duv-band":
            return self.upper(lam)
        return np.full_like(lam, np.inf)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "power": self.power}
        for name in ("lower", "upper", "nominal"):
            if getattr(self, name) is not None:
                d[name] = getattr(self, name).to_dict()
        if self.eps is not None:
            d["eps"] = self.eps
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DensityClass":
        dens = {k: DensityModel.from_dict(d[k]) for k in ("lower", "upper", "nominal") if k in d}
        return cls(d["kind"], float(d["power"]), eps=d.get("eps"), **dens)


@dataclass
class MinimaxConfig:
    max_iters: int = 200
    tol: float = 1e-9
    damping: float = 0.5
    min_damping: float = 1.0 / 64
    anderson: int = 5
    basis_size: int = 24
    basis_beta: float = 1.0
    scale: float = 1.0
    cutoff: float | None = None


# ---------------------------------------------------------------------------
# grid context


@dataclass
class GridProblem:
    """Everything the pointwise updates need, tabulated on the nodes."""

    spec: IncrementSpec
    weight: WeightFunction
    freq: FrequencyGrid
    basis: IncrementLaguerreBasis
    basis_values: np.ndarray       # basis transforms, shape (count, K)
    A: np.ndarray

    @classmethod
    def build(cls, spec: IncrementSpec, weight: WeightFunction, cfg: MinimaxConfig | None = None,
              freq: FrequencyGrid | None = None, order: int = 2) -> "GridProblem":
        cfg = cfg or MinimaxConfig()
        basis = IncrementLaguerreBasis(cfg.basis_size, cfg.basis_beta, order, poles=spec.n)
        if freq is None:
            freq = FrequencyGrid.for_problem(spec.n, spec.tau, weight.horizon, cfg.scale, cfg.cutoff,
                                             basis=(basis.count, basis.beta))
        return cls(spec, weight, freq, basis, basis.transform(freq.nodes), functional_transform(weight, freq.nodes))

    @property
    def lam(self) -> np.ndarray:
        return self.freq.nodes

    @property
    def n(self) -> int:
        return self.spec.n

    def lift(self) -> np.ndarray:
        """``(1+lam^2)^n / lam^(2n)``: turns f into the increment-weighted density."""
        s = self.lam ** 2
        return (1 + s) ** self.n / s ** self.n

    def mass(self, d) -> float:
        """``(1/2pi) int_R d`` for an even density sampled on the nodes."""
        return float(self.freq.weights @ d / np.pi)

    def solve(self, f, g):
        """Galerkin filter for tabulated ``(f, g)``: returns ``(E, w, coefficients, P)``."""
        lam, n = self.lam, self.n
        s = lam ** 2
        D = (1 + s) ** n * f + s ** n * g
        if np.any(D <= 0):
            from .errors import DegenerateDensity
            raise DegenerateDensity("f and g vanish together on the grid")
        w = s ** n / D
        B = self.basis_values
        ww = self.freq.weights * w
        P = np.real((B * ww) @ B.conj().T) / np.pi
        b = np.real((B.conj() * (ww * g)) @ self.A) / np.pi
        if not np.any(b):
            x = np.zeros_like(b)
        else:
            d = np.sqrt(np.diag(P))
            x = linalg.solve(P / np.outer(d, d), b / d, assume_a="pos") / d
        return x @ B, w, x, P

    def phi(self, f, g):
        """``Phi = h / X`` of the optimal filter for ``(f, g)``."""
        E, w, _, _ = self.solve(f, g)
        return (self.A * g - E) * w

    def objective(self, Phi, f, g) -> float:
        """``Delta(h; f, g)`` for a fixed characteristic ``h = Phi X``."""
        ft = f * self.lift()
        vals = np.abs(Phi) ** 2 * ft + np.abs(self.A - Phi) ** 2 * g
        return float(self.freq.weights @ vals / np.pi)

    def extremum_value(self, f, g) -> float:
        """``<S a, P^-1 S a> + <Q a, a>`` in the Galerkin discretisation."""
        E, w, x, P = self.solve(f, g)
        q = self.freq.weights @ (np.abs(self.A) ** 2 * g * f * self.lift() * w) / np.pi
        return float(x @ P @ x + q)


# ---------------------------------------------------------------------------
# clipped updates


def _stationarity_terms(prob: GridProblem, f, g, E, w):
    """``(R_f, R_g)``: left-hand sides of the f- and g-equations (before the multiplier)."""
    lam, n = prob.lam, prob.n
    s = lam ** 2
    R_g = np.abs(prob.A * f * prob.lift() + E) * w
    R_f = np.abs(prob.A * g - E) * w * (1 + s) ** (n / 2) / lam ** n
    return R_f, R_g


def _candidate(prob: GridProblem, which: str, f, g, E):
    """``(num, offset)`` such that the unclipped update is ``num / alpha - offset``."""
    lam, n = prob.lam, prob.n
    s = lam ** 2
    if which == "g":
        ft = f * prob.lift()
        return np.abs(prob.A * ft + E), ft
    return lam ** n * np.abs(prob.A * g - E) / (1 + s) ** (n / 2), s ** n * g / (1 + s) ** n


def _clip_update(prob: GridProblem, cls: DensityClass, num, offset, lo, hi):
    """Clip ``num/alpha - offset`` to ``[lo, hi]`` with ``alpha`` fitting the power bound."""

    def dens(alpha):
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = np.where(num > 0, num / alpha, 0.0) - offset
        return np.clip(raw, lo, hi)

    floor_mass = prob.mass(lo)
    if floor_mass > cls.power * (1 + 1e-12):
        raise InfeasibleClass(f"pointwise lower bound has power {floor_mass:.6g} > {cls.power:.6g}")
    if floor_mass >= cls.power * (1 - 1e-12):
        # only the floor is admissible; smallest alpha that clips everything to it
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((num > 0) & (lo + offset > 0), num / (lo + offset), 0.0)
        return lo.copy(), float(np.max(ratio))
    top = np.where(num > 0, hi, lo)
    if np.all(np.isfinite(top)) and prob.mass(top) <= cls.power:
        return top, 0.0
    excess = lambda la: prob.mass(dens(np.exp(la))) - cls.power
    a, b = -1.0, 1.0
    while excess(a) < 0:
        a -= 2.0
        if a < -700:
            raise InfeasibleClass("power bound cannot be met")
    while excess(b) > 0:
        b += 2.0
        if b > 700:
            raise InfeasibleClass("power bound cannot be met")
    la = optimize.brentq(excess, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    alpha = float(np.exp(la))
    return dens(alpha), alpha


# ---------------------------------------------------------------------------
# results


@dataclass
class LeastFavorablePair:
    lam: np.ndarray
    f0_values: np.ndarray
    g0_values: np.ndarray
    alpha1: float
    alpha2: float
    gamma1: np.ndarray
    gamma2: np.ndarray
    phi: np.ndarray
    residuals: dict
    iterations: int
    value: float
    f_class: DensityClass | None = None
    g_class: DensityClass | None = None
    saddle_checked: bool = False
    problem: GridProblem | None = field(default=None, repr=False)
    decay: tuple = (2.0, 2.0)

    @property
    def f0(self) -> DensityModel:
        return DensityModel.tabulated(self.lam, self.f0_values, self.decay[0])

    @property
    def g0(self) -> DensityModel:
        return DensityModel.tabulated(self.lam, self.g0_values, self.decay[1])

    def h(self):
        """``Phi`` and ``h`` of the minimax characteristic on the nodes."""
        prob = self.problem
        Phi = prob.phi(self.f0_values, self.g0_values)
        lam, n = prob.lam, prob.n
        return Phi, Phi * (1 + 1j * lam) ** n / (1j * lam) ** n

    def to_dict(self) -> dict:
        return {"lam": self.lam.tolist(), "f0": self.f0_values.tolist(), "g0": self.g0_values.tolist(),
                "alpha1": self.alpha1, "alpha2": self.alpha2, "gamma1": self.gamma1.tolist(),
                "gamma2": self.gamma2.tolist(), "phi": self.phi.tolist(),
                "residuals": {k: v for k, v in self.residuals.items() if not isinstance(v, np.ndarray)},
                "iterations": self.iterations, "value": self.value, "saddle_checked": self.saddle_checked}


def _active(values, bound, scale):
    # relative to the bound itself so that tiny tail bounds are not confused with each other
    return np.abs(values - bound) <= 1e-10 * np.abs(bound) + 1e-14 * max(scale, 1e-300) * (bound == 0)


def lf_equation_residuals(prob: GridProblem, f, g, alpha1: float, alpha2: float,
                          f_class: DensityClass | None, g_class: DensityClass | None) -> dict:
    """Residuals of the stationarity equations and the recovered Lagrange functions.

    Lagrange functions are the pointwise residual on the active sets of the
    clip and zero elsewhere; the returned ``stationarity_*`` arrays are then
    zero on active sets and ``(lhs - alpha)/alpha`` off them.  ``sign_*``
    reports the largest sign violation (positive part of ``gamma1``, ``phi``
    and negative part of ``gamma2``), again relative to the multiplier.
    """
    lam = prob.lam
    E, w, _, _ = prob.solve(f, g)
    R_f, R_g = _stationarity_terms(prob, f, g, E, w)
    out: dict = {}
    K = lam.size
    gamma1 = np.zeros(K)
    gamma2 = np.zeros(K)
    phi = np.zeros(K)
    if g_class is not None:
        lo = g_class.floor(lam)
        act = _active(g, lo, np.max(g))
        norm = alpha2 if alpha2 > 0 else max(float(np.max(R_g)), 1e-300)
        phi = np.where(act, R_g - alpha2, 0.0)
        res = np.where(act, 0.0, R_g - alpha2) / norm
        out["stationarity_g"] = res
        out["stationarity_g_sup"] = float(np.max(np.abs(res)))
        out["sign_g"] = float(max(0.0, np.max(phi)) / norm)
        num, off = _candidate(prob, "g", f, g, E)
        with np.errstate(divide="ignore", invalid="ignore"):
            upd = np.clip(np.where(num > 0, num / alpha2, 0.0) - off, lo, g_class.ceiling(lam)) if alpha2 > 0 else g
        out["clip_g"] = float(np.max(np.abs(upd - g)) / max(np.max(g), 1e-300))
        out["power_g"] = prob.mass(g) - g_class.power
    if f_class is not None:
        lo, hi = f_class.floor(lam), f_class.ceiling(lam)
        act_lo = _active(f, lo, np.max(f))
        act_hi = _active(f, hi, np.max(f)) & ~act_lo
        norm = alpha1 if alpha1 > 0 else max(float(np.max(R_f)), 1e-300)
        gamma1 = np.where(act_lo, R_f - alpha1, 0.0)
        gamma2 = np.where(act_hi, R_f - alpha1, 0.0)
        res = np.where(act_lo | act_hi, 0.0, R_f - alpha1) / norm
        out["stationarity_f"] = res
        out["stationarity_f_sup"] = float(np.max(np.abs(res)))
        out["sign_f"] = float(max(0.0, np.max(gamma1), -np.min(gamma2)) / norm)
        num, off = _candidate(prob, "f", f, g, E)
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = np.where(num > 0, num / alpha1, 0.0) - off if alpha1 > 0 else np.where(num > 0, np.inf, -off)
        upd = np.clip(raw, lo, hi)
        out["clip_f"] = float(np.max(np.abs(upd - f)) / max(np.max(f), 1e-300))
        out["power_f"] = prob.mass(f) - f_class.power
    out["gamma1"], out["gamma2"], out["phi"] = gamma1, gamma2, phi
    return out


# ---------------------------------------------------------------------------
# fixed point


def _initial(prob: GridProblem, cls: DensityClass, guess):
    lam = prob.lam
    lo, hi = cls.floor(lam), cls.ceiling(lam)
    d = guess(lam) if guess is not None else 1.0 / (1 + lam ** 2)
    d = np.clip(d, lo, hi)
    room = cls.power - prob.mass(lo)
    if room < -1e-12 * cls.power:
        raise InfeasibleClass(f"pointwise lower bound exceeds the power bound {cls.power:.6g}")
    room = max(room, 0.0)
    extra = d - lo
    if prob.mass(extra) > room and prob.mass(extra) > 0:
        d = lo + extra * room / prob.mass(extra)
    elif cls.kind != "Duv-band" and prob.mass(extra) > 0:
        d = lo + extra * room / prob.mass(extra)
    return d


def _sweeps(prob: GridProblem, cfg: MinimaxConfig, f, g, f_class, g_class, max_iters=None):
    """Damped, Anderson-mixed clipped updates; returns ``(f, g, sweeps)``."""
    lam = prob.lam
    max_iters = max_iters or cfg.max_iters
    rho = cfg.damping
    prev = np.inf
    best = None
    lo_f, hi_f = (f_class.floor(lam), f_class.ceiling(lam)) if f_class is not None else (f, f)
    lo_g, hi_g = (g_class.floor(lam), g_class.ceiling(lam)) if g_class is not None else (g, g)
    K = lam.size
    sf, sg = max(np.max(f), 1e-300), max(np.max(g), 1e-300)
    hist_x, hist_r = [], []
    for it in range(1, max_iters + 1):
        E, _, _, _ = prob.solve(f, g)
        f_new, g_new = f, g
        if f_class is not None:
            f_new, _ = _clip_update(prob, f_class, *_candidate(prob, "f", f, g, E), lo_f, hi_f)
        if g_class is not None:
            g_new, _ = _clip_update(prob, g_class, *_candidate(prob, "g", f, g, E), lo_g, hi_g)
        change = max(np.max(np.abs(f_new - f)) / np.max(np.abs(f_new)),
                     np.max(np.abs(g_new - g)) / max(np.max(np.abs(g_new)), 1e-300))
        if best is None or change < best[0]:
            best = (change, f_new, g_new)
        if change < cfg.tol:
            return f_new, g_new, it
        if change > prev:
            rho = max(rho / 2, cfg.min_damping)
            hist_x, hist_r = [], []
        prev = change
        x = np.concatenate([f / sf, g / sg])
        r = np.concatenate([f_new / sf, g_new / sg]) - x
        step = x + rho * r
        if cfg.anderson > 0:
            hist_x.append(x)
            hist_r.append(r)
            hist_x, hist_r = hist_x[-(cfg.anderson + 1):], hist_r[-(cfg.anderson + 1):]
            if len(hist_x) > 1:
                dX = np.diff(np.array(hist_x), axis=0).T
                dR = np.diff(np.array(hist_r), axis=0).T
                coef = np.linalg.lstsq(dR, r, rcond=None)[0]
                step = x + rho * r - (dX + rho * dR) @ coef
        f = np.clip(step[:K] * sf, lo_f, hi_f)
        g = np.clip(step[K:] * sg, lo_g, hi_g)
    raise NoConvergence(f"no convergence after {max_iters} sweeps (change {best[0]:.2e})",
                        best={"f": best[1], "g": best[2], "change": best[0]})


def _block_ascent(prob: GridProblem, cfg: MinimaxConfig, f, g, f_class, g_class):
    """Both densities unknown: alternate exact single-density solves.

    The joint clipped map has a slow mode where both densities are interior,
    so the g-block and f-block are solved in turn to convergence and the
    outer map is Anderson-accelerated.
    """
    lam = prob.lam
    K = lam.size
    lo_f, hi_f, lo_g, hi_g = f_class.floor(lam), f_class.ceiling(lam), g_class.floor(lam), g_class.ceiling(lam)
    sf, sg = max(np.max(f), 1e-300), max(np.max(g), 1e-300)
    hist_x, hist_r = [], []
    best = None
    sweeps = 0
    for outer in range(1, cfg.max_iters + 1):
        _, g_new, k1 = _sweeps(prob, cfg, f, g, None, g_class)
        f_new, _, k2 = _sweeps(prob, cfg, f, g_new, f_class, None)
        sweeps += k1 + k2
        change = max(np.max(np.abs(f_new - f)) / np.max(f_new), np.max(np.abs(g_new - g)) / np.max(g_new))
        if best is None or change < best[0]:
            best = (change, f_new, g_new)
        if change < cfg.tol:
            return f_new, g_new, sweeps
        x = np.concatenate([f / sf, g / sg])
        r = np.concatenate([f_new / sf, g_new / sg]) - x
        hist_x.append(x)
        hist_r.append(r)
        hist_x, hist_r = hist_x[-(cfg.anderson + 1):], hist_r[-(cfg.anderson + 1):]
        step = x + r
        if len(hist_x) > 1:
            dX = np.diff(np.array(hist_x), axis=0).T
            dR = np.diff(np.array(hist_r), axis=0).T
            coef = np.linalg.lstsq(dR, r, rcond=None)[0]
            step = x + r - (dX + dR) @ coef
        f = np.clip(step[:K] * sf, lo_f, hi_f)
        g = np.clip(step[K:] * sg, lo_g, hi_g)
    raise NoConvergence(f"no convergence after {cfg.max_iters} outer block steps (change {best[0]:.2e})",
                        best={"f": best[1], "g": best[2], "change": best[0]})


def least_favorable(spec: IncrementSpec, w: WeightFunction, f_class: DensityClass | None = None,
                    g_class: DensityClass | None = None, known_f: DensityModel | None = None,
                    known_g: DensityModel | None = None, f_init: DensityModel | None = None,
                    g_init: DensityModel | None = None, cfg: MinimaxConfig | None = None,
                    freq: FrequencyGrid | None = None) -> LeastFavorablePair:
    """Fixed-point iteration for the least favourable pair.

    Exactly one of ``f_class``/``known_f`` and one of ``g_class``/``known_g``
    must be given.  Each sweep solves the filter for the current pair,
    applies the clipped update to every unknown density with its multiplier
    fitted to the power bound, and mixes ``new = (1-rho) old + rho update``;
    ``rho`` is halved whenever the change grows.  With both densities
    unknown the two blocks are solved alternately (see ``_block_ascent``).
    """
    cfg = cfg or MinimaxConfig()
    if (f_class is None) == (known_f is None) or (g_class is None) == (known_g is None):
        raise ValueError("give exactly one of class / known density for each of f and g")
    prob = GridProblem.build(spec, w, cfg, freq)
    lam = prob.lam
    f = known_f(lam) if known_f is not None else _initial(prob, f_class, f_init)
    g = known_g(lam) if known_g is not None else _initial(prob, g_class, g_init)
    decay = (known_f.decay if known_f is not None else (f_init.decay if f_init is not None else 2.0),
             known_g.decay if known_g is not None else (g_init.decay if g_init is not None else 2.0))
    decay = tuple(min(d, 50.0) if np.isfinite(d) else 50.0 for d in decay)
    alpha1 = alpha2 = 0.0
    if w.is_zero:
        res = lf_equation_residuals(prob, f, g, 0.0, 0.0, None, None)
        return LeastFavorablePair(lam, f, g, 0.0, 0.0, res["gamma1"], res["gamma2"], res["phi"],
                                  {}, 0, 0.0, f_class, g_class, False, prob, decay)

    if f_class is not None and g_class is not None:
        f, g, it = _block_ascent(prob, cfg, f, g, f_class, g_class)
    else:
        f, g, it = _sweeps(prob, cfg, f, g, f_class, g_class)
    # final multipliers for the returned pair
    E, _, _, _ = prob.solve(f, g)
    if f_class is not None:
        alpha1 = _clip_update(prob, f_class, *_candidate(prob, "f", f, g, E),
                              f_class.floor(lam), f_class.ceiling(lam))[1]
    if g_class is not None:
        alpha2 = _clip_update(prob, g_class, *_candidate(prob, "g", f, g, E),
                              g_class.floor(lam), g_class.ceiling(lam))[1]
    res = lf_equation_residuals(prob, f, g, alpha1, alpha2, f_class, g_class)
    summary = {k: v for k, v in res.items() if k not in ("gamma1", "gamma2", "phi")}
    value = prob.objective(prob.phi(f, g), f, g)
    summary["extremum_value"] = prob.extremum_value(f, g)
    return LeastFavorablePair(lam, f, g, alpha1, alpha2, res["gamma1"], res["gamma2"], res["phi"],
                              summary, it, value, f_class, g_class, False, prob, decay)


def lf_fixed_point_D0(spec: IncrementSpec, w: WeightFunction, P1: float | None = None,
                      P2: float | None = None, known_f: DensityModel | None = None,
                      known_g: DensityModel | None = None, **kw) -> LeastFavorablePair:
    """Least favourable pair in the power classes; one density may be known."""
    f_class = None if known_f is not None else DensityClass.power_bound(P1)
    g_class = None if known_g is not None else DensityClass.power_bound(P2)
    return least_favorable(spec, w, f_class, g_class, known_f, known_g, **kw)


def lf_fixed_point_DuvEps(spec: IncrementSpec, w: WeightFunction, f_class: DensityClass | None = None,
                          g_class: DensityClass | None = None, known_f: DensityModel | None = None,
                          known_g: DensityModel | None = None, **kw) -> LeastFavorablePair:
    """Least favourable pair for a band class of f and a contamination class of g."""
    if f_class is not None and f_class.kind != "Duv-band":
        raise ValueError("f class must be a band class")
    if g_class is not None and g_class.kind != "Deps-contamination":
        raise ValueError("g class must be a contamination class")
    return least_favorable(spec, w, f_class, g_class, known_f, known_g, **kw)


# ---------------------------------------------------------------------------
# saddle point check


def _random_member(prob: GridProblem, cls: DensityClass, rng) -> np.ndarray:
    """A random density of the class with the power bound attained where possible."""
    lam = prob.lam
    lo, hi = cls.floor(lam), cls.ceiling(lam)
    centre = rng.uniform(0, 4)
    width = rng.uniform(0.3, 3)
    bump = np.exp(-0.5 * ((lam - centre) / width) ** 2) + rng.uniform(0, 1) / (1 + lam ** 2)
    if cls.kind == "Duv-band":
        d = lo + rng.uniform(0, 1) * bump / np.max(bump) * (hi - lo)
        room = cls.power - prob.mass(lo)
        extra = prob.mass(d - lo)
        if extra > room:
            d = lo + (d - lo) * room / extra
        return d
    room = cls.power - prob.mass(lo)
    return lo + bump * room / prob.mass(bump)


@dataclass
class SaddleReport:
    value: float
    max_density_excess: float
    min_characteristic_gain: float
    slack: float
    samples: int
    passed: bool
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"value": self.value, "max_density_excess": self.max_density_excess,
                "min_characteristic_gain": self.min_characteristic_gain, "slack": self.slack,
                "samples": self.samples, "passed": self.passed}


def saddle_check(pair: LeastFavorablePair, samples: int = 50, seed: int = 0, rel_slack: float = 1e-3,
                 theta: float = 1.0, raise_on_violation: bool = True,
                 char_cutoff: float = 2000.0) -> SaddleReport:
    """Check both saddle inequalities by random perturbation.

    Densities: ``Delta(h0; f, g) <= Delta(h0; f0, g0) + slack`` for random
    ``(f, g) = (1-theta)(f0, g0) + theta (members of the classes)``.
    Characteristics: ``Delta(h; f0, g0) >= Delta(h0; f0, g0) - slack`` for
    ``Phi = Phi0 + theta * delta`` with ``delta`` in the span of
    ``e^{i lam t}(1 - e^{-i lam tau})^n``, ``t <= 0``.  An apparent violation
    is re-tested at ``theta/10`` and ``theta/100``: it is genuine only if it
    persists and shrinks no faster than linearly.
    """
    prob = pair.problem
    lam = prob.lam
    f0, g0 = pair.f0_values, pair.g0_values
    Phi0 = prob.phi(f0, g0)
    base = prob.objective(Phi0, f0, g0)
    slack = rel_slack * abs(base)
    rng = np.random.default_rng(seed)
    tau, n = prob.spec.tau, prob.n
    t_max = 5 * tau * n

    def dens_excess(fr, gr, th):
        f = f0 if fr is None else (1 - th) * f0 + th * fr
        g = g0 if gr is None else (1 - th) * g0 + th * gr
        return prob.objective(Phi0, f, g) - base

    # characteristic perturbations oscillate without decay, so they are
    # integrated on dense uniform panels rather than the mapped-tail nodes
    fine, fw = uniform_panels(char_cutoff, t_max + n * tau)
    ff, gf = np.interp(fine, lam, f0), np.interp(fine, lam, g0)
    _, _, x, _ = prob.solve(f0, g0)
    s = fine ** 2
    wf = s ** n / ((1 + s) ** n * ff + s ** n * gf)
    Af = functional_transform(prob.weight, fine)
    Ef = np.zeros(fine.size, complex)
    for k in range(0, fine.size, 20000):
        Ef[k:k + 20000] = x @ prob.basis.transform(fine[k:k + 20000])
    Phif = (Af * gf - Ef) * wf
    ftf = (1 + s) ** n * ff / s ** n
    lat = (1 - np.exp(-1j * fine * tau)) ** n

    def fine_objective(Phi):
        return float(fw @ (np.abs(Phi) ** 2 * ftf + np.abs(Af - Phi) ** 2 * gf) / np.pi)

    base_fine = fine_objective(Phif)

    def char_gain(delta, th):
        return fine_objective(Phif + th * delta) - base_fine

    violations = []
    max_exc = -np.inf
    min_gain = np.inf
    for _ in range(samples):
        fr = _random_member(prob, pair.f_class, rng) if pair.f_class is not None else None
        gr = _random_member(prob, pair.g_class, rng) if pair.g_class is not None else None
        exc = dens_excess(fr, gr, theta)
        max_exc = max(max_exc, exc)
        if exc > slack:
            small = [dens_excess(fr, gr, theta * r) for r in (0.1, 0.01)]
            if small[0] > 0.05 * exc and small[1] > 0.005 * exc:
                violations.append({"kind": "density", "excess": exc, "refined": small})
        coef = rng.standard_normal(4)
        ts = -rng.uniform(0, t_max, size=4)
        delta = (np.exp(1j * np.outer(fine, ts)) @ coef) * lat
        size = float(fw @ (np.abs(delta) ** 2 * (ftf + gf)) / np.pi)
        scale = 0.1 * np.sqrt(abs(base) / max(size, 1e-300))
        gain = char_gain(delta * scale, theta)
        min_gain = min(min_gain, gain)
        if gain < -slack:
            small = [char_gain(delta * scale, theta * r) for r in (0.1, 0.01)]
            if small[0] < -0.05 * abs(gain) and small[1] < -0.005 * abs(gain):
                violations.append({"kind": "characteristic", "gain": gain, "refined": small})
    report = SaddleReport(base, float(max_exc), float(min_gain), slack, samples, not violations, violations)
    pair.saddle_checked = report.passed
    if violations and raise_on_violation:
        raise SaddleViolated(f"{len(violations)} saddle violations; first {violations[0]}", sample=violations[0])
    return report
