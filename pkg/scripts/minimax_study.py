"""Least favourable densities and minimax error for the power and band/contamination classes.

Sweeps the noise power bound for the power class (known signal density) and
the contamination level for the band/contamination class, and reports the
minimax error, the multipliers and the saddle-point check.

    python scripts/minimax_study.py --n 1 2
"""

import argparse
from dataclasses import dataclass, field

import numpy as np

from incfilter.errors import NoConvergence
from incfilter.increments import IncrementSpec
from incfilter.minimax import DensityClass, lf_fixed_point_D0, lf_fixed_point_DuvEps, saddle_check
from incfilter.spectra import DensityModel, WeightFunction

F = DensityModel.rational([1.0], [1.0, 2.0, 1.0])
G = DensityModel.rational([1.0], [1.0, 1.0])


@dataclass
class StudyConfig:
    orders: tuple = (1, 2)
    tau: float = 1.0
    powers: tuple = (0.25, 0.5, 1.0, 2.0)
    eps: tuple = (0.1, 0.3, 0.5)
    band: tuple = (0.5, 2.0)
    signal_power: float = 0.4
    noise_power: float = 0.6
    saddle_samples: int = 20
    # zero-mean weight a(t) = e^-t - 2 e^-2t
    weight: WeightFunction = field(default_factory=lambda: WeightFunction.exppoly([(1.0, [1.0]), (2.0, [-2.0])]))


def power_class(cfg: StudyConfig, n: int):
    spec = IncrementSpec(n, cfg.tau)
    for P2 in cfg.powers:
        pair = lf_fixed_point_D0(spec, cfg.weight, P2=P2, known_f=F, g_init=G)
        sad = saddle_check(pair, samples=cfg.saddle_samples, raise_on_violation=False)
        print(f"n={n} D0    P2={P2:<5g} Delta={pair.value:.6g} alpha2={pair.alpha2:.4g} "
              f"clip={pair.residuals['clip_g']:.1e} saddle={sad.passed} iters={pair.iterations}")


def band_contamination(cfg: StudyConfig, n: int):
    spec = IncrementSpec(n, cfg.tau)
    fc = DensityClass.band(F.scaled(cfg.band[0]), F.scaled(cfg.band[1]), cfg.signal_power)
    for eps in cfg.eps:
        gc = DensityClass.contamination(G, eps, cfg.noise_power)
        try:
            pair = lf_fixed_point_DuvEps(spec, cfg.weight, f_class=fc, g_class=gc, f_init=F, g_init=G)
        except NoConvergence as exc:
            print(f"n={n} DuvEps eps={eps:<4g} no convergence: {exc}")
            continue
        r = pair.residuals
        sad = saddle_check(pair, samples=cfg.saddle_samples, raise_on_violation=False)
        floor = np.mean(pair.phi < 0)
        print(f"n={n} DuvEps eps={eps:<4g} Delta={pair.value:.6g} alpha1={pair.alpha1:.4g} alpha2={pair.alpha2:.4g} "
              f"stat={max(r['stationarity_f_sup'], r['stationarity_g_sup']):.1e} floor-active={floor:.2f} "
              f"saddle={sad.passed}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, nargs="+", default=list(StudyConfig.orders))
    cfg = StudyConfig(orders=tuple(p.parse_args().n))
    for n in cfg.orders:
        power_class(cfg, n)
        band_contamination(cfg, n)


if __name__ == "__main__":
    main()
