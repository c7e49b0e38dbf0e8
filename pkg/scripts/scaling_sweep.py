"""Model vs Klein-Gordon ground states across alpha, with local slopes.

    python3 scripts/scaling_sweep.py --k 1 --h 0.0125
"""

import argparse
from dataclasses import dataclass

import numpy as np

from spinorless import radial as rd


@dataclass
class SweepConfig:
    k: int = 1
    sign: int = 1
    alphas: tuple = (0.2, 0.15, 0.1, 0.07, 0.05)
    depth: float = 1.0
    h: float = 0.0125
    extent: float = 30.0


def run(cfg):
    res = rd.scaling_sweep(
        rd.RadialChannel(cfg.k, cfg.sign),
        cfg.alphas,
        profile=lambda s: cfg.depth * rd.gaussian_profile(s),
        dprofile=lambda s: cfg.depth * rd.gaussian_profile_derivative(s),
        h=cfg.h,
        extent=cfg.extent,
    )
    a = np.array([r["alpha"] for r in res.rows])
    d = np.array([r["delta"] for r in res.rows])
    print(f"{'alpha':>6} {'eps_model':>18} {'eps_kg':>18} {'delta':>11} {'err':>9} "
          f"{'delta/a^4':>10} {'delta/a^6':>10} {'slope':>6}")
    for i, r in enumerate(res.rows):
        slope = np.log(d[i] / d[i - 1]) / np.log(a[i] / a[i - 1]) if i and d[i] > 0 else np.nan
        print(f"{r['alpha']:6.3f} {r['eps_model']:18.14f} {r['eps_kg']:18.14f} {r['delta']:11.4e} "
              f"{r['richardson_err']:9.1e} {r['delta'] / r['alpha']**4:10.3e} "
              f"{r['delta'] / r['alpha']**6:10.3e} {slope:6.3f}")
    if res.exact_coincidence:
        print("exact coincidence")
    else:
        print(f"exponent {res.exponent:.4f} +- {res.stderr:.1e}, reliable={res.reliable}")
    print(f"Pauli exponent {res.pauli_exponent:.4f}, E/alpha^2 spread {res.e_spread:.4f}")
    return res


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--sign", type=int, default=1, choices=[1, -1])
    p.add_argument("--depth", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.0125)
    p.add_argument("--alphas", default="0.2,0.15,0.1,0.07,0.05")
    a = p.parse_args()
    run(SweepConfig(a.k, a.sign, tuple(float(x) for x in a.alphas.split(",")), a.depth, a.h))
