"""Convergence of the spinor/tensor Lagrangian identity over many seeded fields.

    python3 scripts/identity_check.py --fields 20
"""

import argparse
from dataclasses import dataclass

import numpy as np

from spinorless import lagrangian as lg


@dataclass
class IdentityConfig:
    fields: int = 20
    samples: int = 200
    h: float = 0.05


def run(cfg):
    ratios = []
    for seed in range(cfg.fields):
        rng = np.random.default_rng(seed)
        field_, pot = lg.random_field(rng), lg.random_potential(rng)
        pts = lg.sample_points(rng, cfg.samples)
        ratio, c, f = lg.convergence_ratio(field_, pot, pts, cfg.h)
        ratios.append(ratio)
        print(f"seed={seed:2d} max|res| h={c.max:.3e} h/2={f.max:.3e} ratio={ratio:.3f} skipped={c.n_skipped}")
    r = np.array(ratios)
    print(f"ratio range [{r.min():.3f}, {r.max():.3f}], all in [3,5]: {bool(np.all((r >= 3) & (r <= 5)))}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--fields", type=int, default=20)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--h", type=float, default=0.05)
    a = p.parse_args()
    run(IdentityConfig(a.fields, a.samples, a.h))
