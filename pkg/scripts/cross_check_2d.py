"""Ground gap eigenvalue of the planar pencil against the radial model.

    python3 scripts/cross_check_2d.py --grids 24,32,48
"""

import argparse
import time
from dataclasses import dataclass

from spinorless import planar as pl
from spinorless import radial as rd


@dataclass
class CrossConfig:
    alpha: float = 0.2
    box: float = 30.0
    grids: tuple = (24, 32, 48)
    radial_h: float = 0.0125


def run(cfg):
    pot = rd.ScaledPotential(cfg.alpha, rd.gaussian_profile, rd.gaussian_profile_derivative)
    ref = rd.ground_state("model", rd.RadialChannel(1), pot, rd.RadialGrid.for_alpha(cfg.alpha, cfg.radial_h))
    print(f"radial k=1: eps={ref.eps:.10f} (estimate {ref.error_estimate:.1e})")
    prev = None
    for N in cfg.grids:
        t0 = time.perf_counter()
        g = pl.PlanarGrid(cfg.box, N)
        P = pl.assemble_pencil(g, pl.PlanarPotential.gaussian_well(g, cfg.alpha))
        gs = pl.gap_eigenpairs(P, 4)
        e = gs.eps[0]
        line = f"N={N:3d} h={g.h:.4f} eps={e:.10f} diff={e - ref.eps:+.3e}"
        if prev is not None:
            est = abs(e - prev[1]) / ((prev[0] / g.h) ** 2 - 1)
            line += f" richardson={est:.2e}"
        print(line + f" lowest-4 spread={gs.eps.max() - gs.eps.min():.1e} "
                     f"({time.perf_counter() - t0:.1f}s)")
        prev = (g.h, e)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--box", type=float, default=30.0)
    p.add_argument("--grids", default="24,32,48")
    a = p.parse_args()
    run(CrossConfig(a.alpha, a.box, tuple(int(x) for x in a.grids.split(","))))
