"""Plot-ready eigenvector influence-function norms on a 2-D grid.

Covers the sample covariance, SCM, Tyler and WSCM estimators under
Normal(0, diag(2, 1)); one CSV row per (estimator, grid point).

Example::

    python scripts/influence_surfaces.py --step 0.25 --out results/influence.csv
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wsign.asymptotics import cartesian_grid, influence_grid
from wsign.cli import write_csv
from wsign.elliptical import EllipticalModel


@dataclass
class SurfaceConfig:
    limit: float = 5.0
    step: float = 0.25
    mc: int = 200_000
    seed: int = 0
    estimators: tuple = ("SAMPLE_COV_EVEC", "SCM_EVEC", "TYLER_EVEC", "WSCM_EVEC(HSD)", "WSCM_EVEC(MHD)",
                         "WSCM_EVEC(PD)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--limit", type=float, default=5.0)
    ap.add_argument("--step", type=float, default=0.25)
    ap.add_argument("--mc", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    cfg = SurfaceConfig(args.limit, args.step, args.mc, args.seed)
    model = EllipticalModel.normal(np.zeros(2), np.diag([2.0, 1.0]))
    res = influence_grid(model, cartesian_grid(cfg.limit, cfg.step), cfg.estimators, mc=cfg.mc, seed=cfg.seed)
    rows = [[lab, *pt, v] for lab in res.estimators for pt, v in zip(res.grid_points, res.if_norms[lab])]
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, ["estimator", "x0_1", "x0_2", "if_norm"], rows)


if __name__ == "__main__":
    main()
