"""Finite-sample efficiencies of first-eigenvector estimators.

Example::

    python scripts/fse_table.py --family t5 --reps 2000 --out results/table1_t5.csv
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wsign.bench import FseExperiment, run_fse
from wsign.cli import write_csv
from wsign.elliptical import EllipticalModel


@dataclass
class FseTableConfig:
    family: str = "t5"
    n_list: tuple = (20, 50, 100, 300, 500)
    reps: int = 2000
    seed: int = 20240
    threads: int | None = None

    def model(self):
        sigma = np.diag([4.0, 3.0, 2.0, 1.0])
        if self.family.lower() in ("mvn", "normal"):
            return EllipticalModel.normal(np.zeros(4), sigma)
        return EllipticalModel.student_t(int(self.family.lstrip("t")), np.zeros(4), sigma)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="t5", help="t5, t6, t10, t15, t25 or MVN")
    ap.add_argument("--n", type=int, nargs="+", default=[20, 50, 100, 300, 500])
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    cfg = FseTableConfig(args.family, tuple(args.n), args.reps, args.seed, args.threads)
    res = run_fse(FseExperiment(cfg.model(), cfg.n_list, cfg.reps, seed=cfg.seed, threads=cfg.threads))
    ests, rows = res.table_rows()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, ["n", *ests], [[n, *vals] for n, vals in rows])


if __name__ == "__main__":
    main()
