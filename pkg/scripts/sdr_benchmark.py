"""Out-of-sample prediction error of robust and classical SDR, clean and contaminated.

Example::

    python scripts/sdr_benchmark.py --reps 100 --out results/sdr.csv
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

from wsign.bench import SdrBenchmark, run_sdr_benchmark
from wsign.cli import write_csv


@dataclass
class SdrConfig:
    p_list: tuple = (5, 10, 25, 50, 75, 100, 125, 150)
    reps: int = 100
    seed: int = 2024
    weight: str = "PD"
    threads: int | None = None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, nargs="+", default=list(SdrConfig.p_list))
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--weight", default="PD")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    cfg = SdrConfig(tuple(args.p), args.reps, args.seed, args.weight.upper(), args.threads)
    rows = []
    for outliers in (False, True):
        res = run_sdr_benchmark(SdrBenchmark(p_list=cfg.p_list, reps=cfg.reps, outliers=outliers, seed=cfg.seed,
                                             weight=cfg.weight, threads=cfg.threads))
        for p in res.p_list:
            rows.append([p, outliers, res.robust[p], res.classical[p], res.robust_se[p], res.classical_se[p]])
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, ["p", "outliers", "robust_mse", "classical_mse", "robust_se", "classical_se"], rows)


if __name__ == "__main__":
    main()
