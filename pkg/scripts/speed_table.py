"""Predicted convergence speeds of DE, GJ1 and GJ2 over a condition-number grid."""

import argparse
from pathlib import Path

import numpy as np

from fracpow.bench import run_speed_table
from fracpow.convergence import crossover_kappa


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--step", type=float, default=0.25, help="log10 step of the kappa grid")
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "speed.csv"
    kappas = list(10.0 ** np.arange(0.0, 16.0 + 1e-9, args.step))
    alphas = [round(0.1 * k, 1) for k in range(1, 10)]
    run_speed_table(kappas, alphas, str(path))
    for a in alphas:
        k = crossover_kappa(a, kappas)
        print(f"alpha={a}: DE beats GJ2 from kappa = {k:.3g}" if k else f"alpha={a}: never")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
