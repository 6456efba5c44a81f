"""Error against m for the fixed-m rules on the synthetic SPD and nonsymmetric matrices."""

import argparse
from pathlib import Path

from fracpow.bench import ExperimentConfig, run_convergence


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--n", type=int, default=100)
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    grid = tuple(range(8, 129, 8))
    for kind in ("spd", "ns"):
        for kappa in ("1e2", "1e7"):
            desc = f"{kind}:{args.n}:{kappa}"
            path = out / f"convergence_{kind}_{kappa}.csv"
            run_convergence(ExperimentConfig(matrix=desc, m_grid=grid, out=str(path)))
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
