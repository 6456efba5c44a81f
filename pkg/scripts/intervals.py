"""Truncated DE intervals and their sensitivity to rough norm estimates.

For each matrix the interval [l, r] is computed from accurate norms
(rel_tol 1e-8) and from cheap ones (rel_tol 1e-2), at several tolerances.
"""

import argparse
import sys

from fracpow.bench import load_matrix, to_csv
from fracpow.de import get_interval
from fracpow.linalg import estimate_norms

COLUMNS = ("matrix", "alpha", "eps", "norm_tol", "norm_a", "norm_ainv", "l", "r")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("matrices", nargs="*", default=["spd:100:1e2", "spd:100:1e7", "ns:100:1e7"])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    rows = []
    for desc in args.matrices:
        name, A = load_matrix(desc)
        for norm_tol in (1e-8, 1e-2):
            n = estimate_norms(A, norm_tol)
            for eps in (1e-3, 1e-7, 1e-11):
                iv = get_interval(n, args.alpha, eps)
                rows.append(dict(matrix=name, alpha=args.alpha, eps=eps, norm_tol=norm_tol,
                                 norm_a=n.norm_a, norm_ainv=n.norm_ainv, l=iv.l, r=iv.r))
    text = to_csv(COLUMNS, rows)
    if args.out:
        open(args.out, "w", newline="").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
