"""Command-line interface: ``fracpow <command> ...``.

Exit status is 0 on success, 1 when a validation check fails, 2 for
bad input or other library errors and 3 when an adaptive matrix rule
runs out of its evaluation budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import bench
from .de import ToleranceSpec, get_interval
from .errors import EvalBudgetExceeded, FracPowError, ValidationError
from .linalg import CsrMatrix, NormEstimates, estimate_norms
from .matrices import read_vector, write_matrix_market
from .powm import METHODS, fractional_action, fractional_power


def _floats(text: str) -> List[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _tol(args) -> ToleranceSpec:
    mode = "relative" if args.rel else "absolute"
    return ToleranceSpec(mode, args.eps, args.norm_tol, args.compensate)


def _add_common(p, eps_default):
    p.add_argument("--eps", type=float, default=eps_default, help="tolerance")
    p.add_argument("--rel", action="store_true", help="treat --eps as a relative tolerance")
    p.add_argument("--compensate", action="store_true",
                   help="shrink the tolerance to absorb the norm-estimate error")
    p.add_argument("--norm-tol", type=float, default=1e-3,
                   help="relative accuracy of the norm estimates")
    p.add_argument("--seed", type=int, default=0, help="seed for synthetic matrices")


def _cmd_powm(args) -> int:
    _, A = bench.load_matrix(args.matrix, args.seed)
    X, rep = fractional_power(A, args.alpha, method=args.method, tol=_tol(args), m=args.m,
                              m0=args.m0, max_evals=args.budget)
    if args.out:
        write_matrix_market(args.out, X, comment=f"A^{args.alpha!r} by {args.method}")
    info = {"alpha": args.alpha, "method": args.method}
    if rep is not None:
        info.update(m=rep.m, evals=rep.evals, est_error=rep.est_error)
        if rep.interval is not None:
            info.update(l=rep.interval.l, r=rep.interval.r)
    print(json.dumps(info))
    if not args.out:
        np.savetxt(sys.stdout, X)
    return 0


def _cmd_action(args) -> int:
    _, A = bench.load_matrix(args.matrix, args.seed)
    n = A.n if isinstance(A, CsrMatrix) else A.shape[0]
    if args.rhs:
        b = read_vector(args.rhs)
    else:
        b = np.random.default_rng(args.seed + 1).standard_normal(n)
        b /= np.linalg.norm(b)
    tol = _tol(args)
    x, rep = fractional_action(A, args.alpha, b, method=args.method, tol=tol, m0=args.m0,
                               max_evals=args.budget, raise_on_budget=False)
    if args.out:
        write_matrix_market(args.out, x, comment=f"A^{args.alpha!r} b by {args.method}")
    info = {"alpha": args.alpha, "method": args.method}
    if rep is not None:
        info.update(evals=rep.evals, m=rep.m, est_error=rep.est_error, capped=rep.capped,
                    converged=rep.converged)
    print(json.dumps(info))
    if not args.out:
        np.savetxt(sys.stdout, x)
    return 0


def _cmd_interval(args) -> int:
    if args.matrix:
        _, A = bench.load_matrix(args.matrix, args.seed)
        norms = estimate_norms(A, args.norm_tol)
    elif args.norm_a and args.norm_ainv:
        norms = NormEstimates(args.norm_a, args.norm_ainv, args.norm_tol)
    else:
        print("interval: give a matrix or both --norm-a and --norm-ainv", file=sys.stderr)
        return 2
    tol = _tol(args).resolve(norms, args.alpha)
    iv = get_interval(norms, args.alpha, tol.eps_effective)
    out = iv.as_dict()
    out.update(eps_effective=tol.eps_effective, norm_a=norms.norm_a, norm_ainv=norms.norm_ainv)
    print(json.dumps(out))
    return 0


def _config(args) -> bench.ExperimentConfig:
    kw = dict(matrix=args.matrix, alphas=tuple(_floats(args.alpha)), out=args.out,
              norm_rel_tol=args.norm_tol, budget=args.budget, seed=args.seed, m0=args.m0)
    if args.method:
        kw["methods"] = tuple(args.method.split(","))
    if getattr(args, "m", None):
        kw["m_grid"] = tuple(_ints(args.m))
    if getattr(args, "tols", None):
        kw["tols"] = tuple(_floats(args.tols))
    return bench.ExperimentConfig(**kw)


def _cmd_convergence(args) -> int:
    text = bench.run_convergence(_config(args))
    if not args.out:
        sys.stdout.write(text)
    return 0


def _cmd_speed(args) -> int:
    if args.kappa:
        kappas = _floats(args.kappa)
    else:
        kappas = list(10.0 ** np.arange(0.0, 16.0 + 1e-9, args.step))
    text = bench.run_speed_table(kappas, _floats(args.alpha), args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def _cmd_bench(args) -> int:
    cfg = _config(args)
    text = bench.run_action_bench(cfg, tol=args.eps)
    if not args.out:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracpow", description="Real powers of matrices by "
                                 "double-exponential and Gauss-Jacobi quadrature.")
    sub = ap.add_subparsers(dest="command", required=True)
    matrix_help = ("Matrix Market file or synthetic descriptor (spd:n:kappa, ns:n:kappa, "
                   "lap1d:n, poisson:k)")

    p = sub.add_parser("powm", help="compute A^alpha")
    p.add_argument("matrix", help=matrix_help)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=METHODS, default="de-adaptive")
    p.add_argument("--m", type=int, default=64, help="nodes for the fixed-m rules")
    p.add_argument("--m0", type=int, default=8, help="initial nodes for the adaptive rule")
    p.add_argument("--budget", type=int, default=1000, help="integrand evaluation budget")
    p.add_argument("--out", help="write the result as a Matrix Market array file")
    _add_common(p, 1e-8)
    p.set_defaults(func=_cmd_powm)

    p = sub.add_parser("action", help="compute A^alpha b")
    p.add_argument("matrix", help=matrix_help)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", choices=("de-adaptive", "gj1", "gj2"), default="de-adaptive")
    p.add_argument("--rhs", help="Matrix Market n x 1 array file (default: random unit vector)")
    p.add_argument("--m0", type=int, default=8)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--out")
    _add_common(p, 1e-6)
    p.set_defaults(func=_cmd_action)

    p = sub.add_parser("interval", help="print the truncated DE interval")
    p.add_argument("matrix", nargs="?", help=matrix_help)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--norm-a", type=float)
    p.add_argument("--norm-ainv", type=float)
    _add_common(p, 1e-8)
    p.set_defaults(func=_cmd_interval)

    p = sub.add_parser("convergence", help="CSV of error against m for the fixed-m rules")
    p.add_argument("matrix", help=matrix_help)
    p.add_argument("--alpha", default="0.2,0.5,0.8", help="comma-separated exponents")
    p.add_argument("--method", default="de,gj1,gj2,gj2pre")
    p.add_argument("--m", default="8,16,32,64,96,128", help="comma-separated ascending m grid")
    p.add_argument("--tols", default=repr(2.0**-53), help="relative tolerance for DE")
    p.add_argument("--m0", type=int, default=8)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--out")
    p.add_argument("--norm-tol", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("speed", help="CSV of predicted convergence speeds")
    p.add_argument("--kappa", help="comma-separated condition numbers")
    p.add_argument("--step", type=float, default=0.25, help="log10 step of the default grid")
    p.add_argument("--alpha", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_speed)

    p = sub.add_parser("bench", help="CSV of evaluation counts for the adaptive action rules")
    p.add_argument("matrix", help=matrix_help)
    p.add_argument("--alpha", default="0.2,0.8")
    p.add_argument("--method", default="de-adaptive,gj1,gj2")
    p.add_argument("--eps", type=float, default=1e-6, help="absolute 2-norm tolerance")
    p.add_argument("--m0", type=int, default=8)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--norm-tol", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1
    except EvalBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (FracPowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
