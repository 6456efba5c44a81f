"""Experiment runners that emit CSV tables.

Three tables are produced:

* convergence: error against a reference for every (method, alpha, m);
* speed: predicted convergence constants and the recommended rule;
* action: evaluation counts of the adaptive A^alpha b rules.

Every error in a table is checked before the table is written and a
:class:`ValidationError` is raised when a check fails.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .action import de_action_adaptive, gj_action_doubling
from .convergence import SpeedTable
from .de import ToleranceSpec, check_alpha, de_fixed
from .errors import ValidationError
from .gauss_jacobi import gj1, gj2, gj2_preconditioned
from .linalg import CsrMatrix, as_dense, estimate_norms, is_symmetric
from .matrices import gen_nonsymmetric, gen_spd, laplacian_1d, poisson_2d, read_matrix_market
from .operators import ScaledOperator, as_operator
from .oracles import reference_power

CONVERGENCE_COLUMNS = ("matrix", "method", "alpha", "m", "rel_error", "evals")
SPEED_COLUMNS = ("kappa", "alpha", "phi_de", "phi_gj1", "phi_gj2", "recommended", "switch")
ACTION_COLUMNS = ("matrix", "alpha", "method", "evals", "capped", "converged", "est_error",
                  "error", "error_kind", "wall_time")


@dataclass
class ExperimentConfig:
    """Inputs of one experiment run.

    ``matrix`` is a file path or a synthetic descriptor: ``spd:n:kappa``,
    ``ns:n:kappa``, ``lap1d:n`` or ``poisson:k``.
    """

    matrix: str = "spd:100:1e2"
    alphas: Tuple[float, ...] = (0.2, 0.5, 0.8)
    tols: Tuple[float, ...] = (2.0**-53,)
    methods: Tuple[str, ...] = ("de", "gj1", "gj2", "gj2pre")
    m_grid: Tuple[int, ...] = (8, 16, 32, 64, 96, 128)
    out: Optional[str] = None
    norm_rel_tol: float = 1e-3
    budget: int = 1000
    seed: int = 0
    m0: int = 8
    oracle_max_n: int = 400

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        for a in self.alphas:
            check_alpha(a)
        self.m_grid = tuple(int(m) for m in self.m_grid)
        if list(self.m_grid) != sorted(self.m_grid) or len(set(self.m_grid)) != len(self.m_grid):
            raise ValueError("the m grid must be strictly ascending")
        if any(m < 2 for m in self.m_grid):
            raise ValueError("every m must be at least 2")
        self.tols = tuple(float(t) for t in self.tols)
        if any(not t > 0 for t in self.tols):
            raise ValueError("tolerances must be positive")
        if not (0 < self.norm_rel_tol < 0.5):
            raise ValueError("norm_rel_tol must lie in (0, 0.5)")
        if self.budget < 2:
            raise ValueError("the evaluation budget must be at least 2")


def load_matrix(desc: str, seed: int = 0):
    """Return ``(name, A)`` for a synthetic descriptor or a Matrix Market path."""
    parts = desc.split(":")
    kind = parts[0].lower()
    try:
        if kind == "spd" and len(parts) == 3:
            return desc, gen_spd(int(parts[1]), float(parts[2]), seed)
        if kind == "ns" and len(parts) == 3:
            return desc, gen_nonsymmetric(int(parts[1]), float(parts[2]), seed)
        if kind == "lap1d" and len(parts) == 2:
            return desc, laplacian_1d(int(parts[1]))
        if kind == "poisson" and len(parts) == 2:
            return desc, poisson_2d(int(parts[1]))
    except ValueError as exc:
        raise ValueError(f"malformed matrix descriptor {desc!r}: {exc}") from None
    path = Path(desc)
    if not path.exists():
        raise ValueError(f"{desc!r} is neither a synthetic matrix descriptor "
                         "nor an existing file")
    return path.stem, read_matrix_market(path)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(columns: Sequence[str], rows: List[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> str:
    if out:
        Path(out).write_text(text, newline="")
    return text


def _is_spd(A) -> bool:
    return is_symmetric(A)


def validated_oracle(A: np.ndarray, alpha: float, tol: float = 1e-8) -> np.ndarray:
    """Reference A^alpha, checked through A^alpha A^(1-alpha) = A."""
    X = reference_power(A, alpha)
    Y = reference_power(A, 1.0 - alpha)
    res = np.linalg.norm(X @ Y - A) / np.linalg.norm(A)
    if not res <= tol:
        raise ValidationError(f"reference for alpha={alpha} fails A^a A^(1-a) = A "
                              f"(residual {res:.2e})")
    return X


def _rel_err(X, ref):
    return float(np.linalg.norm(X - ref) / np.linalg.norm(ref))


def _check_error(value, what):
    if not (math.isfinite(value) and value >= 0):
        raise ValidationError(f"{what}: error value {value!r} is not a finite nonnegative number")


def run_convergence(config: ExperimentConfig) -> str:
    """Convergence table: relative Frobenius error of each fixed-m rule against the reference."""
    name, A = load_matrix(config.matrix, config.seed)
    A = as_dense(A.toarray() if isinstance(A, CsrMatrix) else A)
    norms = estimate_norms(A, config.norm_rel_tol)
    c = math.sqrt(norms.norm_ainv / norms.norm_a)
    cA, cn = c * A, norms.scaled(c)
    spd = _is_spd(A)
    rows = []
    for alpha in config.alphas:
        ref = validated_oracle(cA, alpha)
        for method in config.methods:
            if method == "gj2pre" and not spd:
                continue
            for m in config.m_grid:
                if method == "de":
                    rep = de_fixed(cA, alpha, ToleranceSpec.relative(config.tols[0]), m, norms=cn)
                elif method == "gj1":
                    rep = gj1(cA, alpha, m)
                elif method == "gj2":
                    rep = gj2(cA, alpha, m)
                elif method == "gj2pre":
                    rep = gj2_preconditioned(cA, alpha, m, cn)
                else:
                    raise ValueError(f"method {method!r} has no fixed-m form")
                err = _rel_err(rep.value, ref)
                _check_error(err, f"{method} m={m}")
                rows.append(dict(matrix=name, method=method, alpha=alpha, m=m, rel_error=err,
                                 evals=rep.evals))
    return _emit(to_csv(CONVERGENCE_COLUMNS, rows), config.out)


def run_speed_table(kappas: Sequence[float], alphas: Sequence[float],
                    out: Optional[str] = None) -> str:
    """Speed constants per (kappa, alpha); ``switch`` marks where the fastest rule changes."""
    table = SpeedTable.build(list(kappas), list(alphas))
    switches = {(a, k1): f"{old}->{new}" for a, _, k1, old, new in table.crossovers()}
    rows = []
    for r in table.rows:
        for name in ("phi_de", "phi_gj2") + (("phi_gj1",) if r.phi_gj1 is not None else ()):
            v = getattr(r, name)
            if not v > 0:
                raise ValidationError(f"nonpositive speed {name}={v} at kappa={r.kappa}")
        rows.append(dict(kappa=r.kappa, alpha=r.alpha, phi_de=r.phi_de, phi_gj1=r.phi_gj1,
                         phi_gj2=r.phi_gj2, recommended=r.recommended,
                         switch=switches.get((r.alpha, r.kappa), "")))
    return _emit(to_csv(SPEED_COLUMNS, rows), out)


def run_action_bench(config: ExperimentConfig, tol: float = 1e-6) -> str:
    """Evaluation counts of the adaptive action rules for an absolute 2-norm tolerance.

    The right-hand side is a seeded random unit vector.  When the matrix is
    small enough (``oracle_max_n``) the achieved error is measured against
    the dense reference; otherwise the last doubling or halving estimate is
    reported.  Rows where the budget stopped the rule have ``capped = 1``.
    """
    name, A = load_matrix(config.matrix, config.seed)
    n = A.n if isinstance(A, CsrMatrix) else A.shape[0]
    b = np.random.default_rng(config.seed + 1).standard_normal(n)
    b /= np.linalg.norm(b)
    norms = estimate_norms(A, config.norm_rel_tol)
    c = math.sqrt(norms.norm_ainv / norms.norm_a)
    dense = None
    if n <= config.oracle_max_n:
        dense = as_dense(A.toarray() if isinstance(A, CsrMatrix) else A)
    rows = []
    for alpha in config.alphas:
        ref = None
        if dense is not None:
            ref = validated_oracle(dense, alpha) @ b
        for method in config.methods:
            if method not in ("de-adaptive", "gj1", "gj2"):
                continue
            op = ScaledOperator(as_operator(A), c)
            t0 = time.perf_counter()
            eps = tol * c**alpha
            if method == "de-adaptive":
                rep = de_action_adaptive(op, alpha, ToleranceSpec.absolute(eps), b, m0=config.m0,
                                         max_evals=config.budget, norms=norms.scaled(c),
                                         raise_on_budget=False)
            else:
                rep = gj_action_doubling(op, alpha, method, eps, b, m0=config.m0,
                                         max_evals=config.budget, raise_on_budget=False)
            wall = time.perf_counter() - t0
            x = c ** (-alpha) * rep.x
            est = None if rep.est_error is None else c ** (-alpha) * rep.est_error
            if ref is not None:
                err, kind = float(np.linalg.norm(x - ref)), "oracle"
            else:
                err, kind = est, "estimate"
            if err is not None:
                _check_error(err, f"{method} alpha={alpha}")
            if method == "de-adaptive" and rep.converged and kind == "oracle" and err > tol:
                raise ValidationError(f"adaptive DE reported convergence but its error {err:.2e} "
                                      f"exceeds {tol:.1e}")
            if rep.evals > config.budget:
                raise ValidationError("evaluation count exceeds the budget")
            rows.append(dict(matrix=name, alpha=alpha, method=method, evals=rep.evals,
                             capped=rep.capped, converged=rep.converged, est_error=est,
                             error=err, error_kind=kind, wall_time=round(wall, 6)))
    return _emit(to_csv(ACTION_COLUMNS, rows), config.out)


def parse_csv(text: str) -> List[dict]:
    return list(csv.DictReader(io.StringIO(text)))
