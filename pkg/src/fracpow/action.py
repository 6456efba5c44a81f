"""The action A^alpha b computed without forming A^alpha.

The quadrature rules only need ``(sigma I + A)^-1 y``, so with ``y = b``
every node costs one linear solve with a vector right-hand side.  For
sparse SPD matrices those solves are done by conjugate gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .de import QuadratureReport, ToleranceSpec, adaptive_trapezoid, check_alpha, get_interval
from .errors import ConvergenceFailure, EvalBudgetExceeded
from .linalg import CsrMatrix, NormEstimates, as_dense, estimate_norms
from .operators import as_operator


def cg_solve_shifted(A, sigma: float, y, tol: float = 1e-10, max_iter: Optional[int] = None,
                     callback: Optional[Callable[[int, float], None]] = None) -> np.ndarray:
    """Solve (sigma I + A) x = y by conjugate gradients for SPD ``A`` and sigma >= 0.

    Stops once ``||r||_2 <= tol ||y||_2``.  ``callback(k, ||r_k||)`` is
    called after every iteration.
    """
    if sigma < 0:
        raise ValueError("the shift must be nonnegative")
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    mv = A.matvec if isinstance(A, CsrMatrix) else (lambda v, M=as_dense(A): M @ v)
    if max_iter is None:
        max_iter = max(10 * n, 100)
    ny = float(np.linalg.norm(y))
    x = np.zeros(n)
    if ny == 0.0:
        return x
    r = y.copy()
    p = r.copy()
    rr = float(r @ r)
    target = tol * ny
    history = [math.sqrt(rr)]
    for k in range(1, max_iter + 1):
        q = sigma * p + mv(p)
        pq = float(p @ q)
        if pq <= 0:
            raise ConvergenceFailure("shifted matrix is not positive definite", last=history[-1],
                                     history=history)
        step = rr / pq
        x += step * p
        r -= step * q
        rr_new = float(r @ r)
        res = math.sqrt(rr_new)
        history.append(res)
        if callback is not None:
            callback(k, res)
        if res <= target:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise ConvergenceFailure(f"CG did not reach relative residual {tol:.1e} in {max_iter} steps",
                             last=history[-1], history=history, iterate=x)


@dataclass
class ActionReport:
    x: np.ndarray
    m_history: List[int] = field(default_factory=list)
    est_history: List[float] = field(default_factory=list)
    evals: int = 0
    converged: bool = False
    capped: bool = False
    method: str = "de-adaptive"

    @property
    def m(self) -> int:
        return self.m_history[-1] if self.m_history else 0

    @property
    def est_error(self) -> Optional[float]:
        return self.est_history[-1] if self.est_history else None


def _norms_for(op, norms):
    if norms is not None:
        return norms
    mat = getattr(op, "matrix", None)
    if mat is None:
        raise ValueError("norm estimates are required for matrix-free operators")
    return estimate_norms(mat)


def _check_rhs(op, b):
    b = np.asarray(b, dtype=float)
    if b.shape != (op.dim,):
        raise ValueError(f"right-hand side must have shape ({op.dim},)")
    if not np.linalg.norm(b) > 0:
        raise ValueError("right-hand side must be nonzero")
    return b


def _from_quadrature(rep: QuadratureReport, capped: bool) -> ActionReport:
    return ActionReport(rep.value, [m for m, _ in rep.history] or [rep.m],
                        [e for _, e in rep.history], rep.evals, not capped, capped,
                        "de-adaptive")


def de_action_adaptive(op, alpha: float, tol: ToleranceSpec, b, m0: int = 8,
                       max_evals: int = 1000, norms: Optional[NormEstimates] = None,
                       workers: int = 1, raise_on_budget: bool = True) -> ActionReport:
    """Adaptive DE formula for A^alpha b.

    Same halving schedule and stopping rule as the matrix version, with the
    estimate ``sin(alpha*pi)/2 * ||A T_{s+1} b - A T_s b||_2``.  When the
    budget runs out an :class:`EvalBudgetExceeded` is raised, or, with
    ``raise_on_budget=False``, the last iterate is returned with
    ``capped=True``.
    """
    alpha = check_alpha(alpha)
    op = as_operator(op)
    b = _check_rhs(op, b)
    norms = _norms_for(op, norms)
    tol = tol.resolve(norms, alpha)
    iv = get_interval(norms, alpha, tol.eps_effective)
    try:
        rep = adaptive_trapezoid(op, alpha, iv, tol.eps_effective, m0, max_evals, b, "fro",
                                 workers, "de-adaptive", tol)
    except EvalBudgetExceeded as exc:
        act = _from_quadrature(exc.report, True)
        if raise_on_budget:
            raise EvalBudgetExceeded(act, max_evals) from None
        return act
    return _from_quadrature(rep, False)


def gj_action_doubling(op, alpha: float, variant: str, tol: float, b, m0: int = 8,
                       max_evals: int = 1000, raise_on_budget: bool = True) -> ActionReport:
    """Gauss-Jacobi approximations with m = m0, 2 m0, 4 m0, ... nodes.

    Stops at the first m with ``||x_2m - x_m||_2 <= tol`` (an absolute
    2-norm tolerance).  The doubling estimate is a heuristic, not a bound.
    Every level recomputes all of its nodes, so the evaluation count grows
    like ``m0 (2^(s+1) - 1)``; a level that would push it past
    ``max_evals`` is not started.
    """
    from .gauss_jacobi import gj1_sum, gj2_sum

    alpha = check_alpha(alpha)
    if variant not in ("gj1", "gj2"):
        raise ValueError("variant must be 'gj1' or 'gj2'")
    if m0 < 1 or m0 > max_evals:
        raise ValueError("need 1 <= m0 <= max_evals")
    op = as_operator(op)
    b = _check_rhs(op, b)
    rule = gj1_sum if variant == "gj1" else gj2_sum
    start = op.evals
    m = m0
    x = op.matvec(rule(op, alpha, m, b))
    rep = ActionReport(x, [m], [], op.evals - start, False, False, variant)
    while True:
        if op.evals - start + 2 * m > max_evals:
            rep.capped = True
            rep.evals = op.evals - start
            if raise_on_budget:
                raise EvalBudgetExceeded(rep, max_evals)
            return rep
        m *= 2
        x_new = op.matvec(rule(op, alpha, m, b))
        est = float(np.linalg.norm(x_new - x))
        rep.x, x = x_new, x_new
        rep.m_history.append(m)
        rep.est_history.append(est)
        rep.evals = op.evals - start
        if est <= tol:
            rep.converged = True
            return rep
