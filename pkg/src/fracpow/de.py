"""Double-exponential quadrature for the matrix fractional power A^alpha, 0 < alpha < 1.

With ``t(x) = exp(alpha*pi*sinh(x)/2)`` the integral representation

    A^alpha = sin(alpha*pi)/(alpha*pi) * A * int_0^inf (t^(1/alpha) I + A)^(-1) dt

becomes ``sin(alpha*pi)/2 * A * int F(x) dx`` with

    F(x) = exp(alpha*pi*sinh(x)/2) cosh(x) [exp(pi*sinh(x)/2) I + A]^(-1),

an integrand that decays double exponentially on the real line.  The
infinite axis is cut to ``[l, r]`` with a rigorous truncation bound and
the rest is the trapezoidal rule, either with a fixed number of points or
halving the mesh until an a-posteriori estimate meets the tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    AlphaOutOfRange,
    EvalBudgetExceeded,
    PreconditionViolated,
    ShiftOverflow,
    TolTooLarge,
)
from .linalg import NormEstimates, estimate_norms, norm2_estimate
from .operators import ShiftedLinearOperator, as_operator

# largest x with exp(x) finite in double precision
_LOG_MAX = math.log(np.finfo(float).max)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class TruncationInterval:
    l: float
    r: float
    a: float
    b: float
    a_branch: str  # "tolerance" or "norm"
    b_branch: str
    log_a: float
    log_b: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("l", "r", "a", "b", "a_branch", "b_branch")}


@dataclass(frozen=True)
class ToleranceSpec:
    """User tolerance and the epsilon actually handed to the interval selection.

    In ``relative`` mode the target is ``||A^alpha - X||_2 / ||A^alpha||_2``
    and the absolute epsilon is ``rho(A)^alpha`` times the user value, with
    ``rho`` replaced by the lower bound stored in the norm estimates.  With
    ``compensate`` the user value is first divided by
    ``1 + 1/(1 - norm_rel_tol)`` so inaccurate norms cannot push the
    truncation error past the target.
    """

    mode: str = "relative"
    eps_user: float = 1e-8
    norm_rel_tol: float = 1e-3
    compensate: bool = False
    eps_effective: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("absolute", "relative"):
            raise ValueError(f"unknown tolerance mode {self.mode!r}")
        if not self.eps_user > 0:
            raise ValueError("tolerance must be positive")
        if not (0.0 <= self.norm_rel_tol < 0.5):
            raise ValueError("norm_rel_tol must lie in [0, 0.5)")

    @classmethod
    def absolute(cls, eps: float, compensate: bool = False, norm_rel_tol: float = 1e-3):
        return cls("absolute", eps, norm_rel_tol, compensate)

    @classmethod
    def relative(cls, eps: float, compensate: bool = False, norm_rel_tol: float = 1e-3):
        return cls("relative", eps, norm_rel_tol, compensate)

    def compensated(self) -> float:
        if not self.compensate:
            return self.eps_user
        return self.eps_user / (1.0 + 1.0 / (1.0 - abs(self.norm_rel_tol)))

    def resolve(self, norms: NormEstimates, alpha: float) -> "ToleranceSpec":
        eps = self.compensated()
        if self.mode == "relative":
            eps = norms.spectral_radius_lb**alpha * eps
        return replace(self, eps_effective=eps)


@dataclass
class QuadratureReport:
    value: np.ndarray
    m: int
    level: int
    est_error: Optional[float]
    evals: int
    interval: Optional[TruncationInterval] = None
    tol: Optional[ToleranceSpec] = None
    method: str = "de"
    history: List[Tuple[int, float]] = field(default_factory=list)
    tau: Optional[object] = None


def get_interval(norms: NormEstimates, alpha: float, eps: float) -> TruncationInterval:
    """Truncated interval [l, r] whose tail integrals total at most eps/2 in the 2-norm."""
    alpha = check_alpha(alpha)
    if not eps > 0:
        raise ValueError("eps must be positive")
    s = math.sin(alpha * math.pi)
    na, ni = norms.norm_a, norms.norm_ainv

    a1 = eps / 4.0 * math.pi * alpha * (1 + alpha) / (s * (1 + 2 * alpha))
    a2 = (2.0 * ni) ** (-alpha)
    if a1 <= a2:
        a, a_branch = a1, "tolerance"
    else:
        a, a_branch = a2, "norm"

    base = eps / 4.0 * math.pi * (1 - alpha) * (2 - alpha) / (s * (3 - 2 * alpha) * na)
    log_b1 = alpha / (alpha - 1.0) * math.log(base)
    b2 = (2.0 * na) ** alpha
    log_b2 = math.log(b2)
    if log_b1 >= log_b2:
        log_b, b_branch = log_b1, "tolerance"
        b = math.exp(log_b1) if log_b1 < _LOG_MAX else math.inf
        b = max(b, b2)
    else:
        log_b, b = log_b2, b2
        b_branch = "norm"

    log_a = math.log(a)
    if a >= b:
        raise TolTooLarge(f"degenerate truncation interval: a={a:.3g} >= b={b:.3g}")
    l = math.asinh(2.0 * log_a / (alpha * math.pi))
    r = math.asinh(2.0 * log_b / (alpha * math.pi))
    return TruncationInterval(l, r, a, b, a_branch, b_branch, log_a, log_b)


def truncation_error_bound(norms: NormEstimates, alpha: float, a: float, b: float,
                           norm_identity: float = 1.0):
    """Upper bounds of the two tail integrals cut off by a truncated interval.

    Returns ``(total, left, right)``; requires ``a <= (2||A^-1||)^-alpha``
    and ``b >= (2||A||)^alpha``.
    """
    alpha = check_alpha(alpha)
    if not a <= (2.0 * norms.norm_ainv) ** (-alpha):
        raise PreconditionViolated("a", "left endpoint a exceeds (2 ||A^-1||)^(-alpha)")
    if not b >= (2.0 * norms.norm_a) ** alpha:
        raise PreconditionViolated("b", "right endpoint b is below (2 ||A||)^alpha")
    s = math.sin(alpha * math.pi)
    left = s * (alpha + (1 + alpha) * norm_identity) / (alpha * math.pi * (1 + alpha)) * a
    right = (s * (3 - 2 * alpha) * norms.norm_a / (math.pi * (1 - alpha) * (2 - alpha))
             * b ** (1.0 - 1.0 / alpha))
    return left + right, left, right


def de_integrand(op: ShiftedLinearOperator, alpha: float, x: float, rhs=None):
    """Transformed integrand at ``x`` (without the ``sin(alpha*pi)/2 * A`` prefactor).

    ``rhs`` defaults to the identity; pass a vector to get the integrand
    applied to it.  Costs one shifted solve.
    """
    try:
        e = 0.5 * math.pi * math.sinh(x)
        ch = math.cosh(x)
    except OverflowError:
        raise ShiftOverflow(f"sinh(x) overflows at x={x:.6g}") from None
    y = op.identity() if rhs is None else rhs
    if e > _LOG_MAX:
        # sigma is not representable, but then (sigma I + A)^-1 = I/sigma to full
        # precision (||A||/sigma < 1e-300), so only the scalar weight is needed
        op.solve_skipped()
        return math.exp((alpha - 1.0) * e) * ch * np.array(y, dtype=float)
    sigma = math.exp(e)
    w = math.exp(alpha * e) * ch
    return w * op.solve(sigma, y)


def abscissas(l: float, h: float, m: int) -> np.ndarray:
    return l + h * np.arange(m)


def _integrand_sum(op, alpha, xs, rhs, workers, weights=None):
    if workers and workers > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda x: de_integrand(op, alpha, x, rhs), xs))
    else:
        vals = [de_integrand(op, alpha, x, rhs) for x in xs]
    total = None
    for k, v in enumerate(vals):
        if weights is not None:
            v = weights[k] * v
        total = v if total is None else total + v
    return total


def trapezoid_sum(op, alpha, l: float, r: float, m: int, rhs=None, workers: int = 1):
    """m-point trapezoid sum of the integrand on [l, r]; returns ``(T, h)``."""
    if m < 2:
        raise ValueError("the trapezoidal rule needs m >= 2 points")
    h = (r - l) / (m - 1)
    xs = abscissas(l, h, m)
    wts = np.ones(m)
    wts[0] = wts[-1] = 0.5
    return h * _integrand_sum(op, alpha, xs, rhs, workers, wts), h


def trapezoid_refine(T_prev, h_prev: float, l: float, m_prev: int, op, alpha: float,
                     rhs=None, workers: int = 1):
    """Halve the mesh, reusing the previous sum; returns ``(T_next, h_next, m_next)``."""
    h = 0.5 * h_prev
    xs = l + h * (2.0 * np.arange(1, m_prev) - 1.0)
    T = 0.5 * T_prev + h * _integrand_sum(op, alpha, xs, rhs, workers)
    return T, h, 2 * m_prev - 1


def _prepare(A, alpha, tol, norms):
    alpha = check_alpha(alpha)
    op = as_operator(A)
    if norms is None:
        mat = getattr(op, "matrix", None)
        if mat is None:
            raise ValueError("norm estimates are required for matrix-free operators")
        norms = estimate_norms(mat, tol.norm_rel_tol if tol.norm_rel_tol > 0 else 1e-3)
    tol = tol.resolve(norms, alpha)
    interval = get_interval(norms, alpha, tol.eps_effective)
    return alpha, op, norms, tol, interval


def de_fixed(A, alpha: float, tol: ToleranceSpec, m: int, norms: Optional[NormEstimates] = None,
             workers: int = 1) -> QuadratureReport:
    """m-point DE formula for A^alpha on the truncated interval."""
    alpha, op, norms, tol, iv = _prepare(A, alpha, tol, norms)
    start = op.evals
    T, _ = trapezoid_sum(op, alpha, iv.l, iv.r, m, workers=workers)
    value = 0.5 * math.sin(alpha * math.pi) * op.matvec(T)
    return QuadratureReport(value, m, -1, None, op.evals - start, iv, tol, "de")


def _diff_norm(D, norm):
    if norm == "fro":
        return float(np.linalg.norm(D))
    if norm == "2":
        return norm2_estimate(D)
    raise ValueError(f"unknown norm {norm!r}")


def adaptive_trapezoid(op, alpha, iv, eps, m0, max_evals, rhs=None, norm="fro", workers=1,
                       method="de-adaptive", tol=None):
    """Mesh-halving loop shared by the matrix and the vector variants."""
    if m0 < 2:
        raise ValueError("m0 must be at least 2")
    if m0 > max_evals:
        raise ValueError("max_evals must allow the initial m0-point rule")
    c = 0.5 * math.sin(alpha * math.pi)
    start = op.evals
    T, h = trapezoid_sum(op, alpha, iv.l, iv.r, m0, rhs, workers)
    AT = op.matvec(T)
    m, s, est = m0, -1, None
    history: List[Tuple[int, float]] = []
    while True:
        if op.evals - start + (m - 1) > max_evals:
            report = QuadratureReport(c * AT, m, s, est, op.evals - start, iv, tol, method, history)
            raise EvalBudgetExceeded(report, max_evals)
        s += 1
        T_next, h, m = trapezoid_refine(T, h, iv.l, m, op, alpha, rhs, workers)
        AT_next = op.matvec(T_next)
        est = c * _diff_norm(AT_next - AT, norm)
        history.append((m, est))
        T, AT = T_next, AT_next
        if est <= 0.5 * eps:
            return QuadratureReport(c * AT, m, s, est, op.evals - start, iv, tol, method, history)


def de_adaptive(A, alpha: float, tol: ToleranceSpec, m0: int = 8, max_evals: int = 1000,
                norms: Optional[NormEstimates] = None, norm: str = "fro",
                workers: int = 1) -> QuadratureReport:
    """Adaptive DE formula: halve the mesh until the discretisation estimate is <= eps/2.

    The stopping estimate is ``sin(alpha*pi)/2 * ||A T_{s+1} - A T_s||`` in
    the Frobenius norm by default (``norm="2"`` uses a power-iteration
    2-norm).  Raises :class:`EvalBudgetExceeded`, carrying the last
    approximation, if the next halving would exceed ``max_evals`` solves.
    """
    alpha, op, norms, tol, iv = _prepare(A, alpha, tol, norms)
    return adaptive_trapezoid(op, alpha, iv, tol.eps_effective, m0, max_evals, None, norm,
                              workers, "de-adaptive", tol)
