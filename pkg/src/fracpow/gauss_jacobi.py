"""Gauss-Jacobi quadrature baselines for A^alpha.

Two substitutions of the real-axis integral give integrals over [-1, 1]
whose singular endpoint factors are Jacobi weights:

* ``gj1``:  t = (1+u)/(1-u), weight (1-u)^(1/alpha-2),
            integrand [(1+u)^(1/alpha) I + (1-u)^(1/alpha) A]^-1;
* ``gj2``:  t = ((1-v)/(1+v))^alpha, weight (1-v)^(alpha-1) (1+v)^(-alpha),
            integrand [(1-v) I + (1+v) A]^-1.

Each node costs one shifted solve, so both rules go through the same
operator interface as the double-exponential formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.special

from .de import QuadratureReport, check_alpha
from .errors import ParameterOutOfRange
from .linalg import NormEstimates, estimate_norms, symmetric_eig
from .operators import ShiftedLinearOperator, as_operator


@dataclass(frozen=True)
class JacobiRule:
    m: int
    beta: float
    gamma: float
    nodes: np.ndarray
    weights: np.ndarray


def jacobi_moment0(beta: float, gamma: float) -> float:
    """Integral of (1-u)^beta (1+u)^gamma over [-1, 1]."""
    return 2.0 ** (beta + gamma + 1) * math.exp(scipy.special.betaln(beta + 1, gamma + 1))


def jacobi_recurrence(m: int, beta: float, gamma: float):
    """Diagonal ``a[0..m-1]`` and squared off-diagonal ``b[1..m]`` of the Jacobi matrix.

    ``b`` has ``m`` entries so that the last one can close the recurrence
    for p_m.  The k = 0 and k = 1 terms are written in cancelled form,
    which keeps them finite when beta + gamma is 0 or -1.
    """
    k = np.arange(m, dtype=float)
    s = beta + gamma
    a = np.empty(m)
    a[0] = (gamma - beta) / (s + 2)
    if m > 1:
        kk = k[1:]
        a[1:] = (gamma**2 - beta**2) / ((2 * kk + s) * (2 * kk + s + 2))
    b = np.empty(m)
    b[0] = 4 * (1 + beta) * (1 + gamma) / ((2 + s) ** 2 * (3 + s))
    if m > 1:
        kk = np.arange(2, m + 1, dtype=float)
        b[1:] = (4 * kk * (kk + beta) * (kk + gamma) * (kk + s)
                 / ((2 * kk + s) ** 2 * (2 * kk + s + 1) * (2 * kk + s - 1)))
    return a, b


def _orthonormal_eval(x, a, sb, mu0):
    """p_0..p_m at the points ``x`` (orthonormal), plus p_m'."""
    m = len(a)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(mu0))
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    sq = np.zeros_like(x)
    for k in range(m):
        sq += p * p
        off = sb[k - 1] if k > 0 else 0.0
        p_next = ((x - a[k]) * p - off * p_prev) / sb[k]
        d_next = (p + (x - a[k]) * d - off * d_prev) / sb[k]
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p, d, sq


def jacobi_rule(m: int, beta: float, gamma: float, polish_steps: int = 3) -> JacobiRule:
    """m-point Gauss rule for the weight (1-u)^beta (1+u)^gamma.

    Golub-Welsch: the nodes are eigenvalues of the symmetric tridiagonal
    Jacobi matrix.  Each node then gets a few Newton steps on the
    orthonormal recurrence and the weight ``1 / sum_k p_k(x)^2``, which is
    accurate in the relative sense even where the weights are tiny.
    """
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ParameterOutOfRange(f"node count must be a positive integer, got {m!r}")
    if not (beta > -1 and gamma > -1):
        raise ParameterOutOfRange(f"Jacobi exponents must exceed -1 (beta={beta}, gamma={gamma})")
    m = int(m)
    mu0 = jacobi_moment0(beta, gamma)
    a, b = jacobi_recurrence(m, beta, gamma)
    sb = np.sqrt(b)
    if m == 1:
        x = np.array([a[0]])
    else:
        x = scipy.linalg.eigh_tridiagonal(a, sb[: m - 1], eigvals_only=True)
    for _ in range(polish_steps):
        p, d, _ = _orthonormal_eval(x, a, sb, mu0)
        step = p / d
        x_new = np.clip(x - step, -1.0, 1.0)
        if np.all(np.abs(x_new - x) <= 4 * np.finfo(float).eps * np.maximum(np.abs(x), 1e-300)):
            x = x_new
            break
        x = x_new
    x = np.sort(x)
    _, _, sq = _orthonormal_eval(x, a, sb, mu0)
    w = 1.0 / sq
    if np.any(np.abs(x) >= 1.0) or np.any(np.diff(x) <= 0):
        raise ParameterOutOfRange("node computation degenerated; m is too large for double precision")
    return JacobiRule(m, float(beta), float(gamma), x, w)


def _check_m(m):
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ParameterOutOfRange(f"node count must be a positive integer, got {m!r}")
    return int(m)


def gj1_sum(op: ShiftedLinearOperator, alpha: float, m: int, rhs=None):
    """Weighted node sum of the first Gauss-Jacobi rule, prefactor included, before ``A*``."""
    rule = jacobi_rule(m, 1.0 / alpha - 2.0, 0.0)
    y = op.identity() if rhs is None else rhs
    total = None
    for u, w in zip(rule.nodes, rule.weights):
        # [(1+u)^(1/a) I + (1-u)^(1/a) A]^-1 = (1-u)^(-1/a) [sigma I + A]^-1
        ratio = (1.0 + u) / (1.0 - u)
        sigma = ratio ** (1.0 / alpha)
        scale = w * (1.0 - u) ** (-1.0 / alpha)
        term = scale * op.solve(sigma, y)
        total = term if total is None else total + term
    return 2.0 * math.sin(alpha * math.pi) / (alpha * math.pi) * total


def gj2_sum(op: ShiftedLinearOperator, alpha: float, m: int, rhs=None):
    """Weighted node sum of the second Gauss-Jacobi rule, prefactor included, before ``A*``."""
    rule = jacobi_rule(m, alpha - 1.0, -alpha)
    y = op.identity() if rhs is None else rhs
    total = None
    for v, w in zip(rule.nodes, rule.weights):
        # [(1-v) I + (1+v) A]^-1 = (1+v)^-1 [sigma I + A]^-1
        sigma = (1.0 - v) / (1.0 + v)
        term = (w / (1.0 + v)) * op.solve(sigma, y)
        total = term if total is None else total + term
    return 2.0 * math.sin(alpha * math.pi) / math.pi * total


def _report(op, value, m, method, start):
    return QuadratureReport(value, m, -1, None, op.evals - start, None, None, method)


def gj1(A, alpha: float, m: int) -> QuadratureReport:
    """m-point Gauss-Jacobi rule, substitution t = (1+u)/(1-u).

    Exponential convergence is only expected when 1/alpha is an integer;
    for other alpha the integrand is not analytic at u = 1 and the error
    decays algebraically.
    """
    alpha = check_alpha(alpha)
    m = _check_m(m)
    op = as_operator(A)
    start = op.evals
    value = op.matvec(gj1_sum(op, alpha, m))
    return _report(op, value, m, "gj1", start)


def gj2(A, alpha: float, m: int) -> QuadratureReport:
    """m-point Gauss-Jacobi rule, substitution t = ((1-v)/(1+v))^alpha."""
    alpha = check_alpha(alpha)
    m = _check_m(m)
    op = as_operator(A)
    start = op.evals
    value = op.matvec(gj2_sum(op, alpha, m))
    return _report(op, value, m, "gj2", start)


def lambert_w(x: float, tol: float = 1e-16, max_iter: int = 50) -> float:
    """Principal branch of the Lambert W function for x >= 0 (Halley's iteration)."""
    x = float(x)
    if x < 0 or math.isnan(x):
        raise ParameterOutOfRange("lambert_w is implemented for x >= 0 only")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < 1.0:
        w = x * (1.0 - x + 1.5 * x * x) if x < 0.25 else math.log1p(x) * 0.8
    else:
        L1 = math.log(x)
        L2 = math.log(L1) if L1 > 1.0 else 0.0
        w = L1 - L2 + (L2 / L1 if L1 > 1.0 else 0.0)
        if w <= 0:
            w = 0.5
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            break
    return w


@dataclass(frozen=True)
class TauSelection:
    tau: float
    m_bar: float
    branch: str  # "minus" or "plus"
    mu_max: float
    mu_min: float


def select_tau(m: int, alpha: float, mu_max: float, mu_min: float) -> TauSelection:
    """Scaling parameter tau for the preconditioned second Gauss-Jacobi rule.

    ``mu_max`` and ``mu_min`` are the extreme eigenvalues of the inverse
    operator, i.e. ``1/lambda_min(A)`` and ``1/lambda_max(A)``.
    """
    alpha = check_alpha(alpha)
    if not (mu_min > 0 and mu_max >= mu_min):
        raise ParameterOutOfRange("need mu_max >= mu_min > 0")
    if m < 1:
        raise ParameterOutOfRange("m must be positive")
    kappa = mu_max / mu_min
    m_bar = alpha / (2.0 * math.sqrt(2.0)) * math.sqrt(2.0 + math.log(kappa)) * kappa**0.25
    if m < m_bar:
        arg = 4.0 * math.e * m * m / alpha**2
        tau = mu_min * (alpha / (2.0 * math.e * m)) ** 2 * math.exp(2.0 * lambert_w(arg))
        branch = "minus"
    else:
        c = alpha * math.sqrt(mu_max) * math.log(kappa) / (8.0 * m)
        root = math.sqrt(mu_max * mu_min)
        # -c + sqrt(c^2 + root) written without cancellation
        tau = (root / (c + math.sqrt(c * c + root))) ** 2
        branch = "plus"
    return TauSelection(tau, m_bar, branch, float(mu_max), float(mu_min))


def gj2_preconditioned(A, alpha: float, m: int,
                       norms_or_eigs: Optional[Union[NormEstimates, tuple]] = None
                       ) -> QuadratureReport:
    """tau^(-alpha) * gj2(tau*A) with tau from :func:`select_tau`.

    ``norms_or_eigs`` is either a pair ``(lambda_min, lambda_max)`` or
    :class:`NormEstimates` of an SPD matrix (then lambda_max = ||A|| and
    lambda_min = 1/||A^-1||).  Without it the extreme eigenvalues are
    estimated from the matrix.
    """
    alpha = check_alpha(alpha)
    m = _check_m(m)
    op = as_operator(A)
    if norms_or_eigs is None:
        mat = getattr(op, "matrix", None)
        if mat is None:
            raise ValueError("extreme eigenvalues are required for matrix-free operators")
        norms_or_eigs = estimate_norms(mat)
    if isinstance(norms_or_eigs, NormEstimates):
        lam_max, lam_min = norms_or_eigs.norm_a, 1.0 / norms_or_eigs.norm_ainv
    else:
        lam_min, lam_max = (float(v) for v in norms_or_eigs)
    sel = select_tau(m, alpha, 1.0 / lam_min, 1.0 / lam_max)
    from .operators import ScaledOperator

    scaled = ScaledOperator(op, sel.tau)
    start = op.evals
    S = gj2_sum(scaled, alpha, m)
    value = sel.tau ** (-alpha) * scaled.matvec(S)
    rep = _report(op, value, m, "gj2pre", start)
    rep.tau = sel
    return rep


def jacobi_rule_reference(m: int, beta: float, gamma: float):
    """Nodes and weights from the dense eigensolver of this package (cross-check only)."""
    a, b = jacobi_recurrence(m, beta, gamma)
    J = np.diag(a) + np.diag(np.sqrt(b[: m - 1]), 1) + np.diag(np.sqrt(b[: m - 1]), -1)
    w, Q = symmetric_eig(J)
    return w, jacobi_moment0(beta, gamma) * Q[0] ** 2
