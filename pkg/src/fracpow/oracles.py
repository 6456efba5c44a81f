"""Reference computations of matrix powers, independent of the quadrature rules.

* :func:`db_sqrt` - Denman-Beavers coupled iteration for A^(1/2);
* :func:`inv_newton_root` - coupled inverse Newton iteration for A^(-1/p);
* :func:`hpd_power` - spectral definition through the Jacobi eigensolver;
* :func:`rational_power` - A^(p/q) composed from the roots above.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import ConvergenceFailure, NotSPD, SingularIterate
from .linalg import CsrMatrix, NormEstimates, as_dense, norm2_estimate, symmetric_eig


def _inv(X):
    try:
        Y = np.linalg.inv(X)
    except np.linalg.LinAlgError as exc:
        raise SingularIterate(f"singular iterate: {exc}") from exc
    if not np.all(np.isfinite(Y)):
        raise SingularIterate("iterate inverse is not finite")
    return Y


def _rel_fro(X, Y):
    return np.linalg.norm(X - Y) / max(np.linalg.norm(Y), np.finfo(float).tiny)


def db_sqrt(A, tol: float = 1e-10, max_iter: int = 100, step_tol: float = 1e-14) -> np.ndarray:
    """Principal square root by the Denman-Beavers iteration.

    Iterates ``X <- (X + Y^-1)/2``, ``Y <- (Y + X^-1)/2`` from ``X = A``,
    ``Y = I`` until the relative step stalls below ``step_tol`` (or stops
    decreasing once it is below 1e-8), then checks the residual
    ``||X^2 - A||_F <= tol ||A||_F``.
    """
    A = as_dense(A)
    X, Y = A.copy(), np.eye(A.shape[0])
    prev = math.inf
    for k in range(max_iter):
        Xn = 0.5 * (X + _inv(Y))
        Yn = 0.5 * (Y + _inv(X))
        step = _rel_fro(Xn, X)
        X, Y = Xn, Yn
        if step <= step_tol or (step < 1e-8 and step >= prev):
            break
        prev = step
    else:
        raise ConvergenceFailure(f"Denman-Beavers iteration: no convergence in {max_iter} steps",
                                 last=step)
    res = np.linalg.norm(X @ X - A) / np.linalg.norm(A)
    if res > tol:
        raise ConvergenceFailure(f"Denman-Beavers residual {res:.2e} exceeds {tol:.1e}", last=res)
    return X


def inv_newton_root(A, p: int, tol: float = 1e-10, max_iter: int = 100, presqrt: int = 2,
                    step_tol: float = 1e-14) -> np.ndarray:
    """A^(-1/p) by the coupled inverse Newton iteration.

    ``presqrt`` square roots are taken first so that the spectrum sits in
    the sector |arg z| < pi/2^(presqrt+1), where the iteration started from
    ``X0 = I/c`` with ``c^p = ||B||_2`` converges; the result is squared back
    ``presqrt`` times.
    """
    A = as_dense(A)
    if p < 1:
        raise ValueError("p must be a positive integer")
    n = A.shape[0]
    I = np.eye(n)
    B = A
    for _ in range(presqrt):
        B = db_sqrt(B, tol=max(tol, 1e-12))
    cp = norm2_estimate(B)
    X = I / cp ** (1.0 / p)
    M = B / cp
    prev = math.inf
    for _ in range(max_iter):
        T = ((p + 1) * I - M) / p
        X = X @ T
        M = np.linalg.matrix_power(T, p) @ M
        step = np.linalg.norm(M - I) / math.sqrt(n)
        if not math.isfinite(step):
            raise SingularIterate("inverse Newton iterate overflowed")
        if step <= step_tol or (step < 1e-8 and step >= prev):
            break
        prev = step
    else:
        raise ConvergenceFailure(f"inverse Newton iteration: no convergence in {max_iter} steps",
                                 last=step)
    for _ in range(presqrt):
        X = X @ X
    return X


def matrix_root(A, p: int, tol: float = 1e-10, **kw) -> np.ndarray:
    """Principal p-th root with the residual check ``||R^p - A||_F <= tol ||A||_F``."""
    A = as_dense(A)
    if p == 1:
        return A.copy()
    if p == 2:
        return db_sqrt(A, tol=tol, **kw)
    R = _inv(inv_newton_root(A, p, tol=tol, **kw))
    res = np.linalg.norm(np.linalg.matrix_power(R, p) - A) / np.linalg.norm(A)
    if res > tol:
        raise ConvergenceFailure(f"p-th root residual {res:.2e} exceeds {tol:.1e}", last=res)
    return R


def rational_power(A, alpha: float, max_den: int = 20, tol: float = 1e-10) -> np.ndarray:
    """A^alpha for rational alpha = p/q as (A^(1/q))^p, e.g. A^0.8 = (A^(1/5))^4."""
    frac = Fraction(alpha).limit_denominator(max_den)
    if abs(float(frac) - alpha) > 1e-12:
        raise ValueError(f"alpha={alpha} is not a fraction with denominator <= {max_den}")
    if frac.numerator < 0:
        raise ValueError("negative powers are not supported")
    R = matrix_root(A, frac.denominator, tol=tol)
    return np.linalg.matrix_power(R, frac.numerator)


def hpd_power(A, alpha: float) -> np.ndarray:
    """Q diag(lambda^alpha) Q^T for a symmetric positive definite matrix."""
    w, Q = symmetric_eig(A)
    if w[0] <= 0:
        raise NotSPD(f"matrix is not positive definite (smallest eigenvalue {w[0]:.3e})")
    return (Q * w**alpha) @ Q.T


def reference_power(A, alpha: float) -> np.ndarray:
    """Oracle dispatch: spectral definition for SPD input, root compositions otherwise."""
    A = as_dense(A)
    if np.array_equal(A, A.T):
        w, Q = symmetric_eig(A)
        if w[0] > 0:
            return (Q * w**alpha) @ Q.T
    return rational_power(A, alpha)


def scale_matrix(A, norms: NormEstimates):
    """Balance A so its extreme singular values multiply to one.

    Returns ``(c, c*A)`` with ``c = 1/sqrt(sigma_max*sigma_min)``; callers
    recover ``A^alpha = c^-alpha (cA)^alpha``.
    """
    c = math.sqrt(norms.norm_ainv / norms.norm_a)
    if isinstance(A, CsrMatrix):
        return c, CsrMatrix(A.n, A.row_ptr, A.col_idx, c * A.values)
    return c, c * as_dense(A)
