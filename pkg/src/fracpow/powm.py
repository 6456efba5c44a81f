"""High-level entry points: A^alpha and A^alpha b for any real alpha >= 0.

``alpha`` is split into its integer part, done by repeated squaring, and a
fractional part in (0, 1) handled by one of the quadrature rules.  Before
the quadrature the matrix is rescaled, ``A^f = c^-f (cA)^f`` with
``c = 1/sqrt(sigma_max sigma_min)``, so that the extreme singular values of
``cA`` multiply to one.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np

from .action import de_action_adaptive, gj_action_doubling
from .de import ToleranceSpec, de_adaptive, de_fixed
from .gauss_jacobi import gj1, gj2, gj2_preconditioned
from .linalg import CsrMatrix, NormEstimates, as_dense, estimate_norms
from .operators import ScaledOperator, as_operator

METHODS = ("de", "de-adaptive", "gj1", "gj2", "gj2pre")


def _split(alpha: float):
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ValueError("alpha must be a finite nonnegative number")
    k = math.floor(alpha)
    return int(k), alpha - k


def _scaled_tol(tol: ToleranceSpec, c: float, f: float) -> ToleranceSpec:
    # An absolute error e on (cA)^f is an error c^-f e on A^f.
    if tol.mode == "absolute":
        return replace(tol, eps_user=tol.eps_user * c**f)
    return tol


def _int_power(A, k):
    if isinstance(A, CsrMatrix):
        A = A.toarray()
    return np.linalg.matrix_power(np.asarray(A, dtype=float), k)


def fractional_power(A, alpha: float, method: str = "de-adaptive",
                     tol: Optional[ToleranceSpec] = None, m: int = 64, m0: int = 8,
                     max_evals: int = 1000, norms: Optional[NormEstimates] = None,
                     scale: bool = True, workers: int = 1):
    """A^alpha; returns ``(value, report)`` where ``report`` is None for integer alpha."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    tol = tol or ToleranceSpec.relative(1e-8)
    k, f = _split(float(alpha))
    Ad = as_dense(A) if not isinstance(A, CsrMatrix) else A.toarray()
    if f == 0.0:
        return _int_power(Ad, k), None
    if norms is None:
        norms = estimate_norms(A, tol.norm_rel_tol or 1e-3)
    c = math.sqrt(norms.norm_ainv / norms.norm_a) if scale else 1.0
    cA = c * Ad
    cn = norms.scaled(c)
    t = _scaled_tol(tol, c, f)
    if method == "de":
        rep = de_fixed(cA, f, t, m, norms=cn, workers=workers)
    elif method == "de-adaptive":
        rep = de_adaptive(cA, f, t, m0=m0, max_evals=max_evals, norms=cn, workers=workers)
    elif method == "gj1":
        rep = gj1(cA, f, m)
    elif method == "gj2":
        rep = gj2(cA, f, m)
    else:
        rep = gj2_preconditioned(cA, f, m, cn)
    value = c ** (-f) * rep.value
    if k:
        value = _int_power(Ad, k) @ value
    return value, rep


def fractional_action(A, alpha: float, b, method: str = "de-adaptive",
                      tol: Optional[ToleranceSpec] = None, m0: int = 8,
                      max_evals: int = 1000, norms: Optional[NormEstimates] = None,
                      scale: bool = True, raise_on_budget: bool = True):
    """A^alpha b with one of the adaptive rules; returns ``(x, report)``.

    ``A`` may be a dense array, a :class:`CsrMatrix` (SPD, solved by CG) or a
    :class:`ShiftedLinearOperator`.  For the Gauss-Jacobi variants the
    tolerance must be absolute.
    """
    tol = tol or ToleranceSpec.absolute(1e-6)
    k, f = _split(float(alpha))
    op = as_operator(A)
    b = np.asarray(b, dtype=float)
    rhs = b
    if f == 0.0:
        x = b.copy()
        for _ in range(k):
            x = op.matvec(x)
        return x, None
    if norms is None:
        mat = getattr(op, "matrix", None)
        if mat is None:
            raise ValueError("norm estimates are required for matrix-free operators")
        norms = estimate_norms(mat, tol.norm_rel_tol or 1e-3)
    c = math.sqrt(norms.norm_ainv / norms.norm_a) if scale else 1.0
    sop = ScaledOperator(op, c) if c != 1.0 else op
    t = _scaled_tol(tol, c, f)
    if method == "de-adaptive":
        rep = de_action_adaptive(sop, f, t, rhs, m0=m0, max_evals=max_evals,
                                 norms=norms.scaled(c), raise_on_budget=raise_on_budget)
    elif method in ("gj1", "gj2"):
        if t.mode != "absolute":
            raise ValueError("the Gauss-Jacobi doubling rules take an absolute tolerance")
        rep = gj_action_doubling(sop, f, method, t.eps_user, rhs, m0=m0, max_evals=max_evals,
                                 raise_on_budget=raise_on_budget)
    else:
        raise ValueError(f"method {method!r} has no adaptive action variant")
    x = c ** (-f) * rep.x
    for _ in range(k):
        x = op.matvec(x)
    return x, rep
