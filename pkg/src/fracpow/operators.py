"""Shifted linear operators: objects answering solves with ``sigma*I + A``.

Every quadrature rule in the package touches the matrix only through
``solve(sigma, y)`` and ``matvec(x)``, so dense, sparse and user-supplied
backends are interchangeable.  ``evals`` counts solves, which is the
integrand-evaluation count reported by the rules.
"""

from __future__ import annotations

import threading
from typing import Callable, Optional

import numpy as np

from .linalg import CsrMatrix, as_dense, lu_solve_shifted


class ShiftedLinearOperator:
    kind = "abstract"

    def __init__(self, dim: int):
        self.dim = dim
        self._evals = 0
        self._lock = threading.Lock()

    @property
    def evals(self) -> int:
        return self._evals

    def reset(self) -> None:
        with self._lock:
            self._evals = 0

    def _count(self) -> None:
        with self._lock:
            self._evals += 1

    def solve_skipped(self) -> None:
        """Count an integrand evaluation whose solve was done analytically."""
        self._count()

    def solve(self, sigma: float, y):
        self._count()
        return self._solve(sigma, y)

    def _solve(self, sigma, y):  # pragma: no cover - interface
        raise NotImplementedError

    def matvec(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def identity(self):
        return np.eye(self.dim)


class DenseLUOperator(ShiftedLinearOperator):
    """Dense backend: one LU factorisation of ``sigma*I + A`` per solve."""

    kind = "dense-LU"

    def __init__(self, A, pivot_tol: Optional[float] = None):
        A = as_dense(A)
        super().__init__(A.shape[0])
        self.matrix = A
        self.pivot_tol = pivot_tol

    def _solve(self, sigma, y):
        return lu_solve_shifted(self.matrix, sigma, y, self.pivot_tol)

    def matvec(self, x):
        return self.matrix @ x


class SparseCGOperator(ShiftedLinearOperator):
    """Sparse SPD backend: conjugate gradients on ``sigma*I + A``."""

    kind = "sparse-CG"

    def __init__(self, A: CsrMatrix, tol: float = 1e-10, max_iter: Optional[int] = None):
        super().__init__(A.n)
        self.matrix = A
        self.tol = tol
        self.max_iter = max_iter

    def _solve(self, sigma, y):
        from .action import cg_solve_shifted

        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            return cg_solve_shifted(self.matrix, sigma, y, self.tol, self.max_iter)
        cols = [cg_solve_shifted(self.matrix, sigma, y[:, j], self.tol, self.max_iter)
                for j in range(y.shape[1])]
        return np.column_stack(cols)

    def matvec(self, x):
        return self.matrix.matvec(x)


class CallbackOperator(ShiftedLinearOperator):
    """User-supplied solver hook: ``solve(sigma, y)`` and ``matvec(x)`` callables."""

    kind = "callback"

    def __init__(self, dim: int, solve: Callable, matvec: Callable, matrix=None):
        super().__init__(dim)
        self._solve_fn = solve
        self._matvec_fn = matvec
        self.matrix = matrix

    def _solve(self, sigma, y):
        return self._solve_fn(sigma, y)

    def matvec(self, x):
        return self._matvec_fn(x)


class ScaledOperator(ShiftedLinearOperator):
    """View of ``c*A`` for an inner operator on ``A`` (``c > 0``).

    Solves are forwarded, so the inner operator's counter also advances.
    """

    def __init__(self, inner: ShiftedLinearOperator, c: float):
        super().__init__(inner.dim)
        self.inner = inner
        self.c = float(c)
        self.kind = inner.kind
        m = getattr(inner, "matrix", None)
        self.matrix = None if m is None or isinstance(m, CsrMatrix) else self.c * m

    def _solve(self, sigma, y):
        return self.inner.solve(sigma / self.c, y) / self.c

    def matvec(self, x):
        return self.c * self.inner.matvec(x)


def as_operator(A) -> ShiftedLinearOperator:
    if isinstance(A, ShiftedLinearOperator):
        return A
    if isinstance(A, CsrMatrix):
        return SparseCGOperator(A)
    return DenseLUOperator(A)
