"""Dense/sparse matrix plumbing: shifted LU solves, norm estimation, Jacobi eigensolver.

Dense matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``;
:func:`as_dense` validates them.  Sparse matrices use :class:`CsrMatrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConvergenceFailure, NotSymmetric, SingularShiftedSystem

_EPS = np.finfo(float).eps


def as_dense(A) -> np.ndarray:
    """Return ``A`` as a float64 square array, rejecting non-square or non-finite input."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def is_symmetric(A: np.ndarray, rtol: float = 1e-12) -> bool:
    nrm = np.linalg.norm(A)
    return bool(np.linalg.norm(A - A.T) <= rtol * nrm)


@dataclass(frozen=True)
class CsrMatrix:
    """Square matrix in compressed-sparse-row form."""

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    _sp: scipy.sparse.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        row_ptr = np.asarray(self.row_ptr, dtype=np.int64)
        col_idx = np.asarray(self.col_idx, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if row_ptr.shape != (self.n + 1,) or row_ptr[0] != 0:
            raise ValueError("row_ptr must have length n+1 and start at 0")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if row_ptr[-1] != len(col_idx) or len(col_idx) != len(values):
            raise ValueError("row_ptr, col_idx and values are inconsistent")
        if len(col_idx) and (col_idx.min() < 0 or col_idx.max() >= self.n):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(values)):
            raise ValueError("CSR values must be finite")
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)
        sp = scipy.sparse.csr_matrix((values, col_idx, row_ptr), shape=(self.n, self.n))
        object.__setattr__(self, "_sp", sp)

    @classmethod
    def from_scipy(cls, M) -> "CsrMatrix":
        M = scipy.sparse.csr_matrix(M)
        M.sum_duplicates()
        M.sort_indices()
        if M.shape[0] != M.shape[1]:
            raise ValueError("CSR matrix must be square")
        return cls(M.shape[0], M.indptr, M.indices, M.data)

    @classmethod
    def from_dense(cls, A) -> "CsrMatrix":
        return cls.from_scipy(scipy.sparse.csr_matrix(as_dense(A)))

    @property
    def shape(self):
        return (self.n, self.n)

    def to_scipy(self) -> scipy.sparse.csr_matrix:
        return self._sp

    def toarray(self) -> np.ndarray:
        return self._sp.toarray()

    def matvec(self, x):
        return self._sp @ x

    def rmatvec(self, x):
        return self._sp.T @ x

    def diagonal(self) -> np.ndarray:
        return self._sp.diagonal()

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        diff = self._sp - self._sp.T
        return bool(scipy.sparse.linalg.norm(diff) <= rtol * scipy.sparse.linalg.norm(self._sp))


MatrixLike = Union[np.ndarray, CsrMatrix]


@dataclass(frozen=True)
class NormEstimates:
    """Estimates of ||A||_2, ||A^{-1}||_2 and a lower bound on the spectral radius."""

    norm_a: float
    norm_ainv: float
    rel_tol: float = 0.0
    spectral_radius_lb: Optional[float] = None

    def __post_init__(self):
        if not (self.norm_a > 0 and self.norm_ainv > 0):
            raise ValueError("norm estimates must be positive")
        if not (0.0 <= self.rel_tol < 0.5):
            raise ValueError("rel_tol must lie in [0, 0.5)")
        if self.norm_a * self.norm_ainv < (1.0 - 2.0 * self.rel_tol) * (1 - 4 * _EPS):
            raise ValueError(
                "inconsistent norm estimates: norm_a * norm_ainv is below 1 - 2*rel_tol"
            )
        if self.spectral_radius_lb is None:
            object.__setattr__(self, "spectral_radius_lb", 1.0 / self.norm_ainv)

    @property
    def kappa(self) -> float:
        return self.norm_a * self.norm_ainv

    @classmethod
    def from_eigenvalues(cls, lam_min: float, lam_max: float) -> "NormEstimates":
        """Exact estimates of an SPD matrix from its extreme eigenvalues."""
        return cls(lam_max, 1.0 / lam_min, 0.0, lam_max)

    def scaled(self, c: float) -> "NormEstimates":
        """Estimates for ``c * A`` (``c > 0``)."""
        return NormEstimates(
            self.norm_a * c, self.norm_ainv / c, self.rel_tol, self.spectral_radius_lb * c
        )


def lu_solve_shifted(A, sigma: float, B, pivot_tol: Optional[float] = None):
    """Solve ``(sigma*I + A) X = B`` by LU with partial pivoting.

    ``B`` may be a vector or a matrix.  Raises :class:`SingularShiftedSystem`
    when a pivot of ``U`` falls to ``pivot_tol`` or below; the default
    threshold is the smallest normal double scaled by ``max|M_ij|``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    M = A + sigma * np.eye(n)
    scale = np.max(np.abs(M)) if M.size else 1.0
    if pivot_tol is None:
        pivot_tol = np.finfo(float).tiny * max(scale, 1.0)
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    d = np.abs(np.diag(lu))
    k = int(np.argmin(d))
    if not d[k] > pivot_tol:
        raise SingularShiftedSystem(sigma, k, float(np.diag(lu)[k]))
    return scipy.linalg.lu_solve((lu, piv), B, check_finite=False)


def _power_sequence(step, v0, rel_tol, max_iter, what):
    """Power iteration on a symmetric PSD operator given by ``step``.

    ``step(v)`` returns ``(theta, w)`` where ``theta`` is the singular-value
    lower bound ||Mv||/||v|| and ``w`` the next (unnormalised) iterate.  Stops
    when an Aitken-style extrapolation of the remaining increase falls below
    ``rel_tol / 4`` of the current estimate on two consecutive iterations.
    """
    v = v0 / np.linalg.norm(v0)
    thetas = []
    calm = 0
    for _ in range(max_iter):
        theta, w = step(v)
        thetas.append(theta)
        nw = np.linalg.norm(w)
        if nw == 0 or not math.isfinite(nw):
            raise ConvergenceFailure(f"{what}: iterate vanished or overflowed", last=thetas[-2:])
        v = w / nw
        if len(thetas) >= 2:
            d1 = thetas[-1] - thetas[-2]
            if abs(d1) <= 8 * _EPS * theta:
                return theta
            if len(thetas) >= 3:
                d0 = thetas[-2] - thetas[-3]
                q = d1 / d0 if d0 > 0 else 1.0
                if 0 <= q < 1:
                    # geometric tail d1*q/(1-q); doubled because clustered top
                    # singular values make the increments decay only like 1/k^2
                    remaining = 2.0 * abs(d1) * max(q / (1 - q), 1.0)
                    calm = calm + 1 if remaining <= 0.25 * rel_tol * theta else 0
                    if calm >= 2:
                        return theta
                else:
                    calm = 0
    raise ConvergenceFailure(
        f"{what}: no convergence after {max_iter} iterations", last=thetas[-2:], history=thetas
    )


def _trace_power_bound(A: np.ndarray, s: float, jmax: int = 6) -> float:
    """Rigorous lower bound rho(A) >= |tr(A^k)/n|^(1/k), k = 1, 2, 4, ..."""
    n = A.shape[0]
    B = A / s
    best = 0.0
    for j in range(jmax + 1):
        k = 2**j
        t = abs(np.trace(B)) / n
        if t > 0:
            best = max(best, s * t ** (1.0 / k))
        B = B @ B
        nb = np.max(np.abs(B))
        if not math.isfinite(nb) or nb == 0:
            break
    return best


def estimate_norms(A: MatrixLike, rel_tol: float = 1e-3, max_iter: Optional[int] = None,
                   seed: int = 20201) -> NormEstimates:
    """Estimate ||A||_2 and ||A^{-1}||_2 by power / inverse iteration on A^T A.

    Both estimates are Rayleigh-type lower bounds of the true values.  The
    spectral-radius lower bound is ``norm_a`` for symmetric input; otherwise
    the best of the trace-power and determinant bounds.
    """
    if not (0 < rel_tol < 0.5):
        raise ValueError("rel_tol must lie in (0, 0.5)")
    sparse = isinstance(A, CsrMatrix)
    if not sparse:
        A = as_dense(A)
    n = A.shape[0]
    if max_iter is None:
        max_iter = max(10 * n, 100)
    v0 = np.random.default_rng(seed).standard_normal(n)

    if sparse:
        matvec, rmatvec = A.matvec, A.rmatvec
        lu = scipy.sparse.linalg.splu(A.to_scipy().tocsc())
        solve = lu.solve
        solve_t = lambda y: lu.solve(y, trans="T")  # noqa: E731
        symmetric = A.is_symmetric()
    else:
        matvec = lambda x: A @ x  # noqa: E731
        rmatvec = lambda x: A.T @ x  # noqa: E731
        lu_piv = scipy.linalg.lu_factor(A, check_finite=False)
        if np.any(np.diag(lu_piv[0]) == 0):
            raise SingularShiftedSystem(0.0, int(np.argmin(np.abs(np.diag(lu_piv[0])))), 0.0)
        solve = lambda y: scipy.linalg.lu_solve(lu_piv, y, check_finite=False)  # noqa: E731
        solve_t = lambda y: scipy.linalg.lu_solve(lu_piv, y, trans=1, check_finite=False)  # noqa: E731
        symmetric = is_symmetric(A)

    def fwd(v):
        w = matvec(v)
        return np.linalg.norm(w) / np.linalg.norm(v), rmatvec(w)

    def inv(v):
        w = solve(v)
        return np.linalg.norm(w) / np.linalg.norm(v), solve_t(w)

    norm_a = _power_sequence(fwd, v0, rel_tol, max_iter, "power iteration for ||A||")
    norm_ainv = _power_sequence(inv, v0, rel_tol, max_iter, "inverse iteration for ||A^-1||")

    if symmetric:
        rho_lb = norm_a
    elif sparse:
        rho_lb = abs(A.diagonal().sum()) / n
    else:
        logdet = np.mean(np.log(np.abs(np.diag(lu_piv[0]))))
        rho_lb = max(math.exp(logdet), _trace_power_bound(A, norm_a))
    rho_lb = min(max(rho_lb, np.finfo(float).tiny), norm_a)
    return NormEstimates(float(norm_a), float(norm_ainv), rel_tol, float(rho_lb))


def norm2_estimate(M: np.ndarray, rel_tol: float = 1e-6) -> float:
    """Spectral norm of an arbitrary (possibly rectangular) array by power iteration."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    if not np.any(M):
        return 0.0
    v0 = np.random.default_rng(7).standard_normal(M.shape[1])

    def step(v):
        w = M @ v
        return np.linalg.norm(w) / np.linalg.norm(v), M.T @ w

    return float(_power_sequence(step, v0, rel_tol, max(20 * M.shape[1], 200), "2-norm estimate"))


def _round_robin(m: int):
    """Yield the m-1 rounds of disjoint index pairs of a round-robin tournament."""
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        players = [players[0], players[-1]] + players[1:-1]


def symmetric_eig(A, max_sweeps: int = 30, sym_tol: float = 1e-12):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations are grouped into rounds of disjoint pairs (round-robin
    ordering) and each round is applied as one vectorised update.  Returns
    ``(eigenvalues, Q)`` with eigenvalues ascending and ``A = Q diag(w) Q^T``.
    """
    A = as_dense(A)
    if not is_symmetric(A, sym_tol):
        raise NotSymmetric("symmetric_eig requires ||A - A^T||_F <= 1e-12 ||A||_F")
    n = A.shape[0]
    W = 0.5 * (A + A.T)
    Q = np.eye(n)
    if n == 1:
        return W.diagonal().copy(), Q
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        pq = np.array([(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n])
        rounds.append((pq[:, 0], pq[:, 1]))
    tiny = np.finfo(float).tiny
    for _ in range(max_sweeps):
        rotated = False
        for P, R in rounds:
            apq = W[P, R]
            app = W[P, P]
            aqq = W[R, R]
            act = np.abs(apq) > np.maximum(_EPS * np.sqrt(np.abs(app * aqq)), tiny)
            if not np.any(act):
                continue
            rotated = True
            P, R, apq, app, aqq = P[act], R[act], apq[act], app[act], aqq[act]
            theta = (aqq - app) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cp, sp = W[:, P].copy(), W[:, R].copy()
            W[:, P] = cp * c - sp * s
            W[:, R] = cp * s + sp * c
            rp, rq = W[P, :].copy(), W[R, :].copy()
            W[P, :] = c[:, None] * rp - s[:, None] * rq
            W[R, :] = s[:, None] * rp + c[:, None] * rq
            W[P, R] = 0.0
            W[R, P] = 0.0
            qp, qq = Q[:, P].copy(), Q[:, R].copy()
            Q[:, P] = qp * c - qq * s
            Q[:, R] = qp * s + qq * c
        if not rotated:
            w = W.diagonal().copy()
            order = np.argsort(w, kind="stable")
            return w[order], Q[:, order]
    off = np.linalg.norm(W - np.diag(W.diagonal()))
    raise ConvergenceFailure(
        f"cyclic Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})",
        last=off,
    )
