import math

import numpy as np
import pytest
import scipy.sparse
from hypothesis import given, strategies as st

from conftest import random_spd
from fracpow.errors import NotSymmetric, SingularShiftedSystem
from fracpow.linalg import (
    CsrMatrix,
    NormEstimates,
    estimate_norms,
    lu_solve_shifted,
    norm2_estimate,
    symmetric_eig,
)


class TestShiftedSolve:
    def test_identity(self):
        X = lu_solve_shifted(np.eye(2), 1.0, np.eye(2))
        assert np.allclose(X, np.eye(2) / 2, atol=0, rtol=1e-15)

    def test_diagonal(self):
        x = lu_solve_shifted(np.diag([1.0, 2.0]), 3.0, np.array([1.0, 1.0]))
        assert np.allclose(x, [0.25, 0.2], rtol=1e-15)

    def test_residual_random(self, rng):
        A = rng.standard_normal((8, 8)) + 8 * np.eye(8)
        B = rng.standard_normal((8, 3))
        X = lu_solve_shifted(A, 0.7, B)
        assert np.linalg.norm((0.7 * np.eye(8) + A) @ X - B) <= 1e-12 * np.linalg.norm(B)

    def test_singular_reports_shift(self):
        A = np.diag([-1.0, 2.0])
        with pytest.raises(SingularShiftedSystem) as exc:
            lu_solve_shifted(A, 1.0, np.eye(2))
        assert exc.value.sigma == 1.0
        assert exc.value.pivot_index in (0, 1)

    @given(st.integers(2, 64), st.floats(0.0, 1e3), st.integers(0, 2**31))
    def test_residual_property(self, n, sigma, seed):
        r = np.random.default_rng(seed)
        A = r.standard_normal((n, n)) + 2 * math.sqrt(n) * np.eye(n)
        B = r.standard_normal((n, 2))
        X = lu_solve_shifted(A, sigma, B)
        R = (sigma * np.eye(n) + A) @ X - B
        assert np.linalg.norm(R) <= 1e-10 * np.linalg.norm(B)


class TestNormEstimates:
    def test_invariants(self):
        with pytest.raises(ValueError):
            NormEstimates(0.0, 1.0)
        with pytest.raises(ValueError):
            NormEstimates(1.0, 1.0, rel_tol=0.5)
        with pytest.raises(ValueError):
            NormEstimates(0.1, 0.1, rel_tol=1e-3)  # kappa = 0.01 < 1

    def test_diag(self):
        n = estimate_norms(np.diag([1.0, 10.0]), 1e-3)
        assert 9.99 <= n.norm_a <= 10.01
        assert 0.999 <= n.norm_ainv <= 1.001
        assert n.rel_tol == 1e-3

    def test_identity_exact(self):
        for tol in (1e-1, 1e-3, 1e-8):
            n = estimate_norms(np.eye(5), tol)
            assert n.norm_a == 1.0 and n.norm_ainv == 1.0

    def test_spd_kappa(self, spd_well):
        n = estimate_norms(spd_well, 1e-3)
        assert 1e2 * (1 - 3e-3) <= n.kappa <= 1e2 * (1 + 3e-3)

    def test_sparse_matches_dense(self, rng):
        A = random_spd(rng, 30, 50.0)
        nd = estimate_norms(A, 1e-4)
        ns = estimate_norms(CsrMatrix.from_dense(A), 1e-4)
        assert abs(nd.norm_a / ns.norm_a - 1) < 1e-3
        assert abs(nd.norm_ainv / ns.norm_ainv - 1) < 1e-3

    def test_nonsymmetric_accuracy(self, ns_ill):
        s = np.linalg.svd(ns_ill, compute_uv=False)
        n = estimate_norms(ns_ill, 1e-3)
        assert abs(n.norm_a / s[0] - 1) <= 1e-3
        assert abs(n.norm_ainv * s[-1] - 1) <= 1e-3
        assert 0 < n.spectral_radius_lb <= np.max(np.abs(np.linalg.eigvals(ns_ill))) * (1 + 1e-12)

    @given(st.floats(1e-3, 1e3), st.integers(0, 1000))
    def test_scale_equivariance(self, c, seed):
        A = random_spd(np.random.default_rng(seed), 12, 30.0)
        tol = 1e-3
        n1 = estimate_norms(A, tol)
        n2 = estimate_norms(c * A, tol)
        assert (1 - 2 * tol) * c * n1.norm_a <= n2.norm_a <= (1 + 2 * tol) * c * n1.norm_a

    def test_norm2_estimate(self, rng):
        M = rng.standard_normal((20, 7))
        assert abs(norm2_estimate(M) / np.linalg.norm(M, 2) - 1) < 1e-6


class TestSymmetricEig:
    def test_diag(self):
        w, Q = symmetric_eig(np.diag([3.0, 1.0]))
        assert np.allclose(w, [1.0, 3.0])
        assert np.allclose(np.abs(Q), [[0, 1], [1, 0]])

    def test_2x2(self):
        w, _ = symmetric_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(w, [1.0, 3.0], atol=1e-15)

    def test_3x3_char_poly(self):
        A = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
        w, _ = symmetric_eig(A)
        exact = [2 - math.sqrt(2), 2.0, 2 + math.sqrt(2)]
        assert np.max(np.abs(w - exact)) <= 1e-13

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
    def test_2x2_property(self, a, b, c):
        A = np.array([[a, b], [b, c]])
        w, _ = symmetric_eig(A)
        disc = math.hypot(a - c, 2 * b)
        exact = np.array([(a + c - disc) / 2, (a + c + disc) / 2])
        assert np.max(np.abs(w - exact)) <= 1e-13 * max(1.0, abs(a), abs(b), abs(c))

    def test_reconstruction(self, rng):
        A = random_spd(rng, 20, 1e3)
        w, Q = symmetric_eig(A)
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm((Q * w) @ Q.T - A) <= 1e-12 * np.linalg.norm(A)
        assert np.linalg.norm(Q.T @ Q - np.eye(20)) <= 1e-12 * 20

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            symmetric_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestCsr:
    def test_validation(self):
        with pytest.raises(ValueError):
            CsrMatrix(2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            CsrMatrix(2, np.array([0, 1, 2]), np.array([0, 2]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            CsrMatrix(2, np.array([0, 1, 2]), np.array([0, 1]), np.array([1.0, np.nan]))

    def test_matvec(self, rng):
        M = scipy.sparse.random(15, 15, density=0.3, random_state=1, format="csr")
        C = CsrMatrix.from_scipy(M)
        x = rng.standard_normal(15)
        assert np.allclose(C.matvec(x), M @ x)
        assert np.allclose(C.rmatvec(x), M.T @ x)
