import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_spd
from fracpow.de import (
    ToleranceSpec,
    abscissas,
    de_adaptive,
    de_fixed,
    de_integrand,
    get_interval,
    trapezoid_refine,
    trapezoid_sum,
    truncation_error_bound,
)
from fracpow.errors import (
    AlphaOutOfRange,
    EvalBudgetExceeded,
    PreconditionViolated,
    ShiftOverflow,
    TolTooLarge,
)
from fracpow.linalg import NormEstimates
from fracpow.operators import DenseLUOperator
from fracpow.oracles import hpd_power

TEN = NormEstimates(10.0, 10.0, 0.0)

# 40-digit evaluations of the interval formulas (mpmath, independent script)
A_REF = 2.945243112740431161e-8
B_REF = 339530545.26271005
L_REF = -3.7882683131875461
R_REF = 3.9128359178215622


class TestInterval:
    def test_frozen_example(self):
        iv = get_interval(TEN, 0.5, 1e-7)
        assert abs(iv.a / A_REF - 1) <= 1e-13
        assert abs(iv.b / B_REF - 1) <= 1e-13
        assert abs(iv.l - L_REF) <= 1e-13
        assert abs(iv.r - R_REF) <= 1e-13
        assert iv.a_branch == iv.b_branch == "tolerance"

    def test_norm_branches(self):
        iv = get_interval(TEN, 0.5, 1e3)
        assert iv.a_branch == iv.b_branch == "norm"
        assert math.isclose(iv.a, 20**-0.5, rel_tol=1e-15)
        assert math.isclose(iv.b, 20**0.5, rel_tol=1e-15)

    def test_errors(self):
        with pytest.raises(AlphaOutOfRange):
            get_interval(TEN, 1.0, 1e-3)
        with pytest.raises(AlphaOutOfRange):
            get_interval(TEN, 0.0, 1e-3)
        with pytest.raises(ValueError):
            get_interval(TEN, 0.5, 0.0)

    def test_tol_too_large(self):
        # valid estimates always give a < b; only inconsistent inputs can collapse it
        class Inconsistent:
            norm_a = 0.1
            norm_ainv = 0.1

        with pytest.raises(TolTooLarge):
            get_interval(Inconsistent, 0.5, 1e6)

    @given(st.floats(0.01, 0.99), st.floats(1e-14, 1e-1), st.floats(1.0, 1e8), st.floats(1.0, 1e8))
    def test_validity_and_round_trip(self, alpha, eps, na, ni):
        iv = get_interval(NormEstimates(na, ni, 0.0), alpha, eps)
        assert iv.l < iv.r
        assert iv.a <= (2 * ni) ** (-alpha)
        assert iv.b >= (2 * na) ** alpha
        # round trip in log space, since b overflows for alpha near 1
        la = alpha * math.pi * math.sinh(iv.l) / 2
        lb = alpha * math.pi * math.sinh(iv.r) / 2
        assert abs(la - iv.log_a) <= 1e-13 * max(1.0, abs(iv.log_a))
        assert abs(lb - iv.log_b) <= 1e-13 * max(1.0, abs(iv.log_b))
        if iv.log_b < 700:
            assert abs(math.exp(lb) - iv.b) <= 1e-13 * iv.b * max(1.0, abs(iv.log_b))

    @given(st.floats(0.05, 0.95), st.floats(1e-14, 1e-2), st.floats(1.0, 1e6))
    def test_monotone(self, alpha, eps, k):
        n = NormEstimates(math.sqrt(k), math.sqrt(k), 0.0)
        big, small = get_interval(n, alpha, eps), get_interval(n, alpha, eps / 2)
        assert small.l <= big.l and small.r >= big.r

    @given(st.floats(0.05, 0.95), st.floats(1e-14, 1e-2), st.floats(1.0, 1e6))
    def test_bound_meets_half_eps(self, alpha, eps, k):
        n = NormEstimates(k, k, 0.0)
        iv = get_interval(n, alpha, eps)
        total, _, _ = truncation_error_bound(n, alpha, iv.a, iv.b)
        assert total <= 0.5 * eps * (1 + 1e-12)


class TestBound:
    def test_frozen(self):
        one = NormEstimates(1.0, 1.0, 0.0)
        total, left, right = truncation_error_bound(one, 0.5, 0.25, 4.0)
        assert math.isclose(total, 0.42441318157838756205, rel_tol=1e-14)
        assert math.isclose(left, 0.21220659078919378103, rel_tol=1e-14)
        assert math.isclose(right, 0.21220659078919378103, rel_tol=1e-14)

    def test_limits(self):
        one = NormEstimates(1.0, 1.0, 0.0)
        t, _, _ = truncation_error_bound(one, 0.5, 1e-30, 1e30)
        assert 0 < t < 1e-29

    def test_preconditions(self):
        one = NormEstimates(1.0, 1.0, 0.0)
        with pytest.raises(PreconditionViolated) as e:
            truncation_error_bound(one, 0.5, 0.9, 4.0)
        assert e.value.which == "a"
        with pytest.raises(PreconditionViolated) as e:
            truncation_error_bound(one, 0.5, 0.1, 1.0)
        assert e.value.which == "b"

    @given(st.floats(0.01, 0.99), st.floats(1.0, 1e3), st.floats(0.0, 10.0))
    def test_right_tail_beats_comparison(self, alpha, na, t):
        n = NormEstimates(na, na, 0.0)
        b = (2 * na) ** alpha * (1 + t)
        _, _, right = truncation_error_bound(n, alpha, 1e-9 * (2 * na) ** (-alpha), b)
        s = math.sin(alpha * math.pi)
        comparison = 2 * s * na / (math.pi * (1 - alpha)) * b ** (1 - 1 / alpha)
        assert right < comparison


class TestTrapezoid:
    def test_integrand_identity(self):
        op = DenseLUOperator(np.eye(2))
        F = de_integrand(op, 0.5, 0.0)
        assert np.allclose(F, 0.5 * np.eye(2), rtol=1e-15)

    def test_integrand_frozen(self):
        op = DenseLUOperator(np.array([[4.0]]))
        assert math.isclose(de_integrand(op, 0.5, 1.0)[0, 0], 0.37579913080921439751, rel_tol=1e-14)

    def test_overflow_guard(self):
        with pytest.raises(ShiftOverflow):
            de_integrand(DenseLUOperator(np.eye(1)), 0.5, 800.0)

    def test_huge_shift_asymptotic(self):
        op = DenseLUOperator(np.diag([2.0, 3.0]))
        x = 6.9  # pi*sinh(x)/2 is about 780, beyond the double range of exp
        F = de_integrand(op, 0.95, x)
        e = 0.5 * math.pi * math.sinh(x)
        expected = math.exp((0.95 - 1.0) * e) * math.cosh(x)
        assert np.allclose(F, expected * np.eye(2), rtol=1e-14, atol=0)
        assert op.evals == 1

    def test_alpha_near_one(self):
        A = np.diag([0.5, 2.0])
        rep = de_adaptive(A, 0.99, ToleranceSpec.relative(1e-9))
        assert rep.interval.log_b > 709
        assert np.allclose(np.diag(rep.value), [0.5**0.99, 2.0**0.99], rtol=1e-8)

    def test_nesting_exact(self):
        l, r, m = -3.1, 2.7, 9
        h = (r - l) / (m - 1)
        coarse = abscissas(l, h, m)
        fine = abscissas(l, h / 2, 2 * m - 1)
        assert np.array_equal(fine[::2], l + (h / 2) * (2 * np.arange(m)))
        assert np.allclose(fine[::2], coarse, rtol=0, atol=1e-15)

    @given(st.integers(0, 2**31), st.integers(2, 20), st.floats(0.05, 0.95))
    def test_refine_matches_direct(self, seed, m, alpha):
        A = random_spd(np.random.default_rng(seed), 6, 50.0)
        op = DenseLUOperator(A)
        l, r = -3.0, 3.2
        T, h = trapezoid_sum(op, alpha, l, r, m)
        T2, h2, m2 = trapezoid_refine(T, h, l, m, op, alpha)
        D, hd = trapezoid_sum(op, alpha, l, r, 2 * m - 1)
        assert m2 == 2 * m - 1 and h2 == h / 2
        assert np.linalg.norm(T2 - D) <= 1e-13 * np.linalg.norm(D)

    def test_fixed_structural_identity(self, spd_well):
        tol = ToleranceSpec.relative(1e-8)
        rep = de_fixed(spd_well, 0.3, tol, 20, norms=NormEstimates(10.0, 10.0, 0.0))
        op = DenseLUOperator(spd_well)
        T, _ = trapezoid_sum(op, 0.3, rep.interval.l, rep.interval.r, 20)
        assert np.array_equal(rep.value, 0.5 * math.sin(0.3 * math.pi) * (spd_well @ T))
        assert rep.evals == 20 and rep.level == -1 and rep.est_error is None


class TestAdaptive:
    def test_identity(self):
        # a constant spectrum still needs a few halvings from m0 = 8 at eps = 1e-8
        rep = de_adaptive(np.eye(4), 0.3, ToleranceSpec.absolute(1e-8), m0=8)
        assert rep.level == 3 and rep.m == 113
        assert rep.est_error <= 0.5e-8
        assert np.max(np.abs(rep.value - np.eye(4))) <= 1e-8

    def test_eval_count_schedule(self, spd_well):
        rep = de_adaptive(spd_well, 0.5, ToleranceSpec.relative(1e-9), m0=8)
        for s, (m, _) in enumerate(rep.history):
            assert m == 2 ** (s + 1) * 7 + 1
        assert rep.evals == rep.m
        assert all(e >= 0 for _, e in rep.history)

    def test_ill_point_eight(self, spd_ill):
        rep = de_adaptive(spd_ill, 0.8, ToleranceSpec.relative(1e-7))
        ref = hpd_power(spd_ill, 0.8)
        assert np.linalg.norm(rep.value - ref, 2) / np.linalg.norm(ref, 2) <= 1e-7

    @pytest.mark.parametrize("norm", ["fro", "2"])
    def test_estimate_bounds_error(self, spd_ill, norm):
        rep = de_adaptive(spd_ill, 0.5, ToleranceSpec.relative(1e-6), norm=norm)
        ref = hpd_power(spd_ill, 0.5)
        # converged estimate comfortably above the true error in the asymptotic regime
        err = np.linalg.norm(rep.value - ref, 2) / np.linalg.norm(ref, 2)
        assert err <= 1e-6

    def test_budget(self, spd_ill):
        with pytest.raises(EvalBudgetExceeded) as e:
            de_adaptive(spd_ill, 0.5, ToleranceSpec.relative(1e-12), max_evals=50)
        assert e.value.report.evals <= 50
        assert e.value.report.value.shape == spd_ill.shape

    def test_workers_agree(self, spd_well):
        t = ToleranceSpec.relative(1e-9)
        a = de_adaptive(spd_well, 0.4, t).value
        b = de_adaptive(spd_well, 0.4, t, workers=4).value
        assert np.linalg.norm(a - b) <= 1e-13 * np.linalg.norm(a)


class TestToleranceSpec:
    def test_compensated_absolute(self):
        t = ToleranceSpec.absolute(1e-6, compensate=True, norm_rel_tol=1e-2)
        r = t.resolve(TEN, 0.5)
        assert math.isclose(r.eps_effective, 1e-6 / (1 + 1 / 0.99), rel_tol=1e-15)

    def test_relative(self):
        n = NormEstimates(10.0, 10.0, 0.0, spectral_radius_lb=4.0)
        r = ToleranceSpec.relative(1e-6).resolve(n, 0.5)
        assert math.isclose(r.eps_effective, 2e-6, rel_tol=1e-15)

    def test_invalid(self):
        with pytest.raises(ValueError):
            ToleranceSpec("bogus", 1e-3)
        with pytest.raises(ValueError):
            ToleranceSpec.absolute(0.0)
