"""Convergence analysis of the quadrature rules on scalar problems.

For a symmetric positive definite matrix the error of every rule is the
largest scalar error over its eigenvalues, so the scalar integrand

    f(z, lam) = sin(alpha*pi)*lam/2 * exp(alpha*pi*sinh(z)/2) cosh(z)
                / (exp(pi*sinh(z)/2) + lam)

explains the matrix behaviour.  Its poles nearest the real axis sit at
imaginary part ``d0(lam)``, and the trapezoidal rule with mesh h then
converges like exp(-2*pi*d0/h).  The Gauss-Jacobi rates come from the
classical ellipse-of-analyticity argument.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .de import check_alpha, get_interval
from .errors import KNotOdd, NotUnitFraction, PoleProximity
from .linalg import NormEstimates

#: speed reported for a rule that is exact (the second Gauss-Jacobi rule at kappa = 1)
SPEED_SENTINEL = math.inf

_PI2 = math.pi**2


def f_de_eval(z: complex, lam: float, alpha: float) -> complex:
    """Scalar transformed integrand at complex ``z``."""
    z = complex(z)
    s = cmath.sinh(z)
    e = 0.5 * math.pi * s
    pref = 0.5 * math.sin(alpha * math.pi) * lam * cmath.cosh(z)
    if e.real > 0:
        # divide through by exp(e) so nothing overflows for large Re sinh z
        den = 1.0 + lam * cmath.exp(-e)
        num = cmath.exp((alpha - 1.0) * e)
    else:
        den = cmath.exp(e) + lam
        num = cmath.exp(alpha * e)
    if abs(den) < 1e-300:
        raise PoleProximity(f"z={z} is numerically a pole of the integrand")
    return pref * num / den


def _pole_radicand(lam: float, k: int) -> float:
    L2 = math.log(lam) ** 2
    P = L2 + _PI2 / 4.0 + k * k * _PI2
    # P - sqrt(P^2 - k^2 pi^4) without cancellation
    q = (k * k * _PI2**2) / (P + math.sqrt(max(P * P - k * k * _PI2**2, 0.0)))
    q /= _PI2 / 2.0
    slack = 1e-16
    if q > 1.0:
        if q > 1.0 + slack * 16:
            raise ArithmeticError(f"pole radicand {q!r} is out of range")
        q = 1.0
    return max(q, 0.0)


def pole_imag(lam: float, k: int) -> float:
    """Imaginary part of the poles with cosh(x) sin(y) = 2k (k odd)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if int(k) != k or k % 2 == 0:
        raise KNotOdd(f"k must be an odd integer, got {k!r}")
    k = abs(int(k))
    q = _pole_radicand(lam, k)
    return math.asin(math.sqrt(q))


def d0(lam: float) -> float:
    """Distance from the real axis to the nearest pole of the scalar integrand."""
    return pole_imag(lam, 1)


def pole_location(lam: float, k: int = 1) -> complex:
    """The pole x + i*y with y > 0 for odd k, x solving pi*sinh(x)cos(y)/2 = log(lam)."""
    y = pole_imag(lam, k)
    c = 2.0 * abs(k) / math.sin(y)
    x = math.acosh(c)
    if math.log(lam) < 0:
        x = -x
    return complex(x, y)


def _check_kappa(kappa):
    if not kappa >= 1:
        raise ValueError(f"condition number must be >= 1, got {kappa!r}")


def default_eps(kappa: float, alpha: float) -> float:
    """Absolute tolerance giving relative error 2^-53 on a balanced matrix."""
    return 2.0**-53 * kappa ** (alpha / 2.0)


def balanced_norms(kappa: float) -> NormEstimates:
    r = math.sqrt(kappa)
    return NormEstimates(r, r, 0.0)


def speed_de(kappa: float, alpha: float, eps: Optional[float] = None) -> float:
    """phi with error ~ exp(-phi*m) for the m-point DE formula."""
    _check_kappa(kappa)
    alpha = check_alpha(alpha)
    if eps is None:
        eps = default_eps(kappa, alpha)
    iv = get_interval(balanced_norms(kappa), alpha, eps)
    return 2.0 * math.pi * d0(math.sqrt(kappa)) / (iv.r - iv.l)


def speed_gj2(kappa: float) -> float:
    """phi for the second Gauss-Jacobi rule; :data:`SPEED_SENTINEL` at kappa = 1."""
    _check_kappa(kappa)
    q = kappa**0.25
    if q == 1.0:
        return SPEED_SENTINEL
    return 2.0 * math.log((1.0 + q) / abs(1.0 - q))


def is_unit_fraction(alpha: float, tol: float = 1e-9) -> bool:
    inv = 1.0 / alpha
    return abs(inv - round(inv)) <= tol


def speed_gj1(kappa: float, alpha: float) -> float:
    """phi for the first Gauss-Jacobi rule, defined only when 1/alpha is an integer."""
    _check_kappa(kappa)
    alpha = check_alpha(alpha)
    if not is_unit_fraction(alpha):
        raise NotUnitFraction(f"alpha={alpha} is not a unit fraction")
    ka2 = kappa ** (alpha / 2.0)
    c = math.cos(alpha * math.pi)
    num = 1.0 + ka2 + math.sqrt(2.0 * ka2 * (1.0 - c))
    den = math.sqrt(1.0 + kappa**alpha + 2.0 * ka2 * c)
    return 2.0 * math.log(num / den)


@dataclass(frozen=True)
class SpeedRow:
    kappa: float
    alpha: float
    phi_de: float
    phi_gj1: Optional[float]
    phi_gj2: float
    recommended: str


def _argmax(phis):
    best, tag = -math.inf, None
    for name, phi in phis:  # DE first, so ties resolve to it
        if phi is not None and phi > best:
            best, tag = phi, name
    return tag


def recommend_method(kappa: float, alpha: float, eps: Optional[float] = None) -> SpeedRow:
    """Speed constants of the three rules and the fastest one (ties go to DE)."""
    phi_de = speed_de(kappa, alpha, eps)
    phi_gj1 = speed_gj1(kappa, alpha) if is_unit_fraction(alpha) else None
    phi_gj2 = speed_gj2(kappa)
    tag = _argmax([("de", phi_de), ("gj1", phi_gj1), ("gj2", phi_gj2)])
    return SpeedRow(float(kappa), float(alpha), phi_de, phi_gj1, phi_gj2, tag)


@dataclass
class SpeedTable:
    rows: List[SpeedRow]

    @classmethod
    def build(cls, kappas: Sequence[float], alphas: Sequence[float]) -> "SpeedTable":
        return cls([recommend_method(k, a) for a in alphas for k in kappas])

    def crossovers(self) -> List[tuple]:
        """``(alpha, kappa_before, kappa_after, old, new)`` where the recommendation changes."""
        out = []
        for a in sorted({r.alpha for r in self.rows}):
            rows = sorted((r for r in self.rows if r.alpha == a), key=lambda r: r.kappa)
            for r0, r1 in zip(rows, rows[1:]):
                if r0.recommended != r1.recommended:
                    out.append((a, r0.kappa, r1.kappa, r0.recommended, r1.recommended))
        return out


def crossover_kappa(alpha: float, kappas: Sequence[float]) -> Optional[float]:
    """Smallest grid kappa where the DE speed exceeds the second Gauss-Jacobi speed."""
    for k in sorted(kappas):
        if speed_de(k, alpha) > speed_gj2(k):
            return float(k)
    return None


def scalar_de_value(lam: float, alpha: float, l: float, r: float, m: int) -> float:
    """m-point trapezoid sum of the scalar integrand on [l, r], times the prefactor."""
    h = (r - l) / (m - 1)
    x = l + h * np.arange(m)
    e = 0.5 * math.pi * np.sinh(x)
    with np.errstate(over="ignore"):
        # exp(alpha e) / (exp(e) + lam) evaluated on the safe side of the split
        pos = e > 0
        val = np.empty(m)
        val[pos] = np.exp((alpha - 1.0) * e[pos]) / (1.0 + lam * np.exp(-e[pos]))
        val[~pos] = np.exp(alpha * e[~pos]) / (np.exp(e[~pos]) + lam)
    val *= np.cosh(x)
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    return 0.5 * math.sin(alpha * math.pi) * lam * h * float(np.dot(w, val))


def scalar_de_predict(lam: float, alpha: float, eps: float, m: int,
                      norms: Optional[NormEstimates] = None) -> float:
    """Relative error of the m-point DE formula applied to the scalar lam.

    The interval is the one chosen for a matrix with the given norm
    estimates.  By default that matrix is the balanced pair lam, 1/lam
    (so ||A|| = ||A^-1|| = max(lam, 1/lam)), which is what a matrix with
    extreme eigenvalue lam looks like after scaling.
    """
    alpha = check_alpha(alpha)
    if norms is None:
        big = max(lam, 1.0 / lam)
        norms = NormEstimates(big, big, 0.0)
    iv = get_interval(norms, alpha, eps)
    exact = lam**alpha
    return abs(scalar_de_value(lam, alpha, iv.l, iv.r, m) - exact) / exact


def fit_slope(ms: Sequence[int], errors: Sequence[float], floor: float = 1e-13) -> float:
    """Least-squares slope of log(error) against m, ignoring values at the roundoff floor."""
    ms = np.asarray(ms, dtype=float)
    err = np.asarray(errors, dtype=float)
    keep = err > floor
    if keep.sum() < 2:
        raise ValueError("not enough points above the roundoff floor to fit a slope")
    return float(np.polyfit(ms[keep], np.log(err[keep]), 1)[0])
