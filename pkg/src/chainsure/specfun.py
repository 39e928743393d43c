"""Special functions and quadrature primitives.

Everything downstream integrates through this module: the regularized
incomplete Beta function that drives the attack-probability curve, a
fixed-grid midpoint rule (the production integrator), and an adaptive
Simpson rule kept solely as an independent verification oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable


class Scheme(enum.Enum):
    RECTANGULAR_MIDPOINT = "rectangular_midpoint"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate an integral: fixed midpoint grid or adaptive Simpson."""

    scheme: Scheme
    intervals: int = 100
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.scheme is Scheme.RECTANGULAR_MIDPOINT and self.intervals < 1:
            raise ValueError(f"intervals must be >= 1, got {self.intervals}")
        if self.scheme is Scheme.ADAPTIVE and not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")

    @classmethod
    def midpoint(cls, intervals: int = 100) -> "QuadratureSpec":
        return cls(Scheme.RECTANGULAR_MIDPOINT, intervals=intervals)

    @classmethod
    def adaptive(cls, tolerance: float = 1e-10) -> "QuadratureSpec":
        return cls(Scheme.ADAPTIVE, tolerance=tolerance)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


_CF_EPS = 1e-15
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


def _beta_contfrac(u: float, v: float, w: float) -> float:
    """Continued fraction for the incomplete Beta function (modified Lentz).

    Evaluates the standard even/odd continued fraction; callers must ensure
    w < (u + 1) / (u + v + 2) so the expansion converges quickly.
    """
    qab = u + v
    qap = u + 1.0
    qam = u - 1.0
    c = 1.0
    d = 1.0 - qab * w / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (v - m) * w / ((qam + m2) * (u + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(u + m) * (qab + m) * w / ((u + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete Beta continued fraction failed to converge for u={u}, v={v}, w={w}"
    )


def reg_inc_beta(w: float, u: float, v: float) -> float:
    """Regularized incomplete Beta function I_w(u, v).

    Continued-fraction evaluation with the symmetry switch at
    w = (u + 1) / (u + v + 2), exact at the endpoints w = 0 and w = 1.
    """
    if not (u > 0 and v > 0):
        raise ValueError(f"reg_inc_beta requires u, v > 0, got u={u}, v={v}")
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"reg_inc_beta requires 0 <= w <= 1, got {w}")
    if w == 0.0:
        return 0.0
    if w == 1.0:
        return 1.0
    ln_front = (
        log_gamma(u + v)
        - log_gamma(u)
        - log_gamma(v)
        + u * math.log(w)
        + v * math.log1p(-w)
    )
    front = math.exp(ln_front)
    if w < (u + 1.0) / (u + v + 2.0):
        return front * _beta_contfrac(u, v, w) / u
    return 1.0 - front * _beta_contfrac(v, u, 1.0 - w) / v


def _midpoint(f: Callable[[float], float], lo: float, hi: float, intervals: int) -> float:
    width = (hi - lo) / intervals
    return math.fsum(f(lo + (k + 0.5) * width) for k in range(intervals)) * width


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 3.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tolerance: float,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson with Richardson extrapolation, recursion depth cap 50."""

    def recurse(a, b, fa, fb, fm, whole, tol, depth):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        h = 0.5 * (b - a)
        left = _simpson(fa, flm, fm, 0.5 * h)
        right = _simpson(fm, frm, fb, 0.5 * h)
        refined = left + right
        err = (refined - whole) / 15.0
        if depth >= max_depth or abs(err) <= tol:
            return refined + err
        return recurse(a, m, fa, fm, flm, left, 0.5 * tol, depth + 1) + recurse(
            m, b, fm, fb, frm, right, 0.5 * tol, depth + 1
        )

    if lo == hi:
        return 0.0
    fa, fb = f(lo), f(hi)
    mid = 0.5 * (lo + hi)
    fm = f(mid)
    whole = _simpson(fa, fm, fb, 0.5 * (hi - lo))
    return recurse(lo, hi, fa, fb, fm, whole, tolerance, 0)


def integrate(
    f: Callable[[float], float], lo: float, hi: float, spec: QuadratureSpec
) -> float:
    """Integrate f over [lo, hi] with the requested scheme."""
    if lo > hi:
        raise ValueError(f"integration bounds out of order: lo={lo} > hi={hi}")
    if lo == hi:
        return 0.0
    if spec.scheme is Scheme.RECTANGULAR_MIDPOINT:
        return _midpoint(f, lo, hi, spec.intervals)
    return _adaptive_simpson(f, lo, hi, spec.tolerance)
