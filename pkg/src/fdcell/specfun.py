"""Numerical kernels: the special functions and quadrature used everywhere else.

Only one hypergeometric family is needed, 2F1(1, 1-2/eta, 2-2/eta, -x) with
eta > 2 and x >= 0, so the evaluator is specialised to it instead of pulling
in a general-parameter routine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sps
from scipy.integrate import quad


class QuadratureError(RuntimeError):
    """Adaptive integration failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Numeric contract for the improper integrals.

    relative_tolerance / absolute_tolerance bound the accepted error estimate;
    max_subdivisions caps the adaptive interval count; semi_infinite_transform
    selects the x = t/(1-t) compactification for rays (all integrands we feed
    it decay exponentially, which the transform preserves).
    """

    relative_tolerance: float = 1e-8
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 200
    semi_infinite_transform: bool = True

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise ValueError("relative_tolerance must be > 0")
        if self.absolute_tolerance < 0:
            raise ValueError("absolute_tolerance must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


#: Looser default for the improper performance integrals; Monte Carlo
#: comparison noise dominates beyond this.
IMPROPER = QuadratureSpec(relative_tolerance=1e-6, absolute_tolerance=1e-12)


def integrate(f, lo: float, hi: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Integrate f over [lo, hi]; hi = inf selects the semi-infinite path.

    Raises QuadratureError instead of returning a silently inaccurate value.
    """
    if math.isinf(hi):
        if spec.semi_infinite_transform:
            # x = lo + t/(1-t), dx = dt/(1-t)^2 maps [lo, inf) onto [0, 1)
            g = lambda t: f(lo + t / (1.0 - t)) / (1.0 - t) ** 2
            return _quad_checked(g, 0.0, 1.0, spec)
        return _quad_checked(f, lo, np.inf, spec)
    return _quad_checked(f, lo, hi, spec)


def _quad_checked(f, lo, hi, spec: QuadratureSpec) -> float:
    out = quad(
        f,
        lo,
        hi,
        epsabs=spec.absolute_tolerance,
        epsrel=spec.relative_tolerance,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError(f"integration did not converge: {out[3]}")
    if abserr > spec.absolute_tolerance + spec.relative_tolerance * abs(value) and abserr > 1e-10:
        raise QuadratureError(
            f"error estimate {abserr:.3e} exceeds tolerance for value {value:.6e}"
        )
    return value


def lower_gamma2(x: float) -> float:
    """Lower incomplete gamma of order 2: gamma(2, x) = 1 - e^(-x)(1 + x)."""
    if x < 0:
        raise ValueError("lower_gamma2 requires x >= 0")
    if x < 1e-3:
        # series x^2/2 - x^3/3 + x^4/8 avoids cancellation near zero
        return x * x * (0.5 - x / 3.0 + x * x / 8.0)
    return 1.0 - math.exp(-x) * (1.0 + x)


def u_func(x: float) -> float:
    """sqrt(x) * arctan(sqrt(x)); ~x near 0, ~(pi/2) sqrt(x) at infinity."""
    if x < 0:
        raise ValueError("u_func requires x >= 0")
    s = math.sqrt(x)
    return s * math.atan(s)


def erfc(x):
    """Complementary error function (Cephes via scipy; <1e-12 rel on |x|<=10)."""
    return sps.erfc(x)


def _series_direct(b: float, c: float, x: float) -> float:
    # 2F1(1, b, c, -x) by its power series, |x| < 1
    term = 1.0
    total = 1.0
    for n in range(500):
        term *= (b + n) / (c + n) * (-x)
        total += term
        if abs(term) < 1e-16 * abs(total):
            return total
    raise QuadratureError("2F1 direct series did not converge")


def _series_pfaff(c: float, w: float) -> float:
    # 2F1(1, 1, c, w) appearing after the Pfaff map z -> z/(z-1); w in [0, 1)
    term = 1.0
    total = 1.0
    for n in range(100000):
        term *= (1.0 + n) / (c + n) * w
        total += term
        if term < 1e-16 * total:
            return total
    raise QuadratureError("2F1 Pfaff series did not converge")


def hyp2f1_special(eta: float, x: float) -> float:
    """Gauss hypergeometric 2F1(1, 1-2/eta, 2-2/eta, -x) for eta > 2, x >= 0.

    Strategy: direct power series for small x, Pfaff transformation
    -x -> x/(1+x) for moderate x, and the 1/z connection formula once the
    transformed series would crawl.  Value decreases from 1 toward 0.
    """
    if eta <= 2:
        raise ValueError("path-loss exponent must exceed 2")
    if x < 0:
        raise ValueError("hyp2f1_special requires x >= 0")
    if x == 0:
        return 1.0
    d = 2.0 / eta
    b = 1.0 - d
    c = 2.0 - d
    if x < 0.9:
        return _series_direct(b, c, x)
    if x <= 40.0:
        # Pfaff: 2F1(1, b, c, -x) = 2F1(1, c-b, c, x/(1+x)) / (1+x); c-b = 1
        return _series_pfaff(c, x / (1.0 + x)) / (1.0 + x)
    # Connection formula at large argument.  With a=1, 1-c+b = 0 the second
    # series terminates, leaving
    #   F = G(c)G(d) x^(d-1) + G(c)G(-d)/G(b)^2 * 2F1(1, d, 1+d, -1/x) / x
    g = math.gamma
    lead = g(c) * g(d) * x ** (d - 1.0)
    corr = g(c) * g(-d) / g(b) ** 2 * _series_direct(d, 1.0 + d, 1.0 / x) / x
    return lead + corr
