"""Closed-form and semi-closed-form performance expressions.

Everything funnels through the Laplace transforms of the six aggregate
interference types (intra/cross mode, cell-center/cell-edge user, per link
direction).  BEP, outage, and rates are LT functionals; the eta = 4 case
collapses the hypergeometric forms into arctan expressions and gets a
dedicated fast path that the general-exponent path must agree with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import erfcx

from .pulse import UL, DL, DuplexConfig
from .specfun import IMPROPER, QuadratureSpec, hyp2f1_special, integrate, lower_gamma2, u_func

CCU = "ccu"
CEU = "ceu"

_ETA4_TOL = 1e-12


@dataclass(frozen=True)
class NetworkParams:
    """Deployment and radio parameters, SI units (m, W, Hz).

    Defaults are the reference operating point used throughout: one BS per
    km^2, -70 dBm power-control target, 5 W downlink power, 1 W terminal
    cap, eta = 4, -80 dB residual self-interference, -90 dBm noise, and
    BPSK error constants (omega1 = 0.5, omega2 = 1) in both directions.
    """

    lam: float = 1e-6
    rho: float = 1e-10
    p_d: float = 5.0
    p_u_max: float = 1.0
    eta: float = 4.0
    beta: float = 1e-8
    n_o: float = 1e-12
    omega1_u: float = 0.5
    omega2_u: float = 1.0
    omega1_d: float = 0.5
    omega2_d: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("BS intensity must be positive")
        if self.eta <= 2:
            raise ValueError("path-loss exponent must exceed 2")
        if self.rho <= 0 or self.p_d <= 0 or self.p_u_max <= 0:
            raise ValueError("powers must be positive")
        if self.beta < 0 or self.n_o < 0:
            raise ValueError("beta and N_o must be nonnegative")

    @property
    def r_boundary(self) -> float:
        """Distance beyond which channel inversion hits the power cap."""
        if math.isinf(self.p_u_max):
            return math.inf
        return (self.p_u_max / self.rho) ** (1.0 / self.eta)

    @property
    def is_eta4(self) -> bool:
        return abs(self.eta - 4.0) < _ETA4_TOL

    def omega(self, direction: str) -> tuple[float, float]:
        if direction == UL:
            return self.omega1_u, self.omega2_u
        return self.omega1_d, self.omega2_d


@dataclass(frozen=True)
class LinkContext:
    """Per-link evaluation context: direction, overlap, and filter leakage.

    eff_cross is |C(alpha)/I(alpha)|^2 for this decoder; eff_cross_hd is the
    same quantity at alpha = 0 (needed by the gain condition); duplex supplies
    bandwidths to the rate expressions.
    """

    direction: str
    alpha: float
    eff_cross: float
    eff_cross_hd: float = 0.0
    duplex: DuplexConfig | None = None
    user_class: str | None = None

    def __post_init__(self):
        if self.direction not in (UL, DL):
            raise ValueError("direction must be 'ul' or 'dl'")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.eff_cross < 0 or self.eff_cross_hd < 0:
            raise ValueError("effective cross factors are nonnegative")

    def bandwidth(self) -> float:
        if self.duplex is None:
            raise ValueError("rate expressions need a DuplexConfig on the LinkContext")
        return self.duplex.band(self.direction)


class LTKind(Enum):
    """The six aggregate-interference Laplace transforms.

    du_shared and dd_shared cover both user classes (the BS-side interference
    seen by a user does not depend on its own class); uu_ceu and dd_shared
    are conditioned on the service distance r_o.
    """

    UU_CCU = "uu_ccu"
    DU_SHARED = "du_shared"
    UU_CEU = "uu_ceu"
    DD_SHARED = "dd_shared"
    UD_CCU = "ud_ccu"
    UD_CEU = "ud_ceu"


_CONDITIONED = (LTKind.UU_CEU, LTKind.DD_SHARED)


# ---------------------------------------------------------------------------
# transmit-power distribution under channel-inversion control
# ---------------------------------------------------------------------------

def pu_point_mass(p: NetworkParams) -> float:
    """Probability that a terminal transmits at the cap (the CEU fraction)."""
    if math.isinf(p.p_u_max):
        return 0.0
    a = math.pi * p.lam * (p.p_u_max / p.rho) ** (2.0 / p.eta)
    return math.exp(-a)


def pu_density(x: float, p: NetworkParams) -> float:
    """Continuous part of the transmit-power pdf on (0, P_u_max).

    The distribution is mixed: this density plus the pu_point_mass atom at
    the cap integrate to one.
    """
    if not 0.0 < x < p.p_u_max:
        raise ValueError("continuous part lives on (0, p_u_max); the cap carries pu_point_mass")
    d = 2.0 / p.eta
    return (
        2.0 * math.pi * p.lam / (p.eta * p.rho**d)
        * x ** (d - 1.0)
        * math.exp(-math.pi * p.lam * (x / p.rho) ** d)
    )


@lru_cache(maxsize=128)
def _pu_nodes(p: NetworkParams) -> tuple[np.ndarray, np.ndarray, float]:
    """Fixed 64-node rule for expectations against the mixed power pdf.

    Substituting u = pi*lam*(x/rho)^(2/eta) turns the continuous part into
    an exp(-u) du integral on [0, a], handled by Gauss-Legendre (bounded cap)
    or Gauss-Laguerre (unbounded).  Returns (x nodes, weights, atom weight).
    """
    if math.isinf(p.p_u_max):
        u, w = np.polynomial.laguerre.laggauss(64)
        xs = p.rho * (u / (math.pi * p.lam)) ** (p.eta / 2.0)
        return xs, w, 0.0
    a = math.pi * p.lam * (p.p_u_max / p.rho) ** (2.0 / p.eta)
    t, wt = np.polynomial.legendre.leggauss(64)
    u = 0.5 * a * (t + 1.0)
    w = 0.5 * a * wt * np.exp(-u)
    xs = p.rho * (u / (math.pi * p.lam)) ** (p.eta / 2.0)
    return xs, w, math.exp(-a)


def _expect_pu(fn, p: NetworkParams) -> float:
    """E[fn(P_u)] over the mixed transmit-power distribution."""
    xs, w, atom = _pu_nodes(p)
    total = float(np.dot(w, fn(xs)))
    if atom > 0.0:
        total += atom * float(np.asarray(fn(np.array([p.p_u_max])))[0])
    return total


def pu_frac_moment(p: NetworkParams) -> float:
    """E[P_u^(2/eta)], the fractional moment entering the CCU-side LTs."""
    d = 2.0 / p.eta
    if math.isinf(p.p_u_max):
        return p.rho**d / (math.pi * p.lam)
    a = math.pi * p.lam * (p.p_u_max / p.rho) ** d
    return p.rho**d * lower_gamma2(a) / (math.pi * p.lam) + p.p_u_max**d * math.exp(-a)


def class_probabilities(p: NetworkParams) -> tuple[float, float]:
    """(P{CCU}, P{CEU}) from the boundary distance r_boundary."""
    ceu = pu_point_mass(p)
    return 1.0 - ceu, ceu


def service_distance_pdf(user_class: str, r: float, p: NetworkParams) -> float:
    """Truncated-Rayleigh service-distance density for one user class."""
    rm = p.r_boundary
    pl = math.pi * p.lam
    if user_class == CCU:
        if not 0.0 <= r <= rm:
            raise ValueError("CCU service distance lives on [0, r_boundary]")
        return 2.0 * pl * r * math.exp(-pl * r * r) / (1.0 - math.exp(-pl * rm * rm))
    if user_class == CEU:
        if not r > rm:
            raise ValueError("CEU service distance lives on (r_boundary, inf)")
        return 2.0 * pl * r * math.exp(-pl * (r * r - rm * rm))
    raise ValueError(f"unknown user class {user_class!r}")


# ---------------------------------------------------------------------------
# Laplace transforms of the aggregate interference
# ---------------------------------------------------------------------------

def lt_interference(kind: LTKind, s: float, p: NetworkParams, r_o: float | None = None) -> float:
    """LT of one aggregate-interference type, evaluated at s >= 0.

    Dispatches to the arctan closed forms when eta = 4 and to the
    hypergeometric expressions otherwise; the two agree to better than 1e-6
    relative wherever both apply.  r_o is required for the conditioned kinds.
    """
    if s < 0:
        raise ValueError("LT argument must be nonnegative")
    if kind in _CONDITIONED:
        if r_o is None or r_o <= 0:
            raise ValueError(f"{kind.value} is conditioned on a positive service distance r_o")
    if s == 0.0:
        return 1.0
    if p.is_eta4:
        return _lt_eta4(kind, s, p, r_o)
    return _lt_general(kind, s, p, r_o)


def _lt_eta4(kind: LTKind, s: float, p: NetworkParams, r_o: float | None) -> float:
    pl = math.pi * p.lam
    if kind in (LTKind.UU_CCU, LTKind.UD_CCU):
        m = _expect_pu(np.sqrt, p)
        return math.exp(-pl * math.sqrt(s) * m * math.atan(math.sqrt(s * p.rho)))
    if kind is LTKind.DU_SHARED:
        return math.exp(-(math.pi**2 / 2.0) * p.lam * math.sqrt(s * p.p_d))
    if kind is LTKind.UD_CEU:
        m = _expect_pu(np.sqrt, p)
        return math.exp(-(math.pi**2 / 2.0) * p.lam * math.sqrt(s) * m)
    if kind is LTKind.DD_SHARED:
        q = math.sqrt(s * p.p_d)
        return math.exp(-pl * q * math.atan(q / r_o**2))
    # UU_CEU: the expectation sits inside the exponent
    ex = _expect_pu(lambda x: np.sqrt(s * x) * np.arctan(np.sqrt(s * x) / r_o**2), p)
    return math.exp(-pl * ex)


def _lt_general(kind: LTKind, s: float, p: NetworkParams, r_o: float | None) -> float:
    eta = p.eta
    d = 2.0 / eta
    lead = 2.0 * math.pi * p.lam / (eta - 2.0)
    if kind in (LTKind.UU_CCU, LTKind.UD_CCU):
        moment = pu_frac_moment(p)
        expo = lead * s * p.rho ** (1.0 - d) * moment * hyp2f1_special(eta, s * p.rho)
        return math.exp(-expo)
    if kind is LTKind.DU_SHARED:
        expo = d * math.pi**2 * p.lam * (s * p.p_d) ** d / math.sin(2.0 * math.pi / eta)
        return math.exp(-expo)
    if kind is LTKind.UD_CEU:
        moment = pu_frac_moment(p)
        expo = d * math.pi**2 * p.lam / math.sin(2.0 * math.pi / eta) * s**d * moment
        return math.exp(-expo)
    if kind is LTKind.DD_SHARED:
        expo = (
            lead * r_o ** (2.0 - eta) * s * p.p_d
            * hyp2f1_special(eta, s * p.p_d * r_o ** (-eta))
        )
        return math.exp(-expo)
    # UU_CEU
    ro_pow = r_o ** (2.0 - eta)

    def inner(x):
        x = np.atleast_1d(x)
        vals = np.array([xv * hyp2f1_special(eta, s * xv * r_o ** (-eta)) for xv in x])
        return vals

    expo = lead * s * ro_pow * _expect_pu(inner, p)
    return math.exp(-expo)


def lt_uu_ceu_jensen(s: float, p: NetworkParams, r_o: float) -> float:
    """Jensen upper bound on the cell-edge intra-mode LT (eta = 4 form).

    y * arctan(a y) is convex in y, so the exact LT never exceeds this bound.
    """
    if not p.is_eta4:
        raise ValueError("the Jensen bound is stated for eta = 4")
    if s < 0 or r_o <= 0:
        raise ValueError("require s >= 0 and r_o > 0")
    if s == 0.0:
        return 1.0
    m = _expect_pu(np.sqrt, p)
    return math.exp(
        -math.pi * p.lam * math.sqrt(s) * m * math.atan(m * math.sqrt(s / r_o**4))
    )


# ---------------------------------------------------------------------------
# error probability, outage, rates
# ---------------------------------------------------------------------------

def _r_upper(p: NetworkParams) -> float:
    # f_re's exp(-pi lam (r^2 - rm^2)) envelope is below 1e-12 of its peak here
    rm = p.r_boundary
    return math.sqrt(rm * rm + 28.0 / (math.pi * p.lam))


def _check_direction(direction: str, ctx: LinkContext):
    if direction not in (UL, DL):
        raise ValueError("direction must be 'ul' or 'dl'")
    if ctx.direction != direction:
        raise ValueError(f"context is for {ctx.direction!r}, not {direction!r}")


def bep(
    direction: str,
    ctx: LinkContext,
    p: NetworkParams,
    spec: QuadratureSpec = IMPROPER,
    ceu_si_eff_cross: float | None = None,
) -> float:
    """Average bit error probability omega1 * E[erfc(sqrt(omega2 SINR))].

    Class-mixture of the CCU and CEU terms; the erfc expectation over
    exponential fading becomes an integral against the interference LTs.
    ceu_si_eff_cross overrides the cross factor in the uplink cell-edge
    self-interference exponent (default: this decoder's own factor, so the
    echo passes the same filter as every other cross-mode signal).
    """
    _check_direction(direction, ctx)
    ec = ctx.eff_cross
    w1, w2 = p.omega(direction)
    p_ccu, p_ceu = class_probabilities(p)
    rm = p.r_boundary
    r_hi = _r_upper(p)
    ec_si_ceu = ec if ceu_si_eff_cross is None else ceu_si_eff_cross

    if direction == UL:
        b_ccu = (p.beta * p.p_d * ec + p.n_o) / (w2 * p.rho)

        def inner_ccu(y):
            z = y * y
            s = z / (p.rho * w2)
            return (
                lt_interference(LTKind.UU_CCU, s, p)
                * lt_interference(LTKind.DU_SHARED, s * ec, p)
                * math.exp(-z * (1.0 + b_ccu))
            )

        hi_ccu = 9.0 / math.sqrt(1.0 + b_ccu)
        ccu = (2.0 / math.sqrt(math.pi)) * integrate(inner_ccu, 0.0, hi_ccu, spec)

        def inner_ceu(r):
            b = (p.beta * p.p_d * ec_si_ceu + p.n_o) * r**p.eta / (w2 * p.p_u_max)

            def g(y):
                z = y * y
                s = z * r**p.eta / (p.p_u_max * w2)
                return (
                    lt_interference(LTKind.UU_CEU, s, p, r)
                    * lt_interference(LTKind.DU_SHARED, s * ec, p)
                    * math.exp(-z * (1.0 + b))
                )

            hi = min(9.0, 9.0 / math.sqrt(1.0 + b))
            return service_distance_pdf(CEU, r, p) * (2.0 / math.sqrt(math.pi)) * integrate(g, 0.0, hi, spec)

        ceu = 0.0 if p_ceu == 0.0 else integrate(inner_ceu, rm, r_hi, spec)
        return w1 * (1.0 - p_ccu * ccu - p_ceu * ceu)

    # DL: both classes carry an r integral; the CCU self-interference scales
    # with its own inverted power rho r^eta, hence the r^(2 eta) exponent.
    def inner_cls(r, user_class):
        s_unit = r**p.eta / (p.p_d * w2)
        if user_class == CCU:
            b = (p.beta * p.rho * ec * r ** (2.0 * p.eta) + p.n_o * r**p.eta) / (w2 * p.p_d)
            ud = LTKind.UD_CCU
        else:
            b = (p.beta * p.p_u_max * ec * r**p.eta + p.n_o * r**p.eta) / (w2 * p.p_d)
            ud = LTKind.UD_CEU

        def g(y):
            z = y * y
            s = z * s_unit
            return (
                lt_interference(LTKind.DD_SHARED, s, p, r)
                * lt_interference(ud, s * ec, p)
                * math.exp(-z * (1.0 + b))
            )

        hi = min(9.0, 9.0 / math.sqrt(1.0 + b))
        return service_distance_pdf(user_class, r, p) * (2.0 / math.sqrt(math.pi)) * integrate(g, 0.0, hi, spec)

    ccu = integrate(lambda r: inner_cls(r, CCU), 0.0, rm, spec) if p_ccu > 0.0 else 0.0
    ceu = integrate(lambda r: inner_cls(r, CEU), rm, r_hi, spec) if p_ceu > 0.0 else 0.0
    return w1 * (1.0 - p_ccu * ccu - p_ceu * ceu)


def outage(
    direction: str,
    theta: float,
    ctx: LinkContext,
    p: NetworkParams,
    spec: QuadratureSpec = IMPROPER,
) -> float:
    """P{SINR < theta}, class-mixture over CCU and CEU terms."""
    _check_direction(direction, ctx)
    if theta <= 0:
        raise ValueError("theta must be positive")
    ec = ctx.eff_cross
    p_ccu, p_ceu = class_probabilities(p)
    rm = p.r_boundary
    r_hi = _r_upper(p)

    if direction == UL:
        s = theta / p.rho
        ccu = (
            lt_interference(LTKind.UU_CCU, s, p)
            * lt_interference(LTKind.DU_SHARED, s * ec, p)
            * math.exp(-theta * (p.beta * p.p_d * ec + p.n_o) / p.rho)
        )

        def inner(r):
            sr = theta * r**p.eta / p.p_u_max
            return (
                service_distance_pdf(CEU, r, p)
                * lt_interference(LTKind.UU_CEU, sr, p, r)
                * lt_interference(LTKind.DU_SHARED, sr * ec, p)
                * math.exp(-theta * (p.beta * p.p_d * ec + p.n_o) * r**p.eta / p.p_u_max)
            )

        ceu = 0.0 if p_ceu == 0.0 else integrate(inner, rm, r_hi, spec)
        return 1.0 - p_ccu * ccu - p_ceu * ceu

    def inner_cls(r, user_class):
        sr = theta * r**p.eta / p.p_d
        if user_class == CCU:
            si = p.beta * p.rho * ec * r ** (2.0 * p.eta) / p.p_d
            ud = LTKind.UD_CCU
        else:
            si = p.beta * p.p_u_max * ec * r**p.eta / p.p_d
            ud = LTKind.UD_CEU
        return (
            service_distance_pdf(user_class, r, p)
            * lt_interference(LTKind.DD_SHARED, sr, p, r)
            * lt_interference(ud, sr * ec, p)
            * math.exp(-theta * si - theta * p.n_o * r**p.eta / p.p_d)
        )

    ccu = integrate(lambda r: inner_cls(r, CCU), 0.0, rm, spec) if p_ccu > 0.0 else 0.0
    ceu = integrate(lambda r: inner_cls(r, CEU), rm, r_hi, spec) if p_ceu > 0.0 else 0.0
    return 1.0 - p_ccu * ccu - p_ceu * ceu


def _dl_special_success_closed(theta: float, kappa: float, lam: float) -> float:
    # closed-form counterpart of the interference-limited DL success integral,
    # exact Gaussian-integral identity once U(k r^4) is linearized to k r^4
    u1 = 1.0 + u_func(theta)
    if kappa == 0.0:
        return 1.0 / u1
    x = math.pi * lam * u1 / (2.0 * math.sqrt(kappa))
    return math.pi**1.5 * lam * erfcx(x) / (2.0 * math.sqrt(kappa))


def outage_special(
    direction: str,
    theta: float,
    ctx: LinkContext,
    p: NetworkParams,
    method: str = "integral",
) -> float:
    """Interference-limited outage, eta = 4, uncapped terminal power.

    UL reduces to a single exponential; DL to a one-dimensional integral, or
    (with perfect SIC) to the erfc closed-form approximation when
    method='closed'.  Noise and the power cap are ignored by construction.
    """
    _check_direction(direction, ctx)
    if not p.is_eta4:
        raise ValueError("the special-case expressions hold for eta = 4")
    if theta <= 0:
        raise ValueError("theta must be positive")
    ec = ctx.eff_cross
    lam = p.lam

    if direction == UL:
        expo = (
            u_func(theta)
            + (math.pi**2 / 2.0) * lam * math.sqrt(theta * p.p_d / p.rho) * math.sqrt(ec)
            + theta * p.beta * p.p_d * ec / p.rho
        )
        return 1.0 - math.exp(-expo)

    kappa = p.rho * theta * ec / p.p_d
    if method == "closed":
        if p.beta != 0.0:
            raise ValueError("the closed-form DL approximation assumes perfect SIC (beta = 0)")
        return 1.0 - _dl_special_success_closed(theta, kappa, lam)
    if method != "integral":
        raise ValueError("method must be 'integral' or 'closed'")
    pl = math.pi * lam
    scale = pl * (1.0 + u_func(theta))

    def f(r):
        r2 = r * r
        return (
            2.0 * pl * r
            * math.exp(
                -scale * r2
                - u_func(kappa * r2 * r2)
                - theta * p.beta * p.rho * ec * r2**4 / p.p_d
            )
        )

    r_hi = math.sqrt(30.0 / scale)
    return 1.0 - integrate(f, 0.0, r_hi, IMPROPER)


def _special_preconditions(p: NetworkParams) -> bool:
    return p.is_eta4 and p.n_o == 0.0 and math.isinf(p.p_u_max)


def rate(
    direction: str,
    kind: str,
    ctx: LinkContext,
    p: NetworkParams,
    theta: float | None = None,
    spec: QuadratureSpec = IMPROPER,
) -> float:
    """Ergodic or effective (fixed-threshold) rate in bits/s.

    Ergodic integrates the success probability over the threshold axis after
    the substitution g = 2^(t/BW) - 1; effective is BW log2(1+theta) times
    the success probability.  When the interference-limited eta = 4 uncapped
    preconditions hold, the reduced expressions are used.
    """
    _check_direction(direction, ctx)
    bw = ctx.bandwidth()
    special = _special_preconditions(p)

    if kind == "effective":
        if theta is None or theta <= 0:
            raise ValueError("effective rate needs a positive theta")
        if special:
            o = outage_special(direction, theta, ctx, p)
        else:
            o = outage(direction, theta, ctx, p, spec)
        return bw * math.log2(1.0 + theta) * (1.0 - o)

    if kind != "ergodic":
        raise ValueError("rate kind must be 'ergodic' or 'effective'")

    if special and direction == UL:
        ec = ctx.eff_cross
        c = (math.pi**2 / 2.0) * p.lam * math.sqrt(p.p_d * ec / p.rho)

        def f(g):
            return (
                math.exp(-u_func(g) - c * math.sqrt(g) - g * p.beta * p.p_d * ec / p.rho)
                / (math.log(2.0) * (1.0 + g))
            )

        return bw * integrate(f, 0.0, math.inf, spec)

    if special and direction == DL:
        def f(g):
            return (1.0 - outage_special(DL, g, ctx, p)) / (math.log(2.0) * (1.0 + g))

        return bw * integrate(f, 1e-12, math.inf, spec)

    def f(g):
        return (1.0 - outage(direction, g, ctx, p, spec)) / (math.log(2.0) * (1.0 + g))

    return bw * integrate(f, 1e-12, math.inf, spec)


class GainCondition(NamedTuple):
    lhs: float
    rhs: float
    satisfied: bool


def ul_gain_condition(alpha: float, theta: float, ctx: LinkContext, p: NetworkParams) -> GainCondition:
    """Condition for an uplink effective-rate gain over half-duplex.

    Compares sqrt(rho/P_d) against
    pi^2 lam theta / (2 ln(1+alpha)) * (|C(alpha)| - |C(0)|); at theta = 1,
    alpha = 1 with rectangular pulses the right side is 7.1194 * lam.
    """
    _check_direction(UL, ctx)
    if not p.is_eta4:
        raise ValueError("the gain condition is stated for eta = 4")
    if alpha <= 0.0:
        raise ValueError("alpha = 0 is the degenerate half-duplex case (ln 1 = 0)")
    if theta <= 0:
        raise ValueError("theta must be positive")
    lhs = math.sqrt(p.rho / p.p_d)
    delta = math.sqrt(ctx.eff_cross) - math.sqrt(ctx.eff_cross_hd)
    rhs = math.pi**2 * p.lam * theta / (2.0 * math.log1p(alpha)) * delta
    return GainCondition(lhs=lhs, rhs=rhs, satisfied=lhs > rhs)


def dl_gain(alpha: float, theta: float, ctx: LinkContext, p: NetworkParams) -> float:
    """Downlink effective-rate gain over half-duplex, closed-form path.

    Ratio of the erfc closed-form effective rate at alpha to the exact
    half-duplex (leakage-free) baseline BW_d log2(1+theta)/(1+U(theta)).
    """
    _check_direction(DL, ctx)
    if not p.is_eta4:
        raise ValueError("the gain expression is stated for eta = 4")
    if theta <= 0:
        raise ValueError("theta must be positive")
    kappa = p.rho * theta * ctx.eff_cross / p.p_d
    succ = _dl_special_success_closed(theta, kappa, p.lam)
    bw_ratio = (1.0 + alpha) if ctx.duplex is None else ctx.duplex.band(DL) / ctx.duplex.b_d
    return bw_ratio * succ * (1.0 + u_func(theta))
