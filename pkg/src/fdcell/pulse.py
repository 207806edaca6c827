"""Frequency-domain pulse templates and the overlap factors they induce.

Each transmit system builds its pulse with null-to-null width equal to its
allocated band B + alpha*min(B_u, B_d), so the pulse is redesigned as the
overlap grows and always fills the extended band.  The receive filter is the
matched template truncated to the same band; what survives of the own-system
pulse is the intra-mode amplitude factor I, and what leaks across from the
frequency-shifted opposite-system pulse is the cross-mode amplitude factor C.
Downstream SINR math only ever sees the normalized power ratio |C/I|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .specfun import QuadratureSpec, integrate

UL = "ul"
DL = "dl"

RECT = "rect"
RRC = "rrc"
SINC = "sinc"
SINCSQ = "sincsq"

_KINDS = (RECT, RRC, SINC, SINCSQ)


class NoRootError(RuntimeError):
    """Cross-mode amplitude has no zero inside the requested bracket."""


@dataclass(frozen=True)
class PulseShape:
    """One of the four frequency-domain templates, unit energy by construction.

    kind: 'rect' | 'rrc' | 'sinc' | 'sincsq'; rolloff only applies to 'rrc'.
    """

    kind: str
    rolloff: float = 0.22

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == RRC and not 0.0 < self.rolloff <= 1.0:
            raise ValueError("RRC rolloff must lie in (0, 1]")

    def spectrum(self, f, width: float):
        """Amplitude spectrum S(f; W) with null-to-null width `width` (Hz)."""
        return spectrum_value(self, width, f)


def spectrum_value(shape: PulseShape, width: float, f):
    """Evaluate the unit-energy spectrum of `shape` built at `width` at f (Hz).

    Rect is flat over |f| <= W/2; Sinc and Sinc^2 put their first spectral
    null at W/2; RRC occupies exactly [-W/2, W/2] with the configured rolloff.
    """
    if width <= 0:
        raise ValueError("pulse width must be positive")
    f = np.asarray(f, dtype=float)
    w = width
    if shape.kind == RECT:
        out = np.where(np.abs(f) <= w / 2, 1.0 / math.sqrt(w), 0.0)
    elif shape.kind == SINC:
        out = math.sqrt(2.0 / w) * np.sinc(2.0 * f / w)
    elif shape.kind == SINCSQ:
        out = math.sqrt(3.0 / w) * np.sinc(2.0 * f / w) ** 2
    else:
        out = _rrc_spectrum(f, w, shape.rolloff)
    return out if out.ndim else float(out)


def _rrc_spectrum(f, w, roll):
    # Root of the raised-cosine power spectrum with total width (1+roll)/T = w.
    # The RC spectrum integrates to one, so its square root has unit energy.
    T = (1.0 + roll) / w
    af = np.abs(f)
    f1 = (1.0 - roll) / (2.0 * T)
    f2 = (1.0 + roll) / (2.0 * T)
    arg = math.pi * T / roll * np.clip(af - f1, 0.0, f2 - f1)
    rc = np.where(af <= f2, np.where(af <= f1, T, T / 2.0 * (1.0 + np.cos(arg))), 0.0)
    return np.sqrt(rc)


@dataclass(frozen=True)
class DuplexConfig:
    """Bandwidth allocation: B_u, B_d in Hz and the overlap parameter alpha."""

    b_u: float
    b_d: float
    alpha: float

    def __post_init__(self):
        if self.b_u <= 0 or self.b_d <= 0:
            raise ValueError("bandwidths must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    @property
    def b_min(self) -> float:
        return min(self.b_u, self.b_d)

    @property
    def delta_f(self) -> float:
        """Carrier separation (B_u + B_d)/2 - alpha * min(B_u, B_d)."""
        return (self.b_u + self.b_d) / 2.0 - self.alpha * self.b_min

    def band(self, direction: str) -> float:
        """Extended channel bandwidth B + alpha * min(B_u, B_d)."""
        base = self.b_u if direction == UL else self.b_d
        return base + self.alpha * self.b_min

    def with_alpha(self, alpha: float) -> "DuplexConfig":
        return DuplexConfig(self.b_u, self.b_d, alpha)


@dataclass(frozen=True)
class CrossFactors:
    """Amplitude factors from pulse-shaping plus matched/low-pass filtering.

    i_u, i_d are the intra-mode factors (own pulse through own filter);
    c_u, c_d the cross-mode factors (opposite pulse, shifted by the carrier
    separation, through the same filter).  All four templates are real and
    even so C is real; only squared magnitudes matter downstream.
    """

    i_u: float
    i_d: float
    c_u: float
    c_d: float

    def __post_init__(self):
        if not (0.0 < self.i_u <= 1.0 + 1e-9 and 0.0 < self.i_d <= 1.0 + 1e-9):
            raise ValueError("intra-mode factors must lie in (0, 1]")

    @property
    def eff_cross_u(self) -> float:
        """|C_u / I_u|^2, the UL-decoder cross-mode power leak."""
        return (self.c_u / self.i_u) ** 2

    @property
    def eff_cross_d(self) -> float:
        """|C_d / I_d|^2, the DL-decoder cross-mode power leak."""
        return (self.c_d / self.i_d) ** 2

    def eff_cross(self, direction: str) -> float:
        return self.eff_cross_u if direction == UL else self.eff_cross_d


_OVERLAP_SPEC = QuadratureSpec(relative_tolerance=1e-10, absolute_tolerance=1e-12, max_subdivisions=400)


def overlap_factors(
    s_u: PulseShape,
    s_d: PulseShape,
    cfg: DuplexConfig,
    spec: QuadratureSpec = _OVERLAP_SPEC,
) -> CrossFactors:
    """Intra- and cross-mode amplitude factors for one pulse pair at one alpha.

    I_x integrates |S_x|^2 over the x filter band; C_x integrates the
    shifted opposite pulse against S_x over the opposite system's extended
    band limits.
    """
    w_u = cfg.band(UL)
    w_d = cfg.band(DL)
    df = cfg.delta_f

    i_u = integrate(lambda f: s_u.spectrum(f, w_u) ** 2, -w_u / 2, w_u / 2, spec)
    i_d = integrate(lambda f: s_d.spectrum(f, w_d) ** 2, -w_d / 2, w_d / 2, spec)
    # The DL pulse sits df above the UL carrier, so in UL baseband it appears
    # at S_d(f - df); the DL receiver sees the UL pulse at S_u(f + df).
    c_u = integrate(lambda f: s_d.spectrum(f - df, w_d) * s_u.spectrum(f, w_u), -w_d / 2, w_d / 2, spec)
    c_d = integrate(lambda f: s_u.spectrum(f + df, w_u) * s_d.spectrum(f, w_d), -w_u / 2, w_u / 2, spec)
    return CrossFactors(i_u=i_u, i_d=i_d, c_u=c_u, c_d=c_d)


def noise_power(direction: str, cfg: DuplexConfig, n_o: float, factors: CrossFactors) -> float:
    """Pre-normalization decoder noise power N_o |I(alpha)|^2.

    After dividing the whole decision statistic by |I|^2 the noise term used
    by the SINR expressions is N_o itself; this exposes the raw value.
    """
    i = factors.i_u if direction == UL else factors.i_d
    return n_o * i * i


def find_orthogonal_alpha(
    s_u: PulseShape,
    s_d: PulseShape,
    cfg: DuplexConfig,
    bracket: tuple[float, float] = (0.05, 0.95),
    tol: float = 1e-6,
) -> float:
    """Overlap value where the UL-decoder cross-mode amplitude C_u vanishes.

    Runs Brent's method on C_u(alpha) over the bracket.  Raises NoRootError
    when C_u keeps one sign and never drops below tol * I_u, e.g. for
    rectangular pulses whose overlap is strictly positive for alpha > 0.
    """
    lo, hi = bracket
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError("bracket must satisfy 0 <= lo < hi <= 1")

    def c_u(alpha: float) -> float:
        return overlap_factors(s_u, s_d, cfg.with_alpha(alpha)).c_u

    f_lo, f_hi = c_u(lo), c_u(hi)
    i_u = overlap_factors(s_u, s_d, cfg.with_alpha(lo)).i_u
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        # No sign change: accept an interior zero-touching minimum if the
        # amplitude genuinely dips below the noise floor, else report no root.
        grid = np.linspace(lo, hi, 41)
        vals = np.array([abs(c_u(a)) for a in grid])
        k = int(np.argmin(vals))
        if vals[k] < tol * i_u:
            return float(grid[k])
        raise NoRootError(
            f"cross-mode amplitude keeps sign {math.copysign(1, f_lo):+.0f} on "
            f"[{lo}, {hi}] (min |C_u| = {vals.min():.3e})"
        )
    root = brentq(c_u, lo, hi, xtol=1e-9)
    return float(root)
