"""Closed-form minimizers of the Dirichlet energy between circular annuli.

Everything here works on the normalized pair A(1, r) -> A(1, R).  Energies
use the integrand |g_N|^2 + |g_T|^2 (sum of squared polar derivatives).

The radial solution is G(t) = A t^j + B t^-j.  Above the Nitsche-type bound
the minimizer is e^{ij tau} G(t); below it the domain is re-centred to the
equal-modulus annulus A(rho, r_crit), the outer band 1 <= t <= r_crit carries
the critical profile cosh(j log t) and the inner band is squeezed onto the
unit circle.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import DomainError, InvalidAnnulusError, RegimeError

BOUND_RTOL = 1e-12
_RADIUS_RTOL = 1e-12


class Regime(str, enum.Enum):
    CONFORMAL = "conformal"
    ELASTIC = "elastic"
    NONELASTIC = "nonelastic"


@dataclass(frozen=True)
class ProblemSpec:
    """Normalized annulus pair A(1, r) -> A(1, R) with degree j.

    ``domain_scale`` and ``target_scale`` are the inner radii of the original
    annuli A(a, b) and A(c, d), so r = b/a and R = d/c.
    """

    r: float
    R: float
    j: int
    domain_scale: float = 1.0
    target_scale: float = 1.0

    def __post_init__(self):
        if not (self.r > 1 and self.R > 1):
            raise InvalidAnnulusError(f"need r > 1 and R > 1, got r={self.r}, R={self.R}")
        if int(self.j) != self.j or self.j < 1:
            raise InvalidAnnulusError(f"degree must be a positive integer, got {self.j}")
        if not (self.domain_scale > 0 and self.target_scale > 0):
            raise InvalidAnnulusError("scales must be positive")

    @property
    def original(self) -> tuple[float, float, float, float]:
        a, c = self.domain_scale, self.target_scale
        return a, a * self.r, c, c * self.R

    def to_dict(self) -> dict:
        a, b, c, d = self.original
        return {"a": a, "b": b, "c": c, "d": d, "j": int(self.j)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        try:
            return normalize_problem(
                float(data["a"]), float(data["b"]), float(data["c"]), float(data["d"]), int(data["j"])
            )
        except KeyError as exc:
            raise InvalidAnnulusError(f"missing field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        return cls.from_dict(json.loads(text))


def normalize_problem(a: float, b: float, c: float, d: float, j: int) -> ProblemSpec:
    """Reduce A(a, b) -> A(c, d) to A(1, b/a) -> A(1, d/c).

    The energy of h(z) = c g(z/a) is c^2 E[g], so minimizers correspond.
    """
    if not (0 < a < b) or not (0 < c < d):
        raise InvalidAnnulusError(f"invalid annuli A({a}, {b}) -> A({c}, {d})")
    return ProblemSpec(r=b / a, R=d / c, j=int(j), domain_scale=a, target_scale=c)


def nitsche_rhs(r, j: int):
    """Right-hand side 1/2 r^-j (1 + r^2j) of the degree-j Nitsche bound.

    Works with ``fractions.Fraction`` input for exact checks.
    """
    return (r**j + r ** (-j)) / 2


def is_above_bound(spec: ProblemSpec) -> bool:
    # the critical case counts as harmonic
    return spec.R >= nitsche_rhs(spec.r, spec.j) * (1 - BOUND_RTOL)


def critical_radius(R: float, j: int) -> float:
    """Largest r for which the radial harmonic map A(1, r) -> A(1, R) exists."""
    if R < 1:
        raise InvalidAnnulusError(f"target radius must be >= 1, got {R}")
    return (R + math.sqrt((R - 1) * (R + 1))) ** (1.0 / j)


def c1_closed(r: float, R: float, j: int) -> float:
    """The integration constant written directly in terms of (r, R, j).

    Evaluated exactly in rationals on the rounded r**j, since the numerator
    cancels badly near the conformal case R = r^j.
    """
    rj = Fraction(r**j)
    R = Fraction(R)
    return float(4 * j**2 * (1 + R**2 - R * (rj + 1 / rj)) / (rj - 1 / rj) ** 2)


@dataclass(frozen=True)
class RadialProfile:
    """G(t) = A t^j + B t^-j on the band 1 <= t <= r_band."""

    A: float
    B: float
    c1: float
    j: int
    regime: Regime
    r_band: float

    @property
    def R(self) -> float:
        return float(self.G(self.r_band))

    def G(self, t):
        return profile_eval(self, t)[0]

    def invert(self, s):
        return profile_invert(self, s)

    def log_integral(self, t_hi: float | None = None) -> float:
        """Closed form of the integral of G(t)^2 / t over [1, t_hi]."""
        t = self.r_band if t_hi is None else t_hi
        j, A, B = self.j, self.A, self.B
        lt = math.log(t)
        # (t^2j - 1)/(2j) and (1 - t^-2j)/(2j), via expm1 for small log t
        up = math.expm1(2 * j * lt) / (2 * j)
        down = -math.expm1(-2 * j * lt) / (2 * j)
        return A * A * up + 2 * A * B * lt + B * B * down


def _regime_of(c1: float) -> Regime:
    if c1 == 0.0:
        return Regime.CONFORMAL
    return Regime.ELASTIC if c1 > 0 else Regime.NONELASTIC


def solve_radial(spec: ProblemSpec) -> RadialProfile:
    """Coefficients of the degree-j radial harmonic map with G(1)=1, G(r)=R."""
    r, R, j = spec.r, spec.R, spec.j
    rj = r**j
    denom = 1 - rj * rj
    A = (1 - rj * R) / denom
    B = rj * (R - rj) / denom
    c1 = -4 * j**2 * A * B
    c1_ref = c1_closed(r, R, j)
    scale = 4 * j**2 * max(1.0, R) * rj / (rj - 1 / rj) ** 2 * max(1.0, rj)
    if abs(c1 - c1_ref) > 1e-9 * scale:
        raise ArithmeticError(f"c1 mismatch: {c1} vs {c1_ref}")
    return RadialProfile(A=A, B=B, c1=c1, j=j, regime=_regime_of(c1), r_band=r)


def critical_profile(R: float, j: int) -> RadialProfile:
    """The profile cosh(j log t) mapping A(1, r_crit) onto A(1, R)."""
    return RadialProfile(
        A=0.5, B=0.5, c1=-float(j**2), j=j, regime=Regime.NONELASTIC, r_band=critical_radius(R, j)
    )


def profile_eval(p: RadialProfile, t):
    """Return G, G', G'' at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("profile evaluated at non-positive radius")
    j, A, B = p.j, p.A, p.B
    up = t**j
    dn = t ** (-j)
    G = A * up + B * dn
    dG = j * (A * up - B * dn) / t
    d2G = j * ((j - 1) * A * up + (j + 1) * B * dn) / (t * t)
    if G.ndim == 0:
        return float(G), float(dG), float(d2G)
    return G, dG, d2G


def ode_residual(p: RadialProfile, t):
    G, dG, d2G = profile_eval(p, t)
    t = np.asarray(t, dtype=float)
    return -(p.j**2) * G + t * dG + t * t * d2G


def profile_invert(p: RadialProfile, s):
    """The inverse F = G^-1 on [1, G(r_band)].

    Solves A u^2 - s u + B = 0 for u = t^j and keeps the root on the
    increasing branch.  Uses s^2 - 4AB = (s-1)(s+1) + (A-B)^2, which holds
    because A + B = 1 and avoids cancellation near the critical profile.
    """
    s_arr = np.asarray(s, dtype=float)
    s_hi = p.R
    lo, hi = 1 - 1e-12, s_hi * (1 + 1e-12)
    if np.any((s_arr < lo) | (s_arr > hi)):
        raise DomainError(f"modulus outside [1, {s_hi}]")
    s_arr = np.clip(s_arr, 1.0, s_hi)
    if p.B == 0.0:
        u = s_arr / p.A
    else:
        disc = (s_arr - 1) * (s_arr + 1) + (p.A - p.B) ** 2
        u = (s_arr + np.sqrt(disc)) / (2 * p.A)
    t = u ** (1.0 / p.j)
    return float(t) if t.ndim == 0 else t


@dataclass(frozen=True)
class Harmonic:
    profile: RadialProfile

    kind = "harmonic"

    @property
    def t_min(self) -> float:
        return 1.0

    @property
    def t_max(self) -> float:
        return self.profile.r_band


@dataclass(frozen=True)
class Hybrid:
    """Critical harmonic band 1 <= t <= r_crit plus squeeze band rho <= t <= 1.

    The Jacobian vanishes identically on the squeeze band.
    """

    profile: RadialProfile
    r_crit: float
    rho: float

    kind = "hybrid"

    @property
    def t_min(self) -> float:
        return self.rho

    @property
    def t_max(self) -> float:
        return self.r_crit


Minimizer = Union[Harmonic, Hybrid]


def minimizer(spec: ProblemSpec) -> Minimizer:
    if is_above_bound(spec):
        return Harmonic(solve_radial(spec))
    prof = critical_profile(spec.R, spec.j)
    return Hybrid(profile=prof, r_crit=prof.r_band, rho=prof.r_band / spec.r)


def domain_interval(spec: ProblemSpec) -> tuple[float, float]:
    """Radial extent of the domain the minimizer lives on."""
    m = minimizer(spec)
    return m.t_min, m.t_max


def _check_radius(z, lo: float, hi: float) -> np.ndarray:
    t = np.abs(z)
    if np.any((t < lo * (1 - _RADIUS_RTOL)) | (t > hi * (1 + _RADIUS_RTOL))):
        raise DomainError(f"point outside the annulus A({lo}, {hi})")
    return t


def eval_g_circ(spec: ProblemSpec, z):
    """Radial harmonic map B zbar^-j + A z^j on A(1, r)."""
    if not is_above_bound(spec):
        raise RegimeError("no radial harmonic map below the Nitsche bound")
    p = solve_radial(spec)
    z = np.asarray(z, dtype=complex)
    _check_radius(z, 1.0, spec.r)
    out = p.A * z**spec.j + p.B * np.conj(z) ** (-spec.j)
    return complex(out) if out.ndim == 0 else out


def eval_g_diamond(spec: ProblemSpec, z):
    """Hybrid squeeze/harmonic map on A(rho, r_crit)."""
    m = minimizer(spec)
    if not isinstance(m, Hybrid):
        raise RegimeError("hybrid map only exists below the Nitsche bound")
    z = np.asarray(z, dtype=complex)
    t = _check_radius(z, m.rho, m.r_crit)
    j = spec.j
    phase = (z / np.where(t == 0, 1, t)) ** j
    G = np.where(t >= 1, profile_eval(m.profile, np.maximum(t, 1.0))[0], 1.0)
    out = phase * G
    return complex(out) if out.ndim == 0 else out


def eval_minimizer(spec: ProblemSpec, z):
    """g_circ above the bound, g_diamond below it."""
    if is_above_bound(spec):
        return eval_g_circ(spec, z)
    return eval_g_diamond(spec, z)


def minimizer_derivatives(spec: ProblemSpec, z):
    """Analytic polar derivatives (g_N, g_T) of the minimizer at ``z``."""
    m = minimizer(spec)
    z = np.asarray(z, dtype=complex)
    t = _check_radius(z, m.t_min, m.t_max)
    phase = (z / t) ** spec.j
    G, dG, _ = profile_eval(m.profile, np.maximum(t, 1.0))
    if isinstance(m, Hybrid):
        band = t < 1
        G = np.where(band, 1.0, G)
        dG = np.where(band, 0.0, dG)
    g_N = phase * dG
    g_T = 1j * spec.j * phase * G / t
    return g_N, g_T


@dataclass(frozen=True)
class EnergyValue:
    value: float
    kind: str
    target_scale: float = 1.0

    @property
    def original(self) -> float:
        """Energy of the map between the un-normalized annuli."""
        return self.target_scale**2 * self.value

    @property
    def half_normalized(self) -> float:
        """Same energy with |Dh|^2 = (|h_x|^2 + |h_y|^2) / 2."""
        return self.value / 2


def energy_closed(spec: ProblemSpec) -> EnergyValue:
    m = minimizer(spec)
    p, j = m.profile, spec.j
    if isinstance(m, Harmonic):
        val = 4 * math.pi * j**2 * p.log_integral() + 2 * math.pi * p.c1 * math.log(spec.r)
    else:
        val = 4 * math.pi * j**2 * p.log_integral() - 2 * math.pi * j**2 * math.log(m.rho * m.r_crit)
    return EnergyValue(value=val, kind=m.kind, target_scale=spec.target_scale)
