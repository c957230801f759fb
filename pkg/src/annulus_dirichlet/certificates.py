"""Free-Lagrangian identities and subgradient lower bounds for the energy.

A free Lagrangian integrates to a value fixed by the admissible class alone
(boundary correspondence plus degree).  The pointwise inequality

    |g_N|^2 + |g_T|^2 >= X(s) |g|_N / t + Y(t) Im(g_T / g) + Z(s) det Dg + W(t),

with t = |z| and s = |g(z)|, integrates term by term into four free
Lagrangians, so the sum of their closed-form right-hand sides bounds the
energy of every admissible map from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .closedform import Hybrid, ProblemSpec, Regime, domain_interval, minimizer
from .errors import RegimeError
from .polargrid import DiscreteMap, differentials, integrate

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class WeightTable:
    """A weight function given by samples, linearly interpolated."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or len(nodes) < 2:
            raise ValueError("weight table needs matching 1-d nodes and values")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("weight table nodes must increase")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, f: Callable, lo: float, hi: float, n: int = 4097) -> "WeightTable":
        nodes = np.linspace(lo, hi, n)
        return cls(nodes, np.broadcast_to(np.asarray(f(nodes), dtype=float), nodes.shape))

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> "WeightTable":
        return cls(np.array([lo, hi]), np.array([value, value]))

    def __call__(self, x):
        return np.interp(x, self.nodes, self.values)

    def integral(self, lo: float, hi: float, moment: int = 0) -> float:
        """Integral of x^moment * table(x) over [lo, hi], exact for moment <= 1."""
        inner = self.nodes[(self.nodes > lo) & (self.nodes < hi)]
        x = np.concatenate([[lo], inner, [hi]])
        mid = 0.5 * (x[1:] + x[:-1])
        f = lambda u: u**moment * self(u)  # noqa: E731
        # Simpson per segment: exact for the quadratic x * (linear)
        return float(np.sum((x[1:] - x[:-1]) * (f(x[:-1]) + 4 * f(mid) + f(x[1:])) / 6))


@dataclass(frozen=True)
class LagrangianWeights:
    """Weights of the four free Lagrangians.

    M and B are functions of t = |z|; N and A are functions of s = |g(z)|.
    """

    M: WeightTable
    N: WeightTable
    A: WeightTable
    B: WeightTable


def _modulus_derivative(m: DiscreteMap, g_N: np.ndarray) -> np.ndarray:
    """d|g|/dt from g_N."""
    s = np.abs(m.w)
    return np.real(np.conj(m.w) * g_N) / s


def lagrangian_a(m: DiscreteMap, M: WeightTable) -> tuple[float, float]:
    g = m.grid
    lhs = integrate(g, np.broadcast_to(M(g.t)[:, None], m.w.shape))
    rhs = 2 * math.pi * M.integral(g.t_min, g.t_max, moment=1)
    return lhs, rhs


def lagrangian_b(m: DiscreteMap, N: WeightTable, exact: bool = False) -> tuple[float, float]:
    g_N, g_T = differentials(m, exact)
    det = np.imag(g_T * np.conj(g_N))
    lhs = integrate(m.grid, N(np.abs(m.w)) * det)
    rhs = 2 * math.pi * m.j * N.integral(1.0, m.target_R, moment=1)
    return lhs, rhs


def lagrangian_c(m: DiscreteMap, A: WeightTable, exact: bool = False) -> tuple[float, float]:
    g_N, _ = differentials(m, exact)
    t = m.grid.t[:, None]
    lhs = integrate(m.grid, A(np.abs(m.w)) * _modulus_derivative(m, g_N) / t)
    rhs = 2 * math.pi * A.integral(1.0, m.target_R)
    return lhs, rhs


def lagrangian_d(m: DiscreteMap, B: WeightTable, exact: bool = False) -> tuple[float, float]:
    _, g_T = differentials(m, exact)
    g = m.grid
    lhs = integrate(g, B(g.t)[:, None] * np.imag(g_T / m.w))
    rhs = 2 * math.pi * m.j * B.integral(g.t_min, g.t_max)
    return lhs, rhs


def all_lagrangians(m: DiscreteMap, weights: LagrangianWeights, exact: bool = False) -> dict:
    return {
        "lagrangian_a": lagrangian_a(m, weights.M),
        "lagrangian_b": lagrangian_b(m, weights.N, exact),
        "lagrangian_c": lagrangian_c(m, weights.A, exact),
        "lagrangian_d": lagrangian_d(m, weights.B, exact),
    }


# ------------------------------------------------------------ coefficients


@dataclass(frozen=True)
class SubgradientCoefficients:
    """Coefficient functions X(s), Y(t), Z(s), W(t) for one regime.

    Elastic (c1 >= 0): X = gamma(s) = 2 c1 / sqrt(j^2 s^2 + c1), Y = 0,
    Z = 2 alpha(s) with alpha = js / sqrt(j^2 s^2 + c1), W = delta(t) = -c1/t^2.

    Non-elastic (-j^2 <= c1 < 0): X = 0, Y = nu(t) = -2 c1 / (j t),
    Z = 2 beta(s) with beta = sqrt(j^2 s^2 + c1) / (js), W = mu(t) = c1 / t^2.
    """

    regime: Regime
    c1: float
    j: int

    def __post_init__(self):
        if self.regime == Regime.CONFORMAL:
            object.__setattr__(self, "regime", Regime.ELASTIC)
        if self.regime == Regime.ELASTIC and self.c1 < 0:
            raise RegimeError(f"elastic coefficients need c1 >= 0, got {self.c1}")
        if self.regime == Regime.NONELASTIC and not (-(self.j**2) * (1 + 1e-12) <= self.c1 < 0):
            raise RegimeError(f"non-elastic coefficients need -j^2 <= c1 < 0, got {self.c1}")

    def _root(self, s):
        return np.sqrt(np.maximum(self.j**2 * np.asarray(s, dtype=float) ** 2 + self.c1, 0.0))

    def alpha(self, s):
        return self.j * np.asarray(s) / self._root(s)

    def beta(self, s):
        return self._root(s) / (self.j * np.asarray(s))

    def X(self, s):
        if self.regime == Regime.ELASTIC:
            return 2 * self.c1 / self._root(s)
        return np.zeros_like(np.asarray(s, dtype=float))

    def Y(self, t):
        if self.regime == Regime.ELASTIC:
            return np.zeros_like(np.asarray(t, dtype=float))
        return -2 * self.c1 / (self.j * np.asarray(t))

    def Z(self, s):
        if self.regime == Regime.ELASTIC:
            return 2 * self.alpha(s)
        return 2 * self.beta(s)

    def W(self, t):
        t = np.asarray(t, dtype=float)
        return (-self.c1 if self.regime == Regime.ELASTIC else self.c1) / t**2

    def integrand(self, t, s, mod_N, im_ratio, det):
        """X(s)|g|_N/t + Y(t) Im(g_T/g) + Z(s) det + W(t)."""
        return self.X(s) * mod_N / t + self.Y(t) * im_ratio + self.Z(s) * det + self.W(t)

    def weights(self, t_lo: float, t_hi: float, R: float, n: int = 4097) -> LagrangianWeights:
        return LagrangianWeights(
            M=WeightTable.from_function(self.W, t_lo, t_hi, n),
            N=WeightTable.from_function(self.Z, 1.0, R, n),
            A=WeightTable.from_function(self.X, 1.0, R, n),
            B=WeightTable.from_function(self.Y, t_lo, t_hi, n),
        )


def coefficients(spec: ProblemSpec) -> SubgradientCoefficients:
    p = minimizer(spec).profile
    regime = Regime.ELASTIC if p.c1 >= 0 else Regime.NONELASTIC
    return SubgradientCoefficients(regime=regime, c1=p.c1, j=spec.j)


# ----------------------------------------------------------- lower bound


def _log_primitive(u, c):
    # log(u + sqrt(u^2 + c)), u > 0
    return math.log(u + math.sqrt(max(u * u + c, 0.0)))


def _int_inv_root(j, c, a, b):
    """Integral of 1/sqrt(j^2 s^2 + c) over [a, b]."""
    return (_log_primitive(j * b, c) - _log_primitive(j * a, c)) / j


def _int_sq_over_root(j, c, a, b):
    """Integral of s^2/sqrt(j^2 s^2 + c) over [a, b]."""

    def prim(u):
        return 0.5 * (u * math.sqrt(max(u * u + c, 0.0)) - c * _log_primitive(u, c))

    return (prim(j * b) - prim(j * a)) / j**3


def _int_root(j, c, a, b):
    """Integral of sqrt(j^2 s^2 + c) over [a, b]."""

    def prim(u):
        return 0.5 * (u * math.sqrt(max(u * u + c, 0.0)) + c * _log_primitive(u, c))

    return (prim(j * b) - prim(j * a)) / j


def lagrangian_rhs(spec: ProblemSpec) -> dict:
    """Closed-form right-hand sides of the four coefficient-weighted Lagrangians."""
    co = coefficients(spec)
    t_lo, t_hi = domain_interval(spec)
    j, c, R = spec.j, co.c1, spec.R
    L = math.log(t_hi / t_lo)
    if co.regime == Regime.ELASTIC:
        a = -2 * math.pi * c * L
        b = 2 * math.pi * j * 2 * j * _int_sq_over_root(j, c, 1.0, R)
        cc = 2 * math.pi * 2 * c * _int_inv_root(j, c, 1.0, R)
        d = 0.0
    else:
        a = 2 * math.pi * c * L
        b = 2 * math.pi * j * (2 / j) * _int_root(j, c, 1.0, R)
        cc = 0.0
        d = 2 * math.pi * j * (-2 * c / j) * L
    return {"lagrangian_a": a, "lagrangian_b": b, "lagrangian_c": cc, "lagrangian_d": d}


def lower_bound(spec: ProblemSpec) -> float:
    """Energy lower bound valid for every admissible degree-j map."""
    return float(sum(lagrangian_rhs(spec).values()))


# ---------------------------------------------------------------- certify


@dataclass
class CertificateReport:
    lagrangians: dict
    certified_value: float
    lower_bound: float
    energy: float
    slack: float
    max_pointwise_violation: float
    n_violations: int
    equality_residual: float
    regime: str
    tolerance: float
    density_scale: float = 1.0
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.energy >= self.lower_bound * (1 - self.tolerance) and self.max_pointwise_violation <= self.tolerance * self.density_scale

    def to_dict(self) -> dict:
        out = {k: [float(v[0]), float(v[1])] for k, v in self.lagrangians.items()}
        out.update(
            certified_value=self.certified_value,
            lower_bound=self.lower_bound,
            energy=self.energy,
            slack=self.slack,
            max_pointwise_violation=self.max_pointwise_violation,
            n_violations=self.n_violations,
            equality_residual=self.equality_residual,
            regime=self.regime,
            ok=self.ok,
        )
        return out


def _check_domain(m: DiscreteMap, spec: ProblemSpec):
    lo, hi = domain_interval(spec)
    g = m.grid
    if not (math.isclose(g.t_min, lo, rel_tol=1e-9) and math.isclose(g.t_max, hi, rel_tol=1e-9)):
        raise RegimeError(f"map lives on A({g.t_min}, {g.t_max}), problem needs A({lo}, {hi})")
    if m.j != spec.j or not math.isclose(m.target_R, spec.R, rel_tol=1e-12):
        raise RegimeError("map target does not match the problem")


def pointwise_terms(m: DiscreteMap, co: SubgradientCoefficients, exact: bool = False):
    """Energy density, subgradient integrand and equality residual at every node."""
    g_N, g_T = differentials(m, exact)
    t = m.grid.t[:, None]
    s = np.abs(m.w)
    mod_N = _modulus_derivative(m, g_N)
    det = np.imag(g_T * np.conj(g_N))
    im_ratio = np.imag(g_T / m.w)
    dens = np.abs(g_N) ** 2 + np.abs(g_T) ** 2
    lag = co.integrand(t, s, mod_N, im_ratio, det)
    if co.regime == Regime.ELASTIC:
        eq = co.alpha(s) * np.abs(g_N) - np.abs(g_T)
    else:
        eq = co.beta(s) * np.abs(g_T) - np.abs(g_N)
    scale = np.sqrt(dens) + 1e-300
    return dens, lag, eq / scale


def certify(m: DiscreteMap, spec: ProblemSpec, exact: bool = False, tolerance: float = 1e-3) -> CertificateReport:
    """Evaluate the regime's subgradient certificate on a sampled map.

    ``slack`` is (energy - lower_bound) / lower_bound.  Pointwise violations
    below 10 eps times the local magnitude count as zero.
    """
    _check_domain(m, spec)
    co = coefficients(spec)
    dens, lag, eq = pointwise_terms(m, co, exact)
    grid = m.grid
    energy = integrate(grid, dens)
    certified = integrate(grid, lag)
    lb = lower_bound(spec)
    mag = np.abs(dens) + np.abs(lag)
    excess = lag - dens
    viol = np.where(excess > 10 * _EPS * mag, excess, 0.0)
    t_lo, t_hi = grid.t_min, grid.t_max
    weights = co.weights(t_lo, t_hi, spec.R)
    pairs = all_lagrangians(m, weights, exact)
    rhs = lagrangian_rhs(spec)
    pairs = {k: (v[0], rhs[k]) for k, v in pairs.items()}
    return CertificateReport(
        lagrangians=pairs,
        certified_value=certified,
        lower_bound=lb,
        energy=energy,
        slack=(energy - lb) / abs(lb),
        max_pointwise_violation=float(viol.max()),
        density_scale=float(np.max(dens)),
        n_violations=int(np.count_nonzero(viol)),
        equality_residual=float(np.max(np.abs(eq))),
        regime=co.regime.value,
        tolerance=tolerance,
        extra={"hybrid": isinstance(minimizer(spec), Hybrid)},
    )
