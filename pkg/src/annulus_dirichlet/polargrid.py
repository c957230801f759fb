"""Sampled maps on log-polar grids and the discrete operators acting on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import kernels
from .closedform import ProblemSpec, domain_interval
from .errors import AdmissibilityError, WindingError

BOUNDARY_EPS = 1e-9
INTERIOR_EPS = 1e-6
JACOBIAN_FLOOR = 1e-9


@dataclass(frozen=True)
class PolarGrid:
    """Log-spaced radii t_i in [t_min, t_max] times equispaced angles in [0, 2pi)."""

    t_min: float
    t_max: float
    n_radial: int
    n_angular: int

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError(f"need 0 < t_min < t_max, got {self.t_min}, {self.t_max}")
        if self.n_radial < 3 or self.n_angular < 8:
            raise ValueError("grid must be at least 3 x 8")
        if self.n_angular % 2:
            raise ValueError("n_angular must be even (red-black ordering wraps periodically)")

    @classmethod
    def for_spec(cls, spec: ProblemSpec, n_radial: int, n_angular: int) -> "PolarGrid":
        lo, hi = domain_interval(spec)
        return cls(lo, hi, n_radial, n_angular)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(math.log(self.t_min), math.log(self.t_max), self.n_radial)

    @property
    def t(self) -> np.ndarray:
        t = np.exp(self.x)
        t[0], t[-1] = self.t_min, self.t_max
        return t

    @property
    def tau(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_angular) / self.n_angular

    @property
    def hx(self) -> float:
        return math.log(self.t_max / self.t_min) / (self.n_radial - 1)

    @property
    def htau(self) -> float:
        return 2 * np.pi / self.n_angular

    @property
    def ax(self) -> float:
        return self.htau / self.hx

    @property
    def at(self) -> float:
        return self.hx / self.htau

    def points(self) -> np.ndarray:
        return self.t[:, None] * np.exp(1j * self.tau)[None, :]

    def refine(self, factor: int = 2) -> "PolarGrid":
        return PolarGrid(
            self.t_min, self.t_max, factor * (self.n_radial - 1) + 1, factor * self.n_angular
        )


@dataclass
class DiscreteMap:
    """Complex image samples w[i, k] = g(t_i e^{i tau_k})."""

    grid: PolarGrid
    w: np.ndarray
    target_R: float
    j: int
    # analytic (g_N, g_T) when the map came from a closed formula
    exact_derivatives: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=complex)
        if self.w.shape != (self.grid.n_radial, self.grid.n_angular):
            raise ValueError(f"sample shape {self.w.shape} does not match grid")

    def with_values(self, w) -> "DiscreteMap":
        return replace(self, w=np.array(w, dtype=complex), exact_derivatives=None)

    def copy(self) -> "DiscreteMap":
        return self.with_values(self.w.copy())

    def rotated(self, theta: float) -> "DiscreteMap":
        rot = np.exp(1j * theta)
        ex = self.exact_derivatives
        out = replace(self, w=self.w * rot)
        if ex is not None:
            out.exact_derivatives = (ex[0] * rot, ex[1] * rot)
        return out


@dataclass
class AdmissibilityReport:
    boundary_error: float
    image_violation: float
    windings: np.ndarray
    coverage: float
    j: int
    boundary_eps: float = BOUNDARY_EPS
    interior_eps: float = INTERIOR_EPS

    @property
    def ok(self) -> bool:
        return (
            self.boundary_error <= self.boundary_eps
            and self.image_violation <= self.interior_eps
            and bool(np.all(self.windings == self.j))
        )


def row_windings(w: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Winding number of every row of samples about the origin."""
    if np.min(np.abs(w)) < floor:
        raise WindingError("sample too close to the origin for a winding number")
    ratio = np.roll(w, -1, axis=1) / w
    turns = np.angle(ratio).sum(axis=1) / (2 * np.pi)
    return np.rint(turns).astype(int)


def coverage(m: DiscreteMap, bins: tuple[int, int] = (8, 32)) -> float:
    """Fraction of modulus/argument cells of the target annulus hit by a sample."""
    s = np.abs(m.w).ravel()
    a = np.angle(m.w).ravel() % (2 * np.pi)
    hist, _, _ = np.histogram2d(s, a, bins=bins, range=[[1.0, m.target_R], [0, 2 * np.pi]])
    return float(np.count_nonzero(hist)) / hist.size


def check_admissible(
    m: DiscreteMap, boundary_eps: float = BOUNDARY_EPS, interior_eps: float = INTERIOR_EPS
) -> AdmissibilityReport:
    s = np.abs(m.w)
    bnd = max(np.max(np.abs(s[0] - 1)), np.max(np.abs(s[-1] - m.target_R)))
    lo, hi = min(1.0, m.target_R), max(1.0, m.target_R)
    viol = max(0.0, float(np.max(lo - s)), float(np.max(s - hi)))
    return AdmissibilityReport(
        boundary_error=float(bnd),
        image_violation=viol,
        windings=row_windings(m.w),
        coverage=coverage(m),
        j=m.j,
        boundary_eps=boundary_eps,
        interior_eps=interior_eps,
    )


def sample_map(
    f: Callable,
    grid: PolarGrid,
    R: float,
    j: int,
    derivatives: Optional[Callable] = None,
    check: bool = True,
) -> DiscreteMap:
    """Evaluate a vectorized complex map on the grid nodes.

    ``derivatives(z)`` may return the analytic ``(g_N, g_T)``.  With ``check``
    the admissibility invariants must hold, else AdmissibilityError.
    """
    z = grid.points()
    try:
        w = np.asarray(f(z), dtype=complex)
    except Exception as exc:
        raise AdmissibilityError(f"map evaluation failed: {exc}") from exc
    if w.shape != z.shape:
        w = np.broadcast_to(w, z.shape).copy()
    bad = ~np.isfinite(w)
    if bad.any():
        raise AdmissibilityError("non-finite sample", index=tuple(int(i) for i in np.argwhere(bad)[0]))
    exact = None
    if derivatives is not None:
        g_N, g_T = derivatives(z)
        exact = (np.asarray(g_N, dtype=complex), np.asarray(g_T, dtype=complex))
    m = DiscreteMap(grid, w, float(R), int(j), exact_derivatives=exact)
    if check:
        rep = check_admissible(m)
        if not rep.ok:
            s = np.abs(w)
            dev = np.zeros_like(s)
            dev[0] = np.abs(s[0] - 1)
            dev[-1] = np.abs(s[-1] - R)
            dev[1:-1] = np.maximum(0, np.maximum(1 - s[1:-1], s[1:-1] - R))
            idx = np.unravel_index(np.argmax(dev), dev.shape)
            raise AdmissibilityError(
                f"inadmissible samples (boundary {rep.boundary_error:.3g}, image "
                f"{rep.image_violation:.3g}, windings {sorted(set(rep.windings.tolist()))})",
                index=tuple(int(i) for i in idx),
            )
    return m


def differentials(m: DiscreteMap, exact: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Polar derivatives g_N = dg/dt and g_T = (1/t) dg/dtau at every node.

    Radial differences are taken in x = log t (uniform spacing): centred inside,
    second-order one-sided on the two boundary rows.  Angular differences are
    centred and periodic.
    """
    if exact and m.exact_derivatives is not None:
        return m.exact_derivatives
    g = m.grid
    t = g.t[:, None]
    dx = np.gradient(m.w, g.hx, axis=0, edge_order=2)
    dtau = (np.roll(m.w, -1, axis=1) - np.roll(m.w, 1, axis=1)) / (2 * g.htau)
    return dx / t, dtau / t


def jacobian(m: DiscreteMap, exact: bool = False) -> np.ndarray:
    g_N, g_T = differentials(m, exact)
    return np.imag(g_T * np.conj(g_N))


def integrate(grid: PolarGrid, f: np.ndarray) -> float:
    """Trapezoidal quadrature of a node field against the area element t dt dtau."""
    t = grid.t
    ring = f.sum(axis=1) * grid.htau  # periodic trapezoid
    return float(np.trapezoid(ring * t, t))


def dirichlet_energy(m: DiscreteMap, exact: bool = False) -> float:
    g_N, g_T = differentials(m, exact)
    dens = g_N.real**2 + g_N.imag**2 + g_T.real**2 + g_T.imag**2
    return integrate(m.grid, dens)


def edge_energy(m: DiscreteMap) -> float:
    """The edge-based discrete energy minimized by the optimizer."""
    return float(kernels.edge_energy(m.w, m.grid.ax, m.grid.at))


def winding_number(m: DiscreteMap, row: int) -> int:
    return int(row_windings(m.w[[row]])[0])


def regular_value_degrees(m: DiscreteMap, n_samples: int = 12, seed: int = 0, max_tries: int = 20) -> np.ndarray:
    """Signed preimage counts of random regular values in the target annulus.

    Values are drawn away from the image boundary circles, where the
    piecewise-linear interpolant cuts chords.  Values landing on a triangle
    edge or in a near-degenerate preimage cell are redrawn.
    """
    rng = np.random.default_rng(seed)
    lo, hi = sorted((1.0, m.target_R))
    pad = 0.1 * (hi - lo)
    g = m.grid
    area_tol = JACOBIAN_FLOOR * 0.5 * g.hx * g.htau
    out = []
    for _ in range(max_tries):
        need = n_samples - len(out)
        if need <= 0:
            break
        s = rng.uniform(lo + pad, hi - pad, need)
        ys = s * np.exp(1j * rng.uniform(0, 2 * np.pi, need))
        counts, flagged = kernels.preimage_count(m.w, ys, area_tol)
        out.extend(int(c) for c in counts[~flagged])
    if len(out) < n_samples:
        raise WindingError("could not find enough regular values")
    return np.array(out[:n_samples])


def degree_estimate(m: DiscreteMap, n_samples: int = 12, seed: int = 0) -> int:
    """Degree of the sampled map: rows must agree and match the regular-value count."""
    wind = row_windings(m.w)
    if not np.all(wind == wind[0]):
        raise AdmissibilityError(f"rows wind inconsistently: {sorted(set(wind.tolist()))}")
    counts = regular_value_degrees(m, n_samples=n_samples, seed=seed)
    if not np.all(counts == wind[0]):
        raise AdmissibilityError(
            f"regular-value degree {sorted(set(counts.tolist()))} disagrees with winding {wind[0]}"
        )
    return int(wind[0])


def _smooth(grid: PolarGrid, rng, n_modes: int, periodic_only: bool = False) -> np.ndarray:
    xh = np.linspace(0.0, 1.0, grid.n_radial)[:, None]
    tau = grid.tau[None, :]
    f = np.zeros((grid.n_radial, grid.n_angular))
    for p in range(n_modes + 1):
        for q in range(0 if not periodic_only else 1, n_modes + 1):
            a, b = rng.normal(size=2) / (1 + p + q)
            f += np.cos(p * np.pi * xh) * (a * np.cos(q * tau) + b * np.sin(q * tau))
    peak = np.max(np.abs(f))
    return f / peak if peak > 0 else f


def perturb(m: DiscreteMap, seed: int, modulus_amp: float = 0.3, arg_amp: float = 0.3, n_modes: int = 3) -> DiscreteMap:
    """Smooth random admissible perturbation of ``m``.

    With sigma = (|w| - 1) / (R - 1) in [0, 1], the modulus moves to
    sigma + a sigma (1 - sigma) q for |a q| <= 1, which stays in [0, 1] and
    keeps the boundary moduli exact.  The argument gets a smooth periodic
    shift, boundary rows included (they may slide along their circles).
    """
    if not 0 <= modulus_amp <= 1:
        raise ValueError("modulus amplitude must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    s = np.abs(m.w)
    R = m.target_R
    sigma = np.clip((s - 1) / (R - 1), 0.0, 1.0)
    q = _smooth(m.grid, rng, n_modes)
    sigma2 = sigma + modulus_amp * sigma * (1 - sigma) * q
    mod = 1 + (R - 1) * sigma2
    mod[0], mod[-1] = 1.0, R
    shift = arg_amp * _smooth(m.grid, rng, n_modes)
    w = mod * (m.w / s) * np.exp(1j * shift)
    return m.with_values(w)
