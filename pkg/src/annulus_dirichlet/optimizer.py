"""Numerical minimization of the discrete energy over admissible grid maps.

The objective is the edge energy of :mod:`kernels` (the flat Dirichlet
energy in log-polar coordinates).  Admissible maps keep the boundary rows on
the circles |w| = 1 and |w| = R, the interior in the shell 1 <= |w| <= R,
and every row winding j times.

Three moves, each energy-monotone:

* ``harmonic_interior_step``: exact discrete Laplace solve for the interior
  with the boundary rows fixed (FFT in the angle, tridiagonal in the radius);
* projected red-black SOR sweeps: nodal minimization followed by radial
  projection onto the node's constraint set;
* ``projected_gradient_step``: Armijo-backtracked step along the projected
  gradient;
* ``boundary_phase_step``: with a harmonic interior, a preconditioned step in
  the boundary angles, which removes the slow reparametrization modes that
  local smoothing barely touches.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import scipy.fft

from . import kernels
from .closedform import Hybrid, ProblemSpec, energy_closed, eval_minimizer, minimizer
from .errors import AnnulusError
from .polargrid import (
    DiscreteMap,
    PolarGrid,
    degree_estimate,
    dirichlet_energy,
    jacobian,
    perturb,
    row_windings,
)

log = logging.getLogger(__name__)

MODES = ("radial_interp", "power_map", "perturbed")


class LinearSolveError(AnnulusError):
    def __init__(self, residual):
        super().__init__(f"interior Laplace solve failed, relative residual {residual:.3e}")
        self.residual = residual


@dataclass
class OptimizerConfig:
    max_iters: int = 2000
    step0: Optional[float] = None  # default 1 / (2 * largest nodal stiffness)
    backtrack: float = 0.5
    tol_grad: Optional[float] = None  # default 1e-6 * sqrt(node count)
    tol_energy: float = 1e-10
    tol_projection: float = 1e-6
    seed: int = 0
    sweeps: int = 20
    omega: Optional[float] = None
    check_degree: bool = True

    def __post_init__(self):
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must lie in (0, 1)")
        for name in ("tol_energy", "tol_projection"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tol_grad is not None and self.tol_grad <= 0:
            raise ValueError("tol_grad must be positive")


@dataclass
class ConvergenceReport:
    iterations: int
    energy: float
    oracle_energy: float
    gap_rel: float
    active_fraction: float
    trace: list
    converged: bool
    objective: float = float("nan")
    grad_norm: float = float("nan")
    degrees: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ------------------------------------------------------------------ setup


def initialize(spec: ProblemSpec, grid: PolarGrid, mode: str = "radial_interp", seed: int = 0, phase: float = 0.0) -> DiscreteMap:
    """Admissible starting map.

    ``phase`` rotates the whole image; the minimizer is only defined up to
    rotation, so this exercises the gauge fit.
    """
    if mode not in MODES:
        raise ValueError(f"unknown initialization {mode!r}, expected one of {MODES}")
    R, j = spec.R, spec.j
    t = grid.t[:, None]
    rot = np.exp(1j * (j * grid.tau[None, :] + phase))
    if mode == "power_map":
        lo, hi = grid.t_min**j, grid.t_max**j
        mod = 1 + (R - 1) * (t**j - lo) / (hi - lo)
    else:
        mod = 1 + (R - 1) * (t - grid.t_min) / (grid.t_max - grid.t_min)
    m = DiscreteMap(grid, mod * rot, R, j)
    if mode == "perturbed":
        m = perturb(m, seed=seed, modulus_amp=0.5, arg_amp=0.5)
    return m


# ------------------------------------------------------------------ steps


def _shell_project(w: np.ndarray, R: float) -> np.ndarray:
    s = np.abs(w)
    tgt = np.clip(s, 1.0, R)
    tgt[0] = 1.0
    tgt[-1] = R
    return w * (tgt / np.where(s == 0, 1.0, s))


def _harmonic_solve(w: np.ndarray, ax: float, at: float) -> np.ndarray:
    """Interior values solving the 5-point log-polar Laplace equation."""
    nr, nt = w.shape
    n = nr - 2
    out = w.copy()
    if n <= 0:
        return out
    k = np.arange(nt)
    lam = at * (2 - 2 * np.cos(2 * np.pi * k / nt))
    diag = 2 * ax + lam
    wh = scipy.fft.fft(w, axis=1)
    rhs = np.zeros((n, nt), dtype=complex)
    rhs[0] += ax * wh[0]
    rhs[-1] += ax * wh[-1]
    # Thomas algorithm, vectorized over angular modes; off-diagonals are -ax
    cp = np.empty((n, nt))
    dp = np.empty((n, nt), dtype=complex)
    cp[0] = -ax / diag
    dp[0] = rhs[0] / diag
    for i in range(1, n):
        den = diag + ax * cp[i - 1]
        cp[i] = -ax / den
        dp[i] = (rhs[i] + ax * dp[i - 1]) / den
    x = np.empty_like(dp)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    out[1:-1] = scipy.fft.ifft(x, axis=1)
    return out


def _interior_residual(w, ax, at):
    lap = ax * (2 * w[1:-1] - w[:-2] - w[2:]) + at * (2 * w[1:-1] - np.roll(w[1:-1], 1, axis=1) - np.roll(w[1:-1], -1, axis=1))
    return float(np.linalg.norm(lap) / max(np.linalg.norm(w[1:-1]) * (2 * ax + 4 * at), 1e-300))


def harmonic_interior_step(m: DiscreteMap) -> DiscreteMap:
    """Replace the interior by the discrete harmonic extension, then clamp.

    If the clamp makes the energy go up, the input map is returned unchanged.
    """
    g = m.grid
    w = _harmonic_solve(m.w, g.ax, g.at)
    res = _interior_residual(w, g.ax, g.at)
    if not res <= 1e-10:
        raise LinearSolveError(res)
    s = np.abs(w[1:-1])
    lo, hi = min(1.0, m.target_R), max(1.0, m.target_R)
    w[1:-1] *= np.clip(s, lo, hi) / np.where(s == 0, 1.0, s)
    out = m.with_values(w)
    e0 = kernels.edge_energy(m.w, g.ax, g.at)
    e1 = kernels.edge_energy(w, g.ax, g.at)
    if e1 > e0 or not np.array_equal(row_windings(w), row_windings(m.w)):
        return m
    return out


def _phase_preconditioner(grid: PolarGrid) -> np.ndarray:
    """Per-mode stiffness of a boundary angle perturbation, harmonic interior.

    Symbol of the strip Dirichlet-to-Neumann map, kappa coth(kappa L), with
    the discrete angular frequency kappa.
    """
    L = grid.hx * (grid.n_radial - 1)
    k = np.arange(grid.n_angular)
    kappa = 2 * np.abs(np.sin(np.pi * k / grid.n_angular)) / grid.htau
    sym = np.empty_like(kappa)
    sym[0] = 1 / L
    kl = kappa[1:] * L
    sym[1:] = kappa[1:] / np.tanh(kl)
    return 2 * grid.htau * sym


def boundary_phase_step(m: DiscreteMap, config: OptimizerConfig, alpha0: float = 1.0) -> tuple[DiscreteMap, float]:
    """Preconditioned descent in the boundary angles with harmonic re-extension.

    Returns the new map and the accepted step length (0 when none decreased
    the energy).
    """
    g = m.grid
    grad = kernels.edge_gradient(m.w, g.ax, g.at)
    prec = _phase_preconditioner(g)
    e0 = kernels.edge_energy(m.w, g.ax, g.at)
    wind = row_windings(m.w)
    dphi = []
    slope = 0.0
    for row in (0, -1):
        w = m.w[row]
        gphi = np.real(np.conj(grad[row]) * 1j * w)
        d = -np.real(scipy.fft.ifft(scipy.fft.fft(gphi) / (prec * np.abs(w) ** 2)))
        dphi.append(d)
        slope += float(np.dot(gphi, d))
    if not slope < 0:
        return m, 0.0
    lo, hi = min(1.0, m.target_R), max(1.0, m.target_R)
    alpha = alpha0
    while alpha > 1e-8:
        w = m.w.copy()
        w[0] *= np.exp(1j * alpha * dphi[0])
        w[-1] *= np.exp(1j * alpha * dphi[1])
        w = _harmonic_solve(w, g.ax, g.at)
        s = np.abs(w[1:-1])
        w[1:-1] *= np.clip(s, lo, hi) / np.where(s == 0, 1.0, s)
        e1 = kernels.edge_energy(w, g.ax, g.at)
        if e1 <= e0 + 1e-4 * alpha * slope and np.array_equal(row_windings(w), wind):
            return m.with_values(w), alpha
        alpha *= config.backtrack
    return m, 0.0


def projected_gradient(m: DiscreteMap, tol_projection: float = 1e-6) -> np.ndarray:
    """Gradient with constrained components removed.

    Boundary rows keep only the tangential part.  Interior nodes on the shell
    drop the radial part when the descent direction would leave the shell.
    """
    g = kernels.edge_gradient(m.w, m.grid.ax, m.grid.at)
    u = m.w / np.abs(m.w)
    radial = np.real(g * np.conj(u))
    s = np.abs(m.w)
    pinned = np.zeros(m.w.shape, dtype=bool)
    pinned[0] = pinned[-1] = True
    # -g points inward (radial > 0) at the inner shell, outward at the outer one
    pinned[1:-1] |= (s[1:-1] <= 1 + tol_projection) & (radial[1:-1] > 0)
    pinned[1:-1] |= (s[1:-1] >= m.target_R - tol_projection) & (radial[1:-1] < 0)
    return np.where(pinned, g - radial * u, g)


def _stiffness(grid: PolarGrid) -> float:
    return 2 * (2 * grid.ax + 2 * grid.at)


def projected_gradient_step(m: DiscreteMap, config: OptimizerConfig, step: Optional[float] = None) -> tuple[DiscreteMap, float]:
    """One Armijo-backtracked projected gradient step.

    Returns the new map and the accepted step; step 0 signals that no
    decrease was found (stationarity up to the step floor).
    """
    g = m.grid
    grad = projected_gradient(m, config.tol_projection)
    gn2 = float(np.sum(np.abs(grad) ** 2))
    if gn2 == 0.0:
        return m, 0.0
    alpha = step if step is not None else (config.step0 or 1.0 / _stiffness(g))
    e0 = kernels.edge_energy(m.w, g.ax, g.at)
    wind = row_windings(m.w)
    floor = 1e-12 / _stiffness(g)
    while alpha > floor:
        trial = _shell_project(m.w - alpha * grad, m.target_R)
        if np.all(np.isfinite(trial)) and np.min(np.abs(trial)) > 0:
            e1 = kernels.edge_energy(trial, g.ax, g.at)
            moved = float(np.real(np.vdot(grad, m.w - trial)))
            if e1 <= e0 - 1e-4 * moved and e1 <= e0 and np.array_equal(row_windings(trial), wind):
                return m.with_values(trial), alpha
        alpha *= config.backtrack
    return m, 0.0


def relax(m: DiscreteMap, sweeps: int, omega: float) -> tuple[DiscreteMap, float]:
    """Projected red-black SOR; falls back toward omega = 1 if energy rises."""
    g = m.grid
    e0 = kernels.edge_energy(m.w, g.ax, g.at)
    wind = row_windings(m.w)
    while True:
        w = m.w.copy()
        kernels.sor_sweeps(w, g.ax, g.at, omega, 1.0, m.target_R, sweeps)
        e1 = kernels.edge_energy(w, g.ax, g.at)
        if e1 <= e0 and np.array_equal(row_windings(w), wind):
            return m.with_values(w), omega
        if omega <= 1.0:
            return m, omega
        omega = max(1.0, 1 + 0.5 * (omega - 1))


def default_omega(grid: PolarGrid) -> float:
    ax, at = grid.ax, grid.at
    rho = (2 * ax * math.cos(math.pi / (grid.n_radial - 1)) + 2 * at * math.cos(2 * math.pi / grid.n_angular)) / (2 * ax + 2 * at)
    return 2 / (1 + math.sqrt(1 - rho * rho))


# --------------------------------------------------------------- driver


def rotation_fit(w: np.ndarray, ref: np.ndarray) -> tuple[float, float]:
    """Rotation theta minimizing the RMS of w - e^{i theta} ref, and that RMS."""
    theta = float(np.angle(np.vdot(ref, w)))
    rms = float(np.sqrt(np.mean(np.abs(w - np.exp(1j * theta) * ref) ** 2)))
    return theta, rms


def active_mask(m: DiscreteMap, tol: float = 1e-6) -> np.ndarray:
    """Interior nodes pinned to the inner circle."""
    mask = np.abs(m.w) <= 1 + tol
    mask[0] = mask[-1] = False
    return mask


def active_fraction(m: DiscreteMap, tol: float = 1e-6) -> float:
    return float(active_mask(m, tol)[1:-1].mean())


def minimize(
    spec: ProblemSpec,
    grid: PolarGrid,
    config: Optional[OptimizerConfig] = None,
    init: Optional[DiscreteMap] = None,
    mode: str = "radial_interp",
    phase: float = 0.0,
) -> tuple[DiscreteMap, ConvergenceReport]:
    config = config or OptimizerConfig()
    m = init if init is not None else initialize(spec, grid, mode, seed=config.seed, phase=phase)
    tol_g = config.tol_grad or 1e-6 * math.sqrt(m.w.size)
    omega = config.omega or default_omega(grid)
    step = None
    phase_step = 1.0

    def energy(mm):
        return float(kernels.edge_energy(mm.w, grid.ax, grid.at))

    degrees = []

    def accept(mm):
        if config.check_degree:
            degrees.append(degree_estimate(mm))

    accept(m)
    E = energy(m)
    trace = [E]
    m = harmonic_interior_step(m)
    converged = False
    it = 0
    gnorm = float("nan")
    for it in range(1, config.max_iters + 1):
        m, omega = relax(m, config.sweeps, omega)
        m, taken = projected_gradient_step(m, config, step)
        step = taken * 2 if taken > 0 else None
        # both are energy-guarded, so they are safe to try with an active set
        m = harmonic_interior_step(m)
        if phase_step > 0 or it % 10 == 0:
            m, phase_step = boundary_phase_step(m, config, min(4.0, 2 * phase_step) if phase_step > 0 else 1.0)
        E_new = energy(m)
        accept(m)
        trace.append(E_new)
        gnorm = float(np.linalg.norm(projected_gradient(m, config.tol_projection)))
        dE = abs(E - E_new) / max(abs(E_new), 1e-300)
        E = E_new
        if dE < config.tol_energy and gnorm < tol_g:
            converged = True
            break
    oracle = energy_closed(spec).value
    measured = dirichlet_energy(m)
    report = ConvergenceReport(
        iterations=it,
        energy=measured,
        oracle_energy=oracle,
        gap_rel=(measured - oracle) / oracle,
        active_fraction=active_fraction(m, config.tol_projection),
        trace=trace,
        converged=converged,
        objective=E,
        grad_norm=gnorm,
        degrees=degrees,
    )
    log.info("minimize: %d iterations, energy %.10g (oracle %.10g), converged=%s", it, measured, oracle, converged)
    return m, report


def compare_to_minimizer(m: DiscreteMap, spec: ProblemSpec) -> tuple[float, float]:
    """Rotation-fitted RMS distance to the closed-form minimizer on the same grid."""
    ref = eval_minimizer(spec, m.grid.points())
    return rotation_fit(m.w, ref)


@dataclass
class SqueezeDiagnostics:
    band_nodes: int
    band_active_fraction: float
    band_jacobian: float
    exterior_jacobian: float

    @property
    def jacobian_ratio(self) -> float:
        return self.band_jacobian / self.exterior_jacobian


def squeeze_diagnostics(m: DiscreteMap, spec: ProblemSpec, tol: float = 1e-6) -> SqueezeDiagnostics:
    """Activity and mean |Jacobian| on the squeeze band rho < t < 1 versus the rest."""
    mz = minimizer(spec)
    if not isinstance(mz, Hybrid):
        raise ValueError("squeeze band only exists below the Nitsche bound")
    t = m.grid.t
    band = (t > mz.rho) & (t < 1)
    band[0] = band[-1] = False
    outside = ~band
    outside[0] = outside[-1] = False
    J = np.abs(jacobian(m))
    act = active_mask(m, tol)
    return SqueezeDiagnostics(
        band_nodes=int(band.sum() * m.grid.n_angular),
        band_active_fraction=float(act[band].mean()),
        band_jacobian=float(J[band].mean()),
        exterior_jacobian=float(J[outside].mean()),
    )
