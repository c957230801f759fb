"""Stencil kernels on log-polar grids.

Arrays are complex ``(n_radial, n_angular)`` with the angular axis periodic.
In log-polar coordinates x = log t the Dirichlet energy is the flat one,
so the discrete energy is a sum over grid edges:

    E_h = ax * sum |w[i+1,k] - w[i,k]|^2 + at * sum c_i |w[i,k+1] - w[i,k]|^2

with ax = h_tau / h_x, at = h_x / h_tau and trapezoid weights c_0 = c_{n-1} = 1/2.

Every kernel has a numpy implementation (``*_np``) and a numba one
(``*_nb``); the unsuffixed name is bound to whichever backend is active.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


def _row_weights(nr):
    c = np.ones(nr)
    c[0] = c[-1] = 0.5
    return c


# ---------------------------------------------------------------- energy


def edge_energy_np(w, ax, at):
    dr = w[1:] - w[:-1]
    dt = np.roll(w, -1, axis=1) - w
    c = _row_weights(w.shape[0])
    return ax * np.sum(dr.real**2 + dr.imag**2) + at * np.sum(c[:, None] * (dt.real**2 + dt.imag**2))


@njit
def edge_energy_nb(w, ax, at):
    nr, nt = w.shape
    er = 0.0
    for i in range(nr - 1):
        for k in range(nt):
            d = w[i + 1, k] - w[i, k]
            er += d.real * d.real + d.imag * d.imag
    ea = 0.0
    for i in range(nr):
        ci = 0.5 if (i == 0 or i == nr - 1) else 1.0
        s = 0.0
        for k in range(nt):
            d = w[i, (k + 1) % nt] - w[i, k]
            s += d.real * d.real + d.imag * d.imag
        ea += ci * s
    return ax * er + at * ea


def edge_gradient_np(w, ax, at):
    """Gradient of ``edge_energy`` as a complex field (d/dRe + i d/dIm)."""
    g = np.zeros_like(w)
    d = w[1:] - w[:-1]
    g[1:] += d
    g[:-1] -= d
    g *= ax
    c = _row_weights(w.shape[0])[:, None]
    lap = 2 * w - np.roll(w, 1, axis=1) - np.roll(w, -1, axis=1)
    g += at * c * lap
    return 2 * g


@njit
def edge_gradient_nb(w, ax, at):
    nr, nt = w.shape
    g = np.empty_like(w)
    for i in range(nr):
        ci = 0.5 if (i == 0 or i == nr - 1) else 1.0
        for k in range(nt):
            v = w[i, k]
            acc = at * ci * (2 * v - w[i, (k - 1) % nt] - w[i, (k + 1) % nt])
            if i > 0:
                acc += ax * (v - w[i - 1, k])
            if i < nr - 1:
                acc += ax * (v - w[i + 1, k])
            g[i, k] = 2 * acc
    return g


# ---------------------------------------------------------- projected SOR


def _project_np(v, lo, hi, rows):
    """Radial projection onto the shell lo <= |v| <= hi (circles on boundary rows)."""
    m = np.abs(v)
    safe = np.where(m == 0, 1.0, m)
    target = np.clip(m, lo, hi)
    target = np.where(rows == 0, lo, target)
    target = np.where(rows == -1, hi, target)
    return np.where(m == 0, np.nan, v * (target / safe))


def sor_sweeps_np(w, ax, at, omega, lo, hi, n_sweeps):
    """Red-black projected SOR, in place.  Returns the number of rejected node updates."""
    nr, nt = w.shape
    c = _row_weights(nr)[:, None]
    diag = np.full((nr, 1), 2 * ax)
    diag[0] = diag[-1] = ax
    diag = diag + 2 * at * c
    ii, kk = np.indices(w.shape)
    rows = np.zeros(w.shape, dtype=int) + 1
    rows[0] = 0
    rows[-1] = -1
    masks = [((ii + kk) % 2) == col for col in (0, 1)]
    rejected = 0
    for _ in range(n_sweeps):
        for mask in masks:
            nb = at * c * (np.roll(w, 1, axis=1) + np.roll(w, -1, axis=1))
            nb[1:] += ax * w[:-1]
            nb[:-1] += ax * w[1:]
            star = nb / diag
            cand = _project_np(w + omega * (star - w), lo, hi, rows)
            bad = np.isnan(cand.real)
            upd = mask & ~bad
            rejected += int(np.count_nonzero(mask & bad))
            w[upd] = cand[upd]
    return rejected


@njit
def sor_sweeps_nb(w, ax, at, omega, lo, hi, n_sweeps):
    nr, nt = w.shape
    rejected = 0
    for _ in range(n_sweeps):
        for col in range(2):
            for i in range(nr):
                edge = i == 0 or i == nr - 1
                ci = 0.5 if edge else 1.0
                d = (ax if edge else 2 * ax) + 2 * at * ci
                k0 = (col + i) % 2
                for k in range(k0, nt, 2):
                    acc = at * ci * (w[i, (k - 1) % nt] + w[i, (k + 1) % nt])
                    if i > 0:
                        acc += ax * w[i - 1, k]
                    if i < nr - 1:
                        acc += ax * w[i + 1, k]
                    v = w[i, k] + omega * (acc / d - w[i, k])
                    m = abs(v)
                    if m == 0.0:
                        rejected += 1
                        continue
                    if i == 0:
                        tgt = lo
                    elif i == nr - 1:
                        tgt = hi
                    else:
                        tgt = min(max(m, lo), hi)
                    w[i, k] = v * (tgt / m)
    return rejected


# ----------------------------------------------------------------- degree


def _triangles(w):
    """Vertices (a, b, c) of the two positively oriented triangles per grid cell."""
    p00 = w[:-1]
    p10 = w[1:]
    p11 = np.roll(w, -1, axis=1)[1:]
    p01 = np.roll(w, -1, axis=1)[:-1]
    a = np.concatenate([p00.ravel(), p00.ravel()])
    b = np.concatenate([p10.ravel(), p11.ravel()])
    c = np.concatenate([p11.ravel(), p01.ravel()])
    return a, b, c


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def preimage_count_np(w, ys, area_tol):
    """Signed count of image triangles containing each y.

    Returns ``(counts, flagged)``; ``flagged[n]`` is True when y_n lies on a
    triangle edge or inside a near-degenerate triangle and must be resampled.
    """
    a, b, c = _triangles(w)
    area = 0.5 * _cross(b - a, c - a)
    counts = np.zeros(len(ys), dtype=np.int64)
    flagged = np.zeros(len(ys), dtype=bool)
    for n, y in enumerate(ys):
        e1 = _cross(b - a, y - a)
        e2 = _cross(c - b, y - b)
        e3 = _cross(a - c, y - c)
        inside_pos = (e1 > 0) & (e2 > 0) & (e3 > 0)
        inside_neg = (e1 < 0) & (e2 < 0) & (e3 < 0)
        touching = ((e1 == 0) | (e2 == 0) | (e3 == 0)) & (
            (e1 >= 0) & (e2 >= 0) & (e3 >= 0) | (e1 <= 0) & (e2 <= 0) & (e3 <= 0)
        )
        hit = inside_pos | inside_neg
        if np.any(touching) or np.any(hit & (np.abs(area) < area_tol)):
            flagged[n] = True
        counts[n] = int(np.count_nonzero(inside_pos)) - int(np.count_nonzero(inside_neg))
    return counts, flagged


@njit
def _cross_nb(ux, uy, vx, vy):
    return ux * vy - uy * vx


@njit
def preimage_count_nb(w, ys, area_tol):
    nr, nt = w.shape
    ny = ys.shape[0]
    counts = np.zeros(ny, dtype=np.int64)
    flagged = np.zeros(ny, dtype=np.bool_)
    for n in range(ny):
        yx, yy = ys[n].real, ys[n].imag
        cnt = 0
        flag = False
        for i in range(nr - 1):
            for k in range(nt):
                kp = (k + 1) % nt
                for tri in range(2):
                    a = w[i, k]
                    if tri == 0:
                        b = w[i + 1, k]
                        c = w[i + 1, kp]
                    else:
                        b = w[i + 1, kp]
                        c = w[i, kp]
                    e1 = _cross_nb(b.real - a.real, b.imag - a.imag, yx - a.real, yy - a.imag)
                    e2 = _cross_nb(c.real - b.real, c.imag - b.imag, yx - b.real, yy - b.imag)
                    e3 = _cross_nb(a.real - c.real, a.imag - c.imag, yx - c.real, yy - c.imag)
                    pos = e1 >= 0 and e2 >= 0 and e3 >= 0
                    neg = e1 <= 0 and e2 <= 0 and e3 <= 0
                    if not (pos or neg):
                        continue
                    if e1 == 0 or e2 == 0 or e3 == 0:
                        flag = True
                        continue
                    area = 0.5 * _cross_nb(b.real - a.real, b.imag - a.imag, c.real - a.real, c.imag - a.imag)
                    if abs(area) < area_tol:
                        flag = True
                    cnt += 1 if pos else -1
        counts[n] = cnt
        flagged[n] = flag
    return counts, flagged


if USE_NUMBA:
    edge_energy = edge_energy_nb
    edge_gradient = edge_gradient_nb
    sor_sweeps = sor_sweeps_nb
    preimage_count = preimage_count_nb
else:
    edge_energy = edge_energy_np
    edge_gradient = edge_gradient_np
    sor_sweeps = sor_sweeps_np
    preimage_count = preimage_count_np

BACKEND = "numba" if USE_NUMBA else "numpy"
