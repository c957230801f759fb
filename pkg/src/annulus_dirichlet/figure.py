"""SVG picture of the image of a polar coordinate grid under a sampled map."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .polargrid import DiscreteMap


def _polyline(pts: np.ndarray, scale: float, half: float, closed: bool, style: str) -> str:
    xy = " ".join(f"{half + scale * p.real:.3f},{half - scale * p.imag:.3f}" for p in pts)
    tag = "polygon" if closed else "polyline"
    return f'<{tag} points="{xy}" {style}/>'


def grid_lines(m: DiscreteMap, n_rings: Optional[int] = None, n_rays: Optional[int] = None):
    """Row and column indices drawn as rings and rays (defaults n_r/8 and n_t/16)."""
    nr, nt = m.w.shape
    n_rings = max(2, n_rings or nr // 8)
    n_rays = max(1, n_rays or nt // 16)
    rows = np.unique(np.round(np.linspace(0, nr - 1, n_rings)).astype(int))
    cols = np.unique(np.round(np.arange(n_rays) * nt / n_rays).astype(int))
    return rows, cols


def render_svg(m: DiscreteMap, n_rings: Optional[int] = None, n_rays: Optional[int] = None, size: int = 600, title: str = "") -> str:
    rows, cols = grid_lines(m, n_rings, n_rays)
    half = size / 2
    extent = max(float(np.max(np.abs(m.w))), m.target_R, 1.0)
    scale = 0.92 * half / extent
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(f"<title>{title}</title>")
    for rad in sorted({1.0, float(m.target_R)}):
        parts.append(f'<circle cx="{half}" cy="{half}" r="{scale * rad:.3f}" fill="none" stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    ray_style = 'fill="none" stroke="#c0392b" stroke-width="0.8"'
    for k in cols:
        parts.append(_polyline(m.w[:, k], scale, half, False, ray_style))
    ring_style = 'fill="none" stroke="#1f4e79" stroke-width="0.8"'
    for i in rows:
        parts.append(_polyline(m.w[i], scale, half, True, ring_style))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
