"""Reading and writing sampled maps.

Two formats:

* CSV with header ``t,tau,u,v``, one row per node in radial-major order;
* binary: little-endian float64, a 6-value header
  ``(n_radial, n_angular, t_min, t_max, R, j)`` followed by ``u, v`` pairs
  in the same node order.

CSV files carry no target radius or degree, so readers must supply them.
"""

from __future__ import annotations

import io
import os
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .polargrid import DiscreteMap, PolarGrid

PathLike = Union[str, os.PathLike]

CSV_HEADER = "t,tau,u,v"
_LE = np.dtype("<f8")


class MapFormatError(ValueError):
    pass


def to_csv(m: DiscreteMap) -> str:
    g = m.grid
    t = np.repeat(g.t, g.n_angular)
    tau = np.tile(g.tau, g.n_radial)
    w = m.w.ravel()
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack([t, tau, w.real, w.imag]), fmt="%.17g", delimiter=",", header=CSV_HEADER, comments="")
    return buf.getvalue()


def from_csv(text: str, target_R: float, j: int) -> DiscreteMap:
    lines = text.lstrip().splitlines()
    if not lines or lines[0].strip().replace(" ", "") != CSV_HEADER:
        raise MapFormatError(f"expected CSV header {CSV_HEADER!r}")
    try:
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise MapFormatError(f"malformed CSV body: {exc}") from exc
    if data.shape[1] != 4:
        raise MapFormatError("expected four columns")
    t_vals = np.unique(data[:, 0])
    n_r = len(t_vals)
    if n_r < 3 or data.shape[0] % n_r:
        raise MapFormatError("node count is not a radial x angular product")
    n_t = data.shape[0] // n_r
    grid = PolarGrid(float(data[0, 0]), float(data[-1, 0]), n_r, n_t)
    t = data[:, 0].reshape(n_r, n_t)
    if not np.allclose(t, grid.t[:, None], rtol=1e-12, atol=0):
        raise MapFormatError("rows are not in radial-major order on a log-spaced grid")
    w = (data[:, 2] + 1j * data[:, 3]).reshape(n_r, n_t)
    return DiscreteMap(grid, w, float(target_R), int(j))


def to_bytes(m: DiscreteMap) -> bytes:
    g = m.grid
    head = np.array([g.n_radial, g.n_angular, g.t_min, g.t_max, m.target_R, m.j], dtype=_LE)
    body = np.empty(2 * m.w.size, dtype=_LE)
    body[0::2] = m.w.real.ravel()
    body[1::2] = m.w.imag.ravel()
    return head.tobytes() + body.tobytes()


def from_bytes(raw: bytes) -> DiscreteMap:
    if len(raw) < 48 or len(raw) % 8:
        raise MapFormatError("binary map is truncated")
    data = np.frombuffer(raw, dtype=_LE)
    n_r, n_t, t_min, t_max, R, j = data[:6]
    if n_r != int(n_r) or n_t != int(n_t) or j != int(j):
        raise MapFormatError("non-integer dimensions in binary header")
    n_r, n_t = int(n_r), int(n_t)
    if data.size != 6 + 2 * n_r * n_t:
        raise MapFormatError(f"expected {n_r}x{n_t} nodes, found {(data.size - 6) / 2:g}")
    grid = PolarGrid(float(t_min), float(t_max), n_r, n_t)
    body = data[6:]
    w = (body[0::2] + 1j * body[1::2]).reshape(n_r, n_t)
    return DiscreteMap(grid, w, float(R), int(j))


def save_map(m: DiscreteMap, path: PathLike, fmt: Optional[str] = None) -> Path:
    """Write ``m`` as CSV or binary; the format defaults from the suffix."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "bin")
    if fmt == "csv":
        path.write_text(to_csv(m))
    elif fmt == "bin":
        path.write_bytes(to_bytes(m))
    else:
        raise ValueError(f"unknown map format {fmt!r}")
    return path


def load_map(path: PathLike, target_R: Optional[float] = None, j: Optional[int] = None) -> DiscreteMap:
    """Read a map, sniffing CSV by its header.

    For binary files, ``target_R`` and ``j`` (if given) must agree with the header.
    """
    raw = Path(path).read_bytes()
    if raw.lstrip()[: len(CSV_HEADER)] == CSV_HEADER.encode():
        if target_R is None or j is None:
            raise MapFormatError("CSV maps need the target radius and degree from the caller")
        return from_csv(raw.decode(), target_R, j)
    m = from_bytes(raw)
    if target_R is not None and not np.isclose(m.target_R, target_R, rtol=1e-12):
        raise MapFormatError(f"map targets R={m.target_R}, problem has R={target_R}")
    if j is not None and m.j != j:
        raise MapFormatError(f"map has degree {m.j}, problem has j={j}")
    return m
