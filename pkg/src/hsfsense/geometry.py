"""Cell-grid geometry, binary configurations, the sensing mask and interleaving.

Configurations are plain ``numpy`` arrays of dtype ``uint8`` holding 0/1.
Indices in docstrings are 1-based (row ``i``, column ``j``); arrays are
0-based internally, so "i even" maps to ``row % 2 == 1``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class CellGrid:
    """Square ``n x n`` lattice of cells in the z=0 plane, centered at the origin."""

    n: int
    cell_pitch: float = 0.01

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 2, got {self.n!r}")
        if not self.cell_pitch > 0:
            raise ValueError(f"cell_pitch must be positive, got {self.cell_pitch!r}")

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def side_length(self) -> float:
        return self.n * self.cell_pitch

    def cell_positions(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(x, y)`` arrays of shape ``(n, n)`` with the cell centers in meters.

        Cell ``(i, j)`` sits at ``((j - (n+1)/2) * pitch, ((n+1)/2 - i) * pitch, 0)``.
        """
        k = np.arange(1, self.n + 1, dtype=float)
        center = (self.n + 1) / 2
        x = np.broadcast_to((k - center) * self.cell_pitch, (self.n, self.n))
        y = np.broadcast_to(((center - k) * self.cell_pitch)[:, None], (self.n, self.n))
        return x.copy(), y.copy()


@dataclass(frozen=True)
class SphericalDirection:
    """Direction (and optionally a point) above the surface.

    ``phi`` is the polar angle from the surface normal (+z), ``theta`` the
    azimuth in the surface plane measured from +x. Both in degrees.
    """

    phi: float
    theta: float
    R: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.theta)):
            raise ValueError("phi and theta must be finite")
        if self.R is not None and not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R!r}")

    def unit_vector(self) -> np.ndarray:
        p, t = math.radians(self.phi), math.radians(self.theta)
        return np.array([math.sin(p) * math.cos(t), math.sin(p) * math.sin(t), math.cos(p)])

    def position(self) -> np.ndarray:
        if self.R is None:
            raise ValueError("direction has no radius; cannot form a position")
        return self.R * self.unit_vector()


def angular_distance(a: SphericalDirection, b: SphericalDirection) -> float:
    """Great-circle angle between two directions, in degrees."""
    cosang = float(np.clip(a.unit_vector() @ b.unit_vector(), -1.0, 1.0))
    return math.degrees(math.acos(cosang))


def _side(grid_or_n) -> int:
    n = grid_or_n.n if isinstance(grid_or_n, CellGrid) else grid_or_n
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f"grid side must be an even integer >= 2, got {n!r}")
    return int(n)


def check_bits(bits, shape: tuple[int, ...] | None = None, name: str = "configuration", ndim: int = 2) -> np.ndarray:
    """Validate a 0/1 array and return it as ``uint8``."""
    arr = np.asarray(bits)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if arr.dtype == np.uint8 or arr.dtype == np.bool_:
        if arr.size and arr.max() > 1:
            raise ValueError(f"{name} entries must be 0 or 1")
        return arr.astype(np.uint8, copy=False)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} entries must be 0 or 1")
    return arr.astype(np.uint8)


def make_mask(grid) -> np.ndarray:
    """Sensing mask: 1 exactly where both (1-based) row and column are even."""
    n = _side(grid)
    mask = np.zeros((n, n), dtype=np.uint8)
    mask[1::2, 1::2] = 1
    return mask


def interleave(c_f, c_s) -> np.ndarray:
    """Write the ``m x m`` sensing bits into the mask positions of ``c_f``.

    Mask positions are visited in row-major order and receive ``c_s`` in
    row-major order. A stack of sensing patterns ``(k, m, m)`` yields a
    stack of ``k`` configurations. The inputs are left untouched.
    """
    c_f = check_bits(c_f, name="c_f")
    n = c_f.shape[0]
    if c_f.shape[1] != n or n % 2:
        raise ValueError(f"c_f must be square with even side, got shape {c_f.shape}")
    c_s = np.asarray(c_s)
    stacked = c_s.ndim == 3
    c_s = check_bits(c_s, c_s.shape[:-2] + (n // 2, n // 2), name="c_s", ndim=3 if stacked else 2)
    out = np.broadcast_to(c_f, c_s.shape[:-2] + (n, n)).copy()
    out[..., 1::2, 1::2] = c_s
    return out


def extract(config) -> np.ndarray:
    """Read the mask positions of an ``n x n`` configuration as an ``m x m`` array."""
    arr = np.asarray(config)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
        raise ValueError(f"expected a square array with even side, got shape {arr.shape}")
    return arr[1::2, 1::2].copy()


def reshape(v, m: int) -> np.ndarray:
    """Split a length ``m*m`` vector into ``m`` consecutive rows.

    A 2-D input is treated as a stack of vectors, one per row.
    """
    v = np.asarray(v)
    if v.ndim not in (1, 2) or v.shape[-1] != m * m:
        raise ValueError(f"vector of length {v.shape[-1] if v.ndim else 0} cannot be reshaped to {m}x{m}")
    return v.reshape(v.shape[:-1] + (m, m)).copy()


def flatten(a) -> np.ndarray:
    """Inverse of :func:`reshape`: concatenate the rows."""
    return np.asarray(a).reshape(-1).copy()


def config_to_csv(bits) -> str:
    bits = check_bits(bits)
    return "".join(",".join(str(int(b)) for b in row) + "\n" for row in bits)


def config_from_csv(text: str) -> np.ndarray:
    rows = [line.strip() for line in io.StringIO(text) if line.strip()]
    if not rows:
        raise ValueError("empty configuration CSV")
    data = [[int(tok) for tok in row.split(",")] for row in rows]
    if len({len(r) for r in data}) != 1:
        raise ValueError("ragged configuration CSV")
    return check_bits(np.array(data))


def write_config_csv(path, bits) -> None:
    Path(path).write_text(config_to_csv(bits), encoding="utf-8", newline="\n")


def read_config_csv(path) -> np.ndarray:
    return config_from_csv(Path(path).read_text(encoding="utf-8"))
