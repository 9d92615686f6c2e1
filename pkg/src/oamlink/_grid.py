"""Sampling conventions shared by the lens and field modules.

Grids are node centred on the FFT layout: sample ``i`` of an axis with ``n``
points sits at ``(i - n // 2) * pitch``, so the optical axis falls exactly on
sample ``n // 2``.  Arrays are indexed ``[iy, ix]``.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError


def axis(n: int, pitch: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * pitch


def mesh(shape: tuple[int, int], pitch: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, Y)`` coordinate arrays for a grid of ``shape = (ny, nx)``."""
    ny, nx = shape
    return np.meshgrid(axis(nx, pitch), axis(ny, pitch), indexing="xy")


def radius(shape: tuple[int, int], pitch: float) -> np.ndarray:
    x, y = mesh(shape, pitch)
    return np.hypot(x, y)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def bilinear(samples: np.ndarray, pitch: float, x, y) -> np.ndarray:
    """Bilinear interpolation of ``samples`` at physical positions ``(x, y)``.

    Raises
    ------
    GeometryError
        If any position falls outside the sampled window.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ny, nx = samples.shape
    fx = x / pitch + nx // 2
    fy = y / pitch + ny // 2
    if np.any(fx < 0) or np.any(fx > nx - 1) or np.any(fy < 0) or np.any(fy > ny - 1):
        raise GeometryError("probe position lies outside the field window")
    ix = np.minimum(np.floor(fx).astype(int), nx - 2)
    iy = np.minimum(np.floor(fy).astype(int), ny - 2)
    tx = fx - ix
    ty = fy - iy
    s00 = samples[iy, ix]
    s01 = samples[iy, ix + 1]
    s10 = samples[iy + 1, ix]
    s11 = samples[iy + 1, ix + 1]
    # weights vanish exactly at the nodes, so node lookups are bit exact
    return (s00 * (1 - tx) + s01 * tx) * (1 - ty) + (s10 * (1 - tx) + s11 * tx) * ty
