from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class BevMap:
    """Bird's-eye-view feature map: ``values[ix, iy, c]``.

    Cell ``(ix, iy)`` has its centre at ``origin + (ix + 0.5, iy + 0.5) * cell_size``.
    """

    values: np.ndarray
    cell_size: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ConfigurationError(f"BEV values must be W x L x C, got {v.shape}")
        if not np.isfinite(v).all():
            raise ConfigurationError("BEV map has non-finite values")
        if not self.cell_size > 0:
            raise ConfigurationError(f"cell size must be positive, got {self.cell_size}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @property
    def channels(self) -> int:
        return self.values.shape[2]

    def to_grid(self, xy) -> np.ndarray:
        """Continuous cell coordinates; integer values land on cell centres."""
        xy = np.asarray(xy, dtype=np.float64)
        return (xy - np.asarray(self.origin)) / self.cell_size - 0.5


def _axis(u, n):
    u = np.clip(u, 0.0, n - 1)
    i0 = np.minimum(np.floor(u).astype(np.int64), max(n - 2, 0))
    t = u - i0
    i1 = np.minimum(i0 + 1, n - 1)
    return i0, i1, t


def bev_bilinear(bev: BevMap, xy) -> np.ndarray:
    """Bilinear lookup at metric ``xy`` (shape ``(2,)`` or ``(K, 2)``).

    Queries beyond the outermost cell centres are clamped onto them.
    """
    xy = np.asarray(xy, dtype=np.float64)
    single = xy.ndim == 1
    g = bev.to_grid(xy.reshape(-1, 2))
    nx, ny = bev.values.shape[:2]
    x0, x1, tx = _axis(g[:, 0], nx)
    y0, y1, ty = _axis(g[:, 1], ny)
    v = bev.values
    tx = tx[:, None]
    ty = ty[:, None]
    out = (
        v[x0, y0] * (1 - tx) * (1 - ty)
        + v[x1, y0] * tx * (1 - ty)
        + v[x0, y1] * (1 - tx) * ty
        + v[x1, y1] * tx * ty
    )
    return out[0] if single else out
