from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _accel
from .._accel import njit
from ..errors import ArgumentError


@dataclass(frozen=True, eq=False)
class KeypointSet:
    """Sampled keypoints.

    ``indices`` point into the source cloud; ``-1`` marks synthetic keypoints
    (voxel centres) that have no source point.
    """

    indices: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        xyz = np.asarray(self.coords, dtype=np.float64).reshape(-1, 3)
        if idx.shape[0] != xyz.shape[0]:
            raise ArgumentError("indices and coords disagree on the keypoint count")
        idx.setflags(write=False)
        xyz.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coords", xyz)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @classmethod
    def from_indices(cls, coords: np.ndarray, indices) -> "KeypointSet":
        indices = np.asarray(indices, dtype=np.int64)
        return cls(indices, np.asarray(coords)[indices])


@njit
def _fps_kernel(xyz, n, start):
    N = xyz.shape[0]
    out = np.empty(n, np.int64)
    mind = np.full(N, np.inf)
    cur = start
    for k in range(n):
        out[k] = cur
        mind[cur] = -1.0
        px = xyz[cur, 0]
        py = xyz[cur, 1]
        pz = xyz[cur, 2]
        best = -1
        bestd = -1.0
        for i in range(N):
            m = mind[i]
            if m < 0.0:
                continue
            dx = xyz[i, 0] - px
            dy = xyz[i, 1] - py
            dz = xyz[i, 2] - pz
            d = dx * dx + dy * dy + dz * dz
            if d < m:
                m = d
                mind[i] = d
            if m > bestd:
                bestd = m
                best = i
        cur = best
    return out


def _fps_numpy(xyz, n, start):
    N = xyz.shape[0]
    out = np.empty(n, np.int64)
    mind = np.full(N, np.inf)
    cur = start
    for k in range(n):
        out[k] = cur
        mind[cur] = -1.0
        if k == n - 1:
            break
        d = xyz - xyz[cur]
        d = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2]
        np.minimum(mind, d, out=mind, where=mind >= 0.0)
        cur = int(np.argmax(mind))
    return out


def fps_indices(xyz: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    """Greedy max-min selection over an ``N x 3`` array; returns indices in pick order."""
    xyz = np.ascontiguousarray(xyz, dtype=np.float64)
    N = xyz.shape[0]
    if not 1 <= n <= N:
        raise ArgumentError(f"cannot pick n={n} points from a cloud of {N}")
    if not 0 <= start < N:
        raise ArgumentError(f"start index {start} outside [0, {N})")
    if _accel.use_numba():
        return _fps_kernel(xyz, int(n), int(start))
    return _fps_numpy(xyz, int(n), int(start))


def farthest_point_sampling(points, n: int, start_index: int = 0, random_start: bool = False,
                            seed: int = 0) -> KeypointSet:
    """Farthest point sampling.

    The first pick is ``start_index`` (or a seeded random index when
    ``random_start``); each later pick maximises the minimum distance to the
    picks so far, ties going to the lowest index.

    Parameters
    ----------
    points : PointCloud or array_like
        Source cloud, or a bare ``N x 3`` coordinate array.
    n : int
        Number of keypoints, ``1 <= n <= N``.
    """
    coords = getattr(points, "coords", points)
    coords = np.asarray(coords, dtype=np.float64)
    if random_start:
        start_index = int(np.random.default_rng(seed).integers(coords.shape[0]))
    return KeypointSet.from_indices(coords, fps_indices(coords, n, start_index))
