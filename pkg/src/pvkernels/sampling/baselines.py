"""Cheaper alternatives to full FPS used as comparison baselines."""

from __future__ import annotations

import numpy as np

from ..core.geometry import voxel_assignment
from ..core.types import VoxelGridSpec
from ..errors import ArgumentError
from .fps import KeypointSet, fps_indices
from .spc import grouped_fps, sector_quota


def _coords(points) -> np.ndarray:
    return np.ascontiguousarray(getattr(points, "coords", points), dtype=np.float64)


def _check_n(n: int, N: int) -> None:
    if not 1 <= n <= N:
        raise ArgumentError(f"cannot pick n={n} points from a cloud of {N}")


def random_sample(points, n: int, seed: int = 0) -> KeypointSet:
    coords = _coords(points)
    _check_n(n, coords.shape[0])
    idx = np.random.default_rng(seed).choice(coords.shape[0], size=n, replace=False)
    return KeypointSet.from_indices(coords, idx)


def _voxel_fps(coords, n, voxel_size):
    spec = VoxelGridSpec.covering(coords, voxel_size)
    vidx, inverse, _ = voxel_assignment(coords, spec)
    if n > vidx.shape[0]:
        raise ArgumentError(f"cannot pick n={n} keypoints from {vidx.shape[0]} occupied voxels")
    centers = np.asarray(spec.origin) + (vidx + 0.5) * np.asarray(spec.voxel_size)
    return centers, inverse, fps_indices(centers, n, 0)


def voxelized_fps_voxel(points, n: int, voxel_size=0.2) -> KeypointSet:
    """FPS over occupied voxel centres; the keypoints are the centres themselves."""
    coords = _coords(points)
    _check_n(n, coords.shape[0])
    centers, _, picks = _voxel_fps(coords, n, voxel_size)
    return KeypointSet(np.full(n, -1, np.int64), centers[picks])


def voxelized_fps_point(points, n: int, voxel_size=0.2, seed: int = 0) -> KeypointSet:
    """FPS over voxel centres, then one seeded-random raw point per picked voxel."""
    coords = _coords(points)
    _check_n(n, coords.shape[0])
    _, inverse, picks = _voxel_fps(coords, n, voxel_size)
    order = np.argsort(inverse, kind="stable")
    starts = np.searchsorted(inverse[order], np.arange(inverse.max() + 2))
    rng = np.random.default_rng(seed)
    chosen = np.empty(n, np.int64)
    for k, v in enumerate(picks):
        members = order[starts[v]:starts[v + 1]]
        chosen[k] = members[rng.integers(members.size)]
    return KeypointSet.from_indices(coords, chosen)


def random_parallel_fps(points, n: int, groups: int = 6, seed: int = 0,
                        workers: int = 1) -> KeypointSet:
    """Random split into ``groups`` balanced groups, FPS inside each with a proportional quota."""
    coords = _coords(points)
    _check_n(n, coords.shape[0])
    if groups < 1:
        raise ArgumentError(f"group count must be >= 1, got {groups}")
    perm = np.random.default_rng(seed).permutation(coords.shape[0])
    parts = [np.sort(g) for g in np.array_split(perm, groups)]
    quotas = sector_quota([len(g) for g in parts], n)
    return KeypointSet.from_indices(coords, grouped_fps(coords, parts, quotas, workers))
