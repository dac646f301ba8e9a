"""Sectorized proposal-centric keypoint sampling."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import _accel
from .._accel import njit
from ..core.types import boxes_to_array
from ..errors import ArgumentError
from .fps import KeypointSet, fps_indices


@njit
def _filter_kernel(xyz, centers, radii2):
    n = xyz.shape[0]
    keep = np.zeros(n, np.bool_)
    for i in range(n):
        for j in range(centers.shape[0]):
            dx = xyz[i, 0] - centers[j, 0]
            dy = xyz[i, 1] - centers[j, 1]
            dz = xyz[i, 2] - centers[j, 2]
            if dx * dx + dy * dy + dz * dz < radii2[j]:
                keep[i] = True
                break
    return keep


def proposal_centric_mask(coords, boxes, r_s: float) -> np.ndarray:
    if r_s < 0:
        raise ArgumentError(f"extend radius must be >= 0, got {r_s}")
    xyz = np.ascontiguousarray(getattr(coords, "coords", coords), dtype=np.float64)
    arr = boxes_to_array(boxes)
    if arr.shape[0] == 0:
        return np.zeros(xyz.shape[0], bool)
    centers = np.ascontiguousarray(arr[:, :3])
    radii = arr[:, 3:6].max(axis=1) / 2.0 + r_s
    radii2 = radii * radii
    if _accel.use_numba():
        return _filter_kernel(xyz, centers, radii2)
    keep = np.zeros(xyz.shape[0], bool)
    for c, rr in zip(centers, radii2):
        d = xyz - c
        keep |= d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2] < rr
    return keep


def proposal_centric_filter(points, boxes, r_s: float) -> np.ndarray:
    """Ascending indices of points within ``max(dims)/2 + r_s`` of some box centre."""
    return np.flatnonzero(proposal_centric_mask(points, boxes, r_s))


def sector_ids(coords, s: int, scene_center=(0.0, 0.0)) -> np.ndarray:
    if s < 1:
        raise ArgumentError(f"sector count must be >= 1, got {s}")
    xyz = np.asarray(getattr(coords, "coords", coords), dtype=np.float64)
    px = xyz[:, 0] - scene_center[0]
    py = xyz[:, 1] - scene_center[1]
    sid = np.floor((np.arctan2(py, px) + math.pi) * s / (2.0 * math.pi)).astype(np.int64)
    return np.clip(sid, 0, s - 1)


def sector_partition(points, s: int, scene_center=(0.0, 0.0)) -> list[np.ndarray]:
    """Split point indices into ``s`` angular sectors about ``scene_center``.

    Sector ``k`` holds angles in ``[-pi + 2 pi k / s, -pi + 2 pi (k+1) / s)``;
    the angle ``pi`` itself folds into the last sector.
    """
    sid = sector_ids(points, s, scene_center)
    order = np.argsort(sid, kind="stable")
    bounds = np.searchsorted(sid[order], np.arange(s + 1))
    return [order[bounds[k]:bounds[k + 1]] for k in range(s)]


def sector_quota(sector_sizes, n: int) -> list[int]:
    """Per-sector keypoint budget summing to ``n``.

    Each sector first gets ``floor(size / total * n)``; the remainder goes one
    at a time to the largest sectors (lower index on ties) with spare points.
    """
    sizes = [int(v) for v in sector_sizes]
    total = sum(sizes)
    if n < 0 or total < n:
        raise ArgumentError(f"cannot draw {n} keypoints from {total} points")
    if total == 0:
        return [0] * len(sizes)
    quota = [min(size * n // total, size) for size in sizes]
    remainder = n - sum(quota)
    by_size = sorted(range(len(sizes)), key=lambda k: (-sizes[k], k))
    while remainder:
        for k in by_size:
            if remainder and quota[k] < sizes[k]:
                quota[k] += 1
                remainder -= 1
    return quota


def grouped_fps(coords: np.ndarray, groups, quotas, workers: int = 1) -> np.ndarray:
    """Independent FPS inside each index group; results concatenated in group order.

    Every group starts from its lowest local index.  Worker count only affects
    scheduling, never the picks.
    """
    tasks = [(g, q) for g, q in zip(groups, quotas) if q > 0]

    def run(task):
        g, q = task
        return g[fps_indices(coords[g], q, 0)]

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            parts = list(ex.map(run, tasks))
    else:
        parts = [run(t) for t in tasks]
    return np.concatenate(parts) if parts else np.zeros(0, np.int64)


def sectorized_fps(coords: np.ndarray, n: int, s: int, scene_center=(0.0, 0.0),
                   workers: int = 1) -> np.ndarray:
    """Sector partition, proportional quota and per-sector FPS over ``coords``."""
    sectors = sector_partition(coords, s, scene_center)
    quotas = sector_quota([len(g) for g in sectors], n)
    return grouped_fps(coords, sectors, quotas, workers)


def sectorized_proposal_centric_sample(points, boxes, cfg, workers: int = 1) -> KeypointSet:
    """Proposal-centric filter followed by sectorized FPS.

    When the filter keeps fewer than ``cfg.n`` points, all of them are taken and
    the shortfall is topped up by FPS over the remaining (unfiltered) points.
    """
    coords = np.ascontiguousarray(getattr(points, "coords", points), dtype=np.float64)
    N = coords.shape[0]
    if N == 0:
        raise ArgumentError("cannot sample from an empty cloud")
    if not 1 <= cfg.n <= N:
        raise ArgumentError(f"cannot pick n={cfg.n} points from a cloud of {N}")
    kept = proposal_centric_filter(coords, boxes, cfg.extend_radius) if cfg.pc_filter \
        else np.arange(N)
    if kept.size >= cfg.n:
        local = sectorized_fps(coords[kept], cfg.n, cfg.sectors, cfg.scene_center, workers)
        return KeypointSet.from_indices(coords, kept[local])
    rest = np.setdiff1d(np.arange(N), kept, assume_unique=True)
    extra = rest[fps_indices(coords[rest], cfg.n - kept.size, 0)]
    return KeypointSet.from_indices(coords, np.concatenate([kept, extra]))
