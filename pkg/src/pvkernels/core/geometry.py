"""Voxelization, oriented-box tests and RoI grid points."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, ConfigurationError
from .types import Box3D, PointCloud, SparseVoxelSet, VoxelGridSpec, boxes_to_array


def _cell_size(spec: VoxelGridSpec) -> np.ndarray:
    return np.asarray(spec.voxel_size) * spec.stride


def voxel_assignment(coords: np.ndarray, spec: VoxelGridSpec):
    """Quantize points onto ``spec``.

    Returns ``(voxel_indices, inverse, keep)`` where ``voxel_indices`` holds the
    unique occupied voxels in lexicographic order, ``keep`` masks the in-range
    points and ``inverse`` maps every kept point to its voxel row.
    """
    coords = np.asarray(coords, dtype=np.float64)
    cell = _cell_size(spec)
    q = np.floor((coords - np.asarray(spec.origin)) / cell).astype(np.int64)
    extent = np.asarray(spec.extent, dtype=np.int64)
    keep = ((q >= 0) & (q < extent)).all(axis=1)
    q = q[keep]
    key = (q[:, 0] * extent[1] + q[:, 1]) * extent[2] + q[:, 2]
    ukeys, inverse = np.unique(key, return_inverse=True)
    k = ukeys.copy()
    vz = k % extent[2]
    k //= extent[2]
    vy = k % extent[1]
    vx = k // extent[1]
    return np.stack([vx, vy, vz], axis=1), inverse.reshape(-1), keep


def voxelize(points: PointCloud, spec: VoxelGridSpec) -> SparseVoxelSet:
    """Average point features into the occupied voxels of ``spec``.

    Points are assigned with ``floor((p - origin) / (voxel_size * stride))``;
    anything that falls outside ``[0, extent)`` is dropped.  Voxels come back
    in lexicographic index order.
    """
    if not isinstance(spec, VoxelGridSpec):
        raise ConfigurationError("spec must be a VoxelGridSpec")
    if len(points) == 0:
        raise ArgumentError("cannot voxelize an empty point cloud")
    vidx, inverse, keep = voxel_assignment(points.coords, spec)
    feats = points.features[keep]
    m = vidx.shape[0]
    counts = np.bincount(inverse, minlength=m).astype(np.float64)
    sums = np.zeros((m, feats.shape[1]))
    np.add.at(sums, inverse, feats)
    return SparseVoxelSet(vidx, sums / counts[:, None] if m else sums, spec)


def voxel_centers_metric(vset: SparseVoxelSet) -> np.ndarray:
    spec = vset.spec
    return np.asarray(spec.origin) + (vset.indices + 0.5) * _cell_size(spec)


def points_in_boxes(points, boxes) -> np.ndarray:
    """N x B containment mask; the box surface counts as inside."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    arr = boxes_to_array(boxes)
    out = np.zeros((pts.shape[0], arr.shape[0]), dtype=bool)
    for b, (cx, cy, cz, dx, dy, dz, yaw) in enumerate(arr):
        rx = pts[:, 0] - cx
        ry = pts[:, 1] - cy
        c, s = np.cos(yaw), np.sin(yaw)
        out[:, b] = (
            (np.abs(c * rx + s * ry) <= dx / 2.0)
            & (np.abs(-s * rx + c * ry) <= dy / 2.0)
            & (np.abs(pts[:, 2] - cz) <= dz / 2.0)
        )
    return out


def point_in_box(p, box: Box3D) -> bool:
    return bool(points_in_boxes(np.asarray(p, dtype=np.float64)[None], [box])[0, 0])


def box_grid_points(box: Box3D, grid=(6, 6, 6)) -> np.ndarray:
    """Cell centres of a ``gx x gy x gz`` lattice inside ``box``, x-major order."""
    gx, gy, gz = (int(g) for g in grid)
    if min(gx, gy, gz) < 1:
        raise ArgumentError(f"grid counts must be >= 1, got {grid}")
    ix, iy, iz = np.meshgrid(np.arange(gx), np.arange(gy), np.arange(gz), indexing="ij")
    local = np.stack(
        [
            ((ix.ravel() + 0.5) / gx - 0.5) * box.dx,
            ((iy.ravel() + 0.5) / gy - 0.5) * box.dy,
            ((iz.ravel() + 0.5) / gz - 0.5) * box.dz,
        ],
        axis=1,
    )
    c, s = np.cos(box.yaw), np.sin(box.yaw)
    out = np.empty_like(local)
    out[:, 0] = c * local[:, 0] - s * local[:, 1] + box.cx
    out[:, 1] = s * local[:, 0] + c * local[:, 1] + box.cy
    out[:, 2] = local[:, 2] + box.cz
    return out
