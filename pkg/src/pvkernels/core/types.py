from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, ConfigurationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def normalize_yaw(yaw: float) -> float:
    """Map an angle into (-pi, pi]."""
    y = math.remainder(float(yaw), 2.0 * math.pi)
    if y <= -math.pi:
        y += 2.0 * math.pi
    return y


@dataclass(frozen=True, eq=False)
class PointCloud:
    """N points with metric coordinates and C per-point feature channels.

    Arrays are stored as read-only float64 copies.
    """

    coords: np.ndarray
    features: np.ndarray = None

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ArgumentError(f"coords must be N x 3, got shape {coords.shape}")
        if self.features is None:
            features = np.zeros((coords.shape[0], 0), dtype=np.float64)
        else:
            features = np.array(self.features, dtype=np.float64)
            if features.ndim == 1:
                features = features[:, None]
        if features.ndim != 2 or features.shape[0] != coords.shape[0]:
            raise ArgumentError(
                f"features must be N x C with N={coords.shape[0]}, got {features.shape}"
            )
        if not (np.isfinite(coords).all() and np.isfinite(features).all()):
            raise ArgumentError("point cloud contains non-finite values")
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "features", _frozen(features))

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "PointCloud":
        indices = np.asarray(indices, dtype=np.int64)
        return PointCloud(self.coords[indices], self.features[indices])


@dataclass(frozen=True)
class Box3D:
    """Oriented box: center, full extents along its local axes, yaw about +Z."""

    cx: float
    cy: float
    cz: float
    dx: float
    dy: float
    dz: float
    yaw: float = 0.0

    def __post_init__(self):
        vals = (self.cx, self.cy, self.cz, self.dx, self.dy, self.dz, self.yaw)
        if not all(math.isfinite(float(v)) for v in vals):
            raise ArgumentError("box parameters must be finite")
        if min(self.dx, self.dy, self.dz) <= 0:
            raise ArgumentError(f"box dims must be positive, got {(self.dx, self.dy, self.dz)}")
        for name in ("cx", "cy", "cz", "dx", "dy", "dz"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.cz])

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz])

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.cz, self.dx, self.dy, self.dz, self.yaw])

    @classmethod
    def from_array(cls, row) -> "Box3D":
        return cls(*[float(v) for v in row[:7]])

    def to_dict(self) -> dict:
        return {
            "cx": self.cx, "cy": self.cy, "cz": self.cz,
            "dx": self.dx, "dy": self.dy, "dz": self.dz, "yaw": self.yaw,
        }


def boxes_to_array(boxes) -> np.ndarray:
    """Stack boxes into a B x 7 array ``[cx, cy, cz, dx, dy, dz, yaw]``."""
    if isinstance(boxes, np.ndarray):
        arr = np.asarray(boxes, dtype=np.float64).reshape(-1, 7)
        return arr
    if len(boxes) == 0:
        return np.zeros((0, 7))
    return np.stack([b.as_array() for b in boxes])


@dataclass(frozen=True, eq=False)
class VoxelGridSpec:
    origin: tuple = (0.0, 0.0, 0.0)
    voxel_size: tuple = (0.1, 0.1, 0.1)
    extent: tuple = (1, 1, 1)
    stride: int = 1

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        size = tuple(float(v) for v in self.voxel_size)
        extent = tuple(int(v) for v in self.extent)
        if len(origin) != 3 or len(size) != 3 or len(extent) != 3:
            raise ConfigurationError("origin, voxel_size and extent need three components")
        if not all(math.isfinite(v) and v > 0 for v in size):
            raise ConfigurationError(f"voxel size must be positive, got {size}")
        if min(extent) <= 0:
            raise ConfigurationError(f"extent must be positive, got {extent}")
        if int(self.stride) < 1:
            raise ConfigurationError(f"stride must be a positive integer, got {self.stride}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "voxel_size", size)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "stride", int(self.stride))

    @classmethod
    def covering(cls, coords: np.ndarray, voxel_size, stride: int = 1) -> "VoxelGridSpec":
        """Smallest grid anchored at the bounding-box minimum that holds every point."""
        coords = np.asarray(coords, dtype=np.float64)
        size = np.broadcast_to(np.asarray(voxel_size, dtype=np.float64), (3,))
        if not (size > 0).all():
            raise ConfigurationError(f"voxel size must be positive, got {tuple(size)}")
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        extent = np.floor((hi - lo) / size).astype(np.int64) + 1
        return cls(tuple(lo), tuple(size), tuple(int(e) for e in extent), stride)


@dataclass(frozen=True, eq=False)
class SparseVoxelSet:
    """Occupied voxels of a grid with one feature row per voxel."""

    indices: np.ndarray
    features: np.ndarray
    spec: VoxelGridSpec = field(default_factory=VoxelGridSpec)

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64).reshape(-1, 3)
        feats = np.array(self.features, dtype=np.float64)
        if feats.ndim == 1:
            feats = feats.reshape(idx.shape[0], -1)
        if feats.shape[0] != idx.shape[0]:
            raise ArgumentError("indices and features disagree on the voxel count")
        if idx.size and ((idx < 0).any() or (idx >= np.array(self.spec.extent)).any()):
            raise ArgumentError("voxel index outside grid extent")
        if idx.shape[0] > 1 and np.unique(idx, axis=0).shape[0] != idx.shape[0]:
            raise ArgumentError("voxel indices must be unique")
        object.__setattr__(self, "indices", _frozen(idx))
        object.__setattr__(self, "features", _frozen(feats))

    def __len__(self) -> int:
        return self.indices.shape[0]
