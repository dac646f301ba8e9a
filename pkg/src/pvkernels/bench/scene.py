"""Synthetic LiDAR-like scenes: ground rings, object clusters in boxes, clutter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.types import Box3D, PointCloud
from ..errors import ConfigurationError

# (dx, dy, dz) means and jitter for the three object classes, plus class weights
_CLASSES = (
    ((4.5, 1.9, 1.6), (0.4, 0.1, 0.15), 0.7),
    ((0.8, 0.8, 1.75), (0.1, 0.1, 0.1), 0.15),
    ((1.8, 0.7, 1.7), (0.15, 0.05, 0.1), 0.15),
)


@dataclass(frozen=True)
class SceneSpec:
    num_points: int = 100_000
    extent: float = 150.0           # side of the square scene, metres
    sensor_height: float = 2.0
    beams: int = 64
    azimuth_resolution: float = 0.2  # degrees between returns on a ring
    min_range: float = 3.0
    range_falloff: float = 40.0     # metres; ground density also decays as exp(-r / falloff)
    clusters: int = 20
    points_per_cluster: int = 1500
    inside_fraction: float = 0.95
    noise_points: int = 2_000
    seed: int = 0

    def __post_init__(self):
        if self.num_points < 1 or self.beams < 1 or self.extent <= 0:
            raise ConfigurationError("num_points, beams and extent must be positive")
        if self.clusters < 0 or self.points_per_cluster < 0 or self.noise_points < 0:
            raise ConfigurationError("cluster and noise counts must be >= 0")
        if not 0.9 <= self.inside_fraction <= 1.0:
            raise ConfigurationError("inside_fraction must lie in [0.9, 1]")
        if self.clusters * self.points_per_cluster + self.noise_points > self.num_points:
            raise ConfigurationError("cluster and noise points exceed num_points")

    @property
    def max_range(self) -> float:
        return self.extent / 2.0


def _f32(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float32).astype(np.float64)


def _place_boxes(rng, spec: SceneSpec) -> list[Box3D]:
    boxes: list[Box3D] = []
    centers, radii = [], []
    probs = np.array([c[2] for c in _CLASSES])
    attempts = 0
    while len(boxes) < spec.clusters:
        attempts += 1
        if attempts > 100 * max(spec.clusters, 1):
            raise ConfigurationError("could not place non-overlapping boxes; lower the cluster count")
        mean, jitter, _ = _CLASSES[rng.choice(len(_CLASSES), p=probs)]
        dims = np.maximum(np.asarray(mean) + rng.normal(0.0, jitter), 0.3)
        r = rng.uniform(spec.min_range + 3.0, spec.max_range - 5.0)
        phi = rng.uniform(-math.pi, math.pi)
        c = np.array([r * math.cos(phi), r * math.sin(phi)])
        half_diag = 0.5 * math.hypot(dims[0], dims[1])
        if any(np.hypot(*(c - o)) < half_diag + ro + 0.5 for o, ro in zip(centers, radii)):
            continue
        centers.append(c)
        radii.append(half_diag)
        cz = -spec.sensor_height + dims[2] / 2.0
        vals = _f32(np.array([c[0], c[1], cz, dims[0], dims[1], dims[2], rng.uniform(-math.pi, math.pi)]))
        boxes.append(Box3D(*vals))
    return boxes


def _ground(rng, spec: SceneSpec, count: int) -> np.ndarray:
    if count == 0:
        return np.zeros((0, 3))
    radii = np.geomspace(spec.min_range, spec.max_range, spec.beams)
    per_ring = int(round(360.0 / spec.azimuth_resolution))
    az = np.linspace(-math.pi, math.pi, per_ring, endpoint=False)
    rr = np.repeat(radii, per_ring)
    aa = np.tile(az, spec.beams) + rng.uniform(0, 2 * math.pi / per_ring, rr.size)
    w = np.exp(-rr / spec.range_falloff)
    pick = rng.choice(rr.size, size=min(count, rr.size), replace=False, p=w / w.sum())
    if count > rr.size:
        pick = np.concatenate([pick, rng.choice(rr.size, size=count - rr.size, p=w / w.sum())])
    r = rr[pick] + rng.normal(0.0, 0.02, pick.size)
    a = aa[pick]
    z = -spec.sensor_height + rng.normal(0.0, 0.03, pick.size)
    return np.stack([r * np.cos(a), r * np.sin(a), z], axis=1)


def _cluster_points(rng, box: Box3D, count: int, inside_fraction: float) -> np.ndarray:
    """Returns on the side and top faces of ``box``; a few stray just outside."""
    half = box.dims / 2.0
    n_in = int(math.ceil(inside_fraction * count))
    # faces: +x, -x, +y, -y, top, picked in proportion to their area
    areas = np.array([box.dy * box.dz, box.dy * box.dz, box.dx * box.dz, box.dx * box.dz, box.dx * box.dy])
    face = rng.choice(5, size=count, p=areas / areas.sum())
    local = rng.uniform(-1.0, 1.0, (count, 3)) * half
    axis = np.array([0, 0, 1, 1, 2])[face]
    sign = np.array([1.0, -1.0, 1.0, -1.0, 1.0])[face]
    # just under the surface so float32 rounding keeps them inside
    depth = rng.uniform(0.0, 0.05, count)
    rows = np.arange(count)
    local[rows, axis] = sign * (half[axis] - depth * np.minimum(half[axis], 0.2))
    out = local[n_in:]
    if out.shape[0]:
        scale = rng.uniform(1.05, 1.25, (out.shape[0], 1))
        out *= scale / np.maximum(np.abs(out / half).max(axis=1, keepdims=True), 1e-9)
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    x = c * local[:, 0] - s * local[:, 1] + box.cx
    y = s * local[:, 0] + c * local[:, 1] + box.cy
    return np.stack([x, y, local[:, 2] + box.cz], axis=1)


def synth_scene_labeled(spec: SceneSpec) -> tuple[PointCloud, list[Box3D], np.ndarray]:
    """Like :func:`synth_scene`, also returning each point's cluster id (-1 for ground/clutter)."""
    rng = np.random.default_rng(spec.seed)
    boxes = _place_boxes(rng, spec)
    sizes = rng.multinomial(spec.clusters * spec.points_per_cluster, np.full(spec.clusters, 1.0 / spec.clusters)) \
        if spec.clusters else np.zeros(0, np.int64)
    objs = [_cluster_points(rng, b, int(k), spec.inside_fraction) for b, k in zip(boxes, sizes)]
    n_ground = spec.num_points - int(sizes.sum()) - spec.noise_points
    ground = _ground(rng, spec, n_ground)
    noise = np.column_stack([
        rng.uniform(-spec.max_range, spec.max_range, (spec.noise_points, 2)),
        rng.uniform(-spec.sensor_height, 4.0, spec.noise_points),
    ])
    coords = np.concatenate([ground, *objs, noise], axis=0)
    intensity = np.concatenate([
        rng.uniform(0.0, 0.3, ground.shape[0]),
        rng.uniform(0.3, 1.0, int(sizes.sum())),
        rng.uniform(0.0, 1.0, spec.noise_points),
    ])
    labels = np.concatenate([
        np.full(ground.shape[0], -1, np.int64),
        np.repeat(np.arange(len(boxes)), sizes),
        np.full(spec.noise_points, -1, np.int64),
    ])
    return PointCloud(_f32(coords), _f32(intensity)[:, None]), boxes, labels


def synth_scene(spec: SceneSpec) -> tuple[PointCloud, list[Box3D]]:
    """Deterministic scene for ``spec``; coordinates are float32-representable.

    Features are a single intensity channel.  Cluster ``k`` is drawn around
    box ``k`` with ``inside_fraction`` of its points inside the box.
    """
    cloud, boxes, _ = synth_scene_labeled(spec)
    return cloud, boxes
