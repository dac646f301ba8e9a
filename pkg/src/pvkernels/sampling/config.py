from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, ConfigurationError
from .baselines import random_parallel_fps, random_sample, voxelized_fps_point, voxelized_fps_voxel
from .fps import KeypointSet, farthest_point_sampling
from .spc import proposal_centric_filter, sectorized_fps, sectorized_proposal_centric_sample

METHODS = (
    "fps",
    "random",
    "voxelized_fps_voxel",
    "voxelized_fps_point",
    "random_parallel_fps",
    "sectorized_fps",
)


@dataclass(frozen=True)
class SamplerConfig:
    n: int = 4096
    method: str = "sectorized_fps"
    sectors: int = 6
    extend_radius: float = 1.6
    voxel_size: float = 0.2
    seed: int = 0
    pc_filter: bool = True
    scene_center: tuple = (0.0, 0.0)
    groups: int | None = None  # random_parallel_fps split count; defaults to ``sectors``
    random_start: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown sampling method {self.method!r}; expected one of {METHODS}")
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if self.sectors < 1:
            raise ConfigurationError(f"sectors must be >= 1, got {self.sectors}")
        if self.extend_radius < 0:
            raise ConfigurationError(f"extend radius must be >= 0, got {self.extend_radius}")

    @property
    def label(self) -> str:
        return ("pc_filter+" if self.pc_filter else "") + self.method


def candidate_indices(points, boxes, cfg: SamplerConfig) -> np.ndarray:
    """Points a sampler draws from: the proposal-centric subset, or everything."""
    n_points = len(getattr(points, "coords", points))
    if not cfg.pc_filter:
        return np.arange(n_points)
    return proposal_centric_filter(points, boxes if boxes is not None else [], cfg.extend_radius)


def sample_keypoints(points, cfg: SamplerConfig, boxes=None, workers: int = 1) -> KeypointSet:
    """Run the sampler named by ``cfg.method``.

    With ``cfg.pc_filter`` every method draws from the proposal-centric
    candidates; returned indices always refer to the full cloud.
    """
    coords = np.ascontiguousarray(getattr(points, "coords", points), dtype=np.float64)
    if coords.shape[0] == 0:
        raise ArgumentError("cannot sample from an empty cloud")
    if cfg.method == "sectorized_fps" and cfg.pc_filter:
        return sectorized_proposal_centric_sample(coords, boxes or [], cfg, workers)

    cand = candidate_indices(coords, boxes, cfg)
    sub = coords[cand]
    m = cfg.method
    if m == "fps":
        ks = farthest_point_sampling(sub, cfg.n, 0, cfg.random_start, cfg.seed)
    elif m == "sectorized_fps":
        ks = KeypointSet.from_indices(sub, sectorized_fps(sub, cfg.n, cfg.sectors, cfg.scene_center, workers))
    elif m == "random":
        ks = random_sample(sub, cfg.n, cfg.seed)
    elif m == "voxelized_fps_voxel":
        return voxelized_fps_voxel(sub, cfg.n, cfg.voxel_size)
    elif m == "voxelized_fps_point":
        ks = voxelized_fps_point(sub, cfg.n, cfg.voxel_size, cfg.seed)
    else:
        groups = cfg.groups if cfg.groups is not None else cfg.sectors
        ks = random_parallel_fps(sub, cfg.n, groups, cfg.seed, workers)
    return KeypointSet(cand[ks.indices], ks.coords)
