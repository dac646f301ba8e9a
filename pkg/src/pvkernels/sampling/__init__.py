from .baselines import random_parallel_fps, random_sample, voxelized_fps_point, voxelized_fps_voxel
from .config import METHODS, SamplerConfig, candidate_indices, sample_keypoints
from .coverage import coverage_mask, coverage_rate
from .fps import KeypointSet, farthest_point_sampling, fps_indices
from .spc import (
    grouped_fps,
    proposal_centric_filter,
    proposal_centric_mask,
    sector_ids,
    sector_partition,
    sector_quota,
    sectorized_fps,
    sectorized_proposal_centric_sample,
)

__all__ = [
    "METHODS",
    "KeypointSet",
    "SamplerConfig",
    "candidate_indices",
    "coverage_mask",
    "coverage_rate",
    "farthest_point_sampling",
    "fps_indices",
    "grouped_fps",
    "proposal_centric_filter",
    "proposal_centric_mask",
    "random_parallel_fps",
    "random_sample",
    "sample_keypoints",
    "sector_ids",
    "sector_partition",
    "sector_quota",
    "sectorized_fps",
    "sectorized_proposal_centric_sample",
    "voxelized_fps_point",
    "voxelized_fps_voxel",
]
