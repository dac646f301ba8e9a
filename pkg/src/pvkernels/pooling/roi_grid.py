from __future__ import annotations

import numpy as np

from ..aggregation.mlp import MlpSpec
from ..aggregation.query import NeighborhoodSpec
from ..aggregation.vectorpool import VectorPoolConfig
from ..core.geometry import box_grid_points
from ..errors import ArgumentError
from .vsa import SourceConfig, aggregate_source


def roi_grid_points(boxes, grid=(6, 6, 6)) -> np.ndarray:
    """Grid points of every box stacked as ``(B * g) x 3`` in box order."""
    if len(boxes) == 0:
        return np.zeros((0, 3))
    return np.concatenate([box_grid_points(b, grid) for b in boxes], axis=0)


def roi_grid_pool(boxes, keypoints, kp_features, grid=(6, 6, 6), agg: SourceConfig = None,
                  head: MlpSpec | None = None, aggregator: str = "set_abstraction",
                  workers: int = 1) -> np.ndarray:
    """Pool keypoint features onto each box's grid points and encode per box.

    Grid features are flattened in grid-point order (x-major), giving
    ``g * C`` values per box, then passed through ``head`` when given.
    VectorPool local cubes stay world-axis aligned.
    """
    grid = tuple(int(g) for g in grid)
    if len(grid) != 3 or min(grid) < 1:
        raise ArgumentError(f"grid counts must be >= 1, got {grid}")
    kp = np.asarray(getattr(keypoints, "coords", keypoints), dtype=np.float64).reshape(-1, 3)
    feats = np.asarray(getattr(kp_features, "features", kp_features), dtype=np.float64).reshape(kp.shape[0], -1)
    g = grid[0] * grid[1] * grid[2]
    centers = roi_grid_points(boxes, grid)
    per_point = aggregate_source(centers, kp, feats, agg, aggregator, workers)
    flat = per_point.reshape(len(boxes), g * per_point.shape[1])
    return head(flat) if head is not None else flat


def default_roi_config(kp_channels: int, aggregator: str = "set_abstraction", seed: int = 0) -> SourceConfig:
    """Random weights with the published RoI settings: radii / half lengths (0.8, 1.6).

    VectorPool uses 3x3x3 local voxels and reduction 3 (falling back to 1 when
    the channel count does not divide).
    """
    rng = np.random.default_rng(seed)
    scales = (0.8, 1.6)
    if aggregator == "set_abstraction":
        return SourceConfig(
            "roi",
            tuple(NeighborhoodSpec(r, 16, int(rng.integers(2**31))) for r in scales),
            tuple(MlpSpec.random((kp_channels + 3, 32, 32), int(rng.integers(2**31))) for _ in scales),
        )
    red = 3 if kp_channels % 3 == 0 else 1
    return SourceConfig(
        "roi",
        vectorpool=tuple(
            VectorPoolConfig.random(kp_channels, (3, 3, 3), l, red, 16, (32, 32), int(rng.integers(2**31)))
            for l in scales
        ),
    )
