from __future__ import annotations

import numpy as np

from .._spatial import any_within
from ..errors import ArgumentError


def coverage_mask(points, keypoints, radius: float, workers: int = 1) -> np.ndarray:
    if not radius > 0:
        raise ArgumentError(f"coverage radius must be positive, got {radius}")
    xyz = getattr(points, "coords", points)
    kp = getattr(keypoints, "coords", keypoints)
    return any_within(xyz, kp, radius, workers)


def coverage_rate(points, keypoints, radius: float, workers: int = 1) -> float:
    """Fraction of points with a keypoint strictly closer than ``radius``.

    Exact: every point is tested.  An empty keypoint set covers nothing.
    """
    mask = coverage_mask(points, keypoints, radius, workers)
    if mask.size == 0:
        return 0.0
    return float(np.count_nonzero(mask)) / mask.size
