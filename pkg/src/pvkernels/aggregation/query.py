from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._spatial import CHEBYSHEV, EUCLIDEAN, radius_neighbors, subsample_neighbors
from ..errors import ConfigurationError


@dataclass(frozen=True)
class NeighborhoodSpec:
    radius: float
    max_samples: int = 16
    sample_seed: int = 0

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError(f"radius must be positive, got {self.radius}")
        if self.max_samples < 1:
            raise ConfigurationError(f"max_samples must be >= 1, got {self.max_samples}")


class Neighborhoods:
    """Per-centre neighbour index lists in CSR form."""

    def __init__(self, offsets: np.ndarray, indices: np.ndarray):
        self.offsets = offsets
        self.indices = indices

    def __len__(self) -> int:
        return self.offsets.shape[0] - 1

    def __getitem__(self, i: int) -> np.ndarray:
        return self.indices[self.offsets[i]:self.offsets[i + 1]]

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def row_ids(self) -> np.ndarray:
        return np.repeat(np.arange(len(self)), self.counts)

    def tolist(self) -> list[list[int]]:
        return [self[i].tolist() for i in range(len(self))]


def _xyz(points) -> np.ndarray:
    return np.asarray(getattr(points, "coords", points), dtype=np.float64).reshape(-1, 3)


def ball_query(centers, points, spec: NeighborhoodSpec, workers: int = 1) -> Neighborhoods:
    """Neighbours strictly inside ``spec.radius`` of each centre.

    Rows with more than ``spec.max_samples`` hits keep a seeded uniform subset
    of that size; indices in every row ascend.
    """
    offsets, indices = radius_neighbors(centers, _xyz(points), spec.radius, EUCLIDEAN, workers)
    offsets, indices = subsample_neighbors(offsets, indices, spec.max_samples, spec.sample_seed)
    return Neighborhoods(offsets, indices)


def cube_query_batch(centers, points, half_length: float, workers: int = 1) -> Neighborhoods:
    """Points whose every coordinate offset is below ``2 * half_length`` in magnitude."""
    if not half_length > 0:
        raise ConfigurationError(f"half length must be positive, got {half_length}")
    offsets, indices = radius_neighbors(centers, _xyz(points), 2.0 * half_length, CHEBYSHEV, workers)
    return Neighborhoods(offsets, indices)


def cube_query(center, points, half_length: float) -> np.ndarray:
    return cube_query_batch(np.asarray(center, dtype=np.float64)[None], points, half_length)[0]
