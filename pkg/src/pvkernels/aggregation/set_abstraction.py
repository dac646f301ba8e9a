from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .mlp import MlpSpec
from .query import NeighborhoodSpec, ball_query

_ROWS_PER_CHUNK = 1 << 18


def lexicographic_rank(coords: np.ndarray) -> np.ndarray:
    """Rank of each point under (x, y, z) lexicographic order, index breaking ties."""
    coords = np.asarray(coords)
    order = np.lexsort((coords[:, 2], coords[:, 1], coords[:, 0]))
    rank = np.empty(coords.shape[0], np.int64)
    rank[order] = np.arange(coords.shape[0])
    return rank


def segment_max(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Row-wise max over CSR segments; empty segments give zeros."""
    m = offsets.shape[0] - 1
    out = np.zeros((m, values.shape[1]))
    counts = np.diff(offsets)
    nonempty = np.flatnonzero(counts)
    if nonempty.size:
        out[nonempty] = np.maximum.reduceat(values, offsets[nonempty], axis=0)
    return out


def _pointnet_block(centers, coords, feats, nb, mlp: MlpSpec, rank) -> np.ndarray:
    rows = nb.row_ids()
    cols = nb.indices
    # canonical in-row order so the batched matmul sees identical input under
    # any permutation of the source points
    order = np.lexsort((rank[cols], rows))
    rows = rows[order]
    cols = cols[order]
    out = np.zeros((len(nb), mlp.out_dim))
    m = len(nb)
    start = 0
    while start < m:
        # grow the chunk of centres until it holds enough neighbour rows
        stop = int(np.searchsorted(nb.offsets, nb.offsets[start] + _ROWS_PER_CHUNK, side="right")) - 1
        stop = min(max(stop, start + 1), m)
        a, b = nb.offsets[start], nb.offsets[stop]
        r = rows[a:b]
        c = cols[a:b]
        x = np.concatenate([feats[c], coords[c] - centers[r]], axis=1)
        out[start:stop] = segment_max(mlp(x), nb.offsets[start:stop + 1] - a)
        start = stop
    return out


def set_abstraction(centers, points, specs, mlps, features=None, workers: int = 1) -> np.ndarray:
    """Multi-radius PointNet aggregation around each centre.

    For each radius the neighbours (ball query, at most ``max_samples``) are
    encoded as ``mlp([f_j, p_j - center])`` and max-pooled per channel; a centre
    without neighbours gets a zero block.  Blocks are concatenated in radius
    order.

    Parameters
    ----------
    centers : (M, 3) array
    points : PointCloud or (N, 3) array
        Source points; features come from ``points.features`` unless
        ``features`` is given.
    specs : sequence of NeighborhoodSpec
    mlps : sequence of MlpSpec, one per spec, each taking ``C + 3`` inputs
    """
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    coords = np.asarray(getattr(points, "coords", points), dtype=np.float64)
    if features is None:
        features = getattr(points, "features", np.zeros((coords.shape[0], 0)))
    feats = np.asarray(features, dtype=np.float64).reshape(coords.shape[0], -1)
    specs = list(specs)
    mlps = list(mlps)
    if len(specs) != len(mlps) or not specs:
        raise ConfigurationError(f"need one MLP per neighbourhood spec, got {len(specs)} specs, {len(mlps)} MLPs")
    for spec, mlp in zip(specs, mlps):
        if not isinstance(spec, NeighborhoodSpec):
            raise ConfigurationError("specs must be NeighborhoodSpec instances")
        if mlp.in_dim != feats.shape[1] + 3:
            raise ConfigurationError(
                f"MLP takes {mlp.in_dim} inputs but features + offsets give {feats.shape[1] + 3}"
            )
    rank = lexicographic_rank(coords)
    blocks = []
    for spec, mlp in zip(specs, mlps):
        nb = ball_query(centers, coords, spec, workers)
        blocks.append(_pointnet_block(centers, coords, feats, nb, mlp, rank))
    return np.concatenate(blocks, axis=1)
