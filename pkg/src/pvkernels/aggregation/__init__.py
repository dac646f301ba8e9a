from .mlp import MlpSpec
from .query import NeighborhoodSpec, Neighborhoods, ball_query, cube_query, cube_query_batch
from .set_abstraction import lexicographic_rank, segment_max, set_abstraction
from .vectorpool import (
    VectorPoolConfig,
    channel_reduction,
    interpolate_batch,
    interpolate_voxel_features,
    local_voxel_offsets,
    position_specific_encode,
    vectorpool_aggregate,
    vectorpool_local_vector,
)

__all__ = [
    "MlpSpec",
    "NeighborhoodSpec",
    "Neighborhoods",
    "VectorPoolConfig",
    "ball_query",
    "channel_reduction",
    "cube_query",
    "cube_query_batch",
    "interpolate_batch",
    "interpolate_voxel_features",
    "lexicographic_rank",
    "local_voxel_offsets",
    "position_specific_encode",
    "segment_max",
    "set_abstraction",
    "vectorpool_aggregate",
    "vectorpool_local_vector",
]
