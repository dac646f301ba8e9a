"""Keypoint sampling, local feature aggregation and RoI pooling for LiDAR point clouds.

Hot loops are numba kernels; set ``PVK_DISABLE_NUMBA=1`` to run the pure
numpy implementations instead.  Both produce identical results.
"""

from . import aggregation, bench, core, pooling, sampling
from ._accel import available_backends, backend, set_backend, using_backend
from .errors import ArgumentError, ConfigurationError, FormatError, PvkError

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "ConfigurationError",
    "FormatError",
    "PvkError",
    "aggregation",
    "available_backends",
    "backend",
    "bench",
    "core",
    "pooling",
    "sampling",
    "set_backend",
    "using_backend",
]
