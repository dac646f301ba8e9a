from .geometry import (
    box_grid_points,
    point_in_box,
    points_in_boxes,
    voxel_assignment,
    voxel_centers_metric,
    voxelize,
)
from .io import load_boxes, load_point_cloud, save_boxes, save_point_cloud
from .types import Box3D, PointCloud, SparseVoxelSet, VoxelGridSpec, boxes_to_array, normalize_yaw

__all__ = [
    "Box3D",
    "PointCloud",
    "SparseVoxelSet",
    "VoxelGridSpec",
    "box_grid_points",
    "boxes_to_array",
    "load_boxes",
    "load_point_cloud",
    "normalize_yaw",
    "point_in_box",
    "points_in_boxes",
    "save_boxes",
    "save_point_cloud",
    "voxel_assignment",
    "voxel_centers_metric",
    "voxelize",
]
