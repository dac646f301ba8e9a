from .bev import BevMap, bev_bilinear
from .roi_grid import default_roi_config, roi_grid_points, roi_grid_pool
from .vsa import (
    AGGREGATORS,
    KeypointFeatures,
    SourceConfig,
    VsaConfig,
    aggregate_source,
    default_vsa_config,
    generate_seg_labels,
    pkw_reweight,
    vsa_keypoint_features,
)

__all__ = [
    "AGGREGATORS",
    "BevMap",
    "KeypointFeatures",
    "SourceConfig",
    "VsaConfig",
    "aggregate_source",
    "bev_bilinear",
    "default_roi_config",
    "default_vsa_config",
    "generate_seg_labels",
    "pkw_reweight",
    "roi_grid_points",
    "roi_grid_pool",
    "vsa_keypoint_features",
]
