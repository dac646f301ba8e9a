"""Voxel set abstraction: multi-source keypoint features and keypoint weighting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..aggregation.mlp import MlpSpec
from ..aggregation.query import NeighborhoodSpec
from ..aggregation.set_abstraction import set_abstraction
from ..aggregation.vectorpool import VectorPoolConfig, vectorpool_aggregate
from ..core.geometry import points_in_boxes, voxel_centers_metric
from ..errors import ConfigurationError
from .bev import BevMap, bev_bilinear

AGGREGATORS = ("set_abstraction", "vectorpool")


@dataclass(frozen=True)
class SourceConfig:
    """How one feature source is aggregated onto query points.

    ``specs``/``mlps`` drive set abstraction (one MLP per radius);
    ``vectorpool`` lists one VectorPool operator per scale.  ``level`` picks the
    voxel level a VSA source reads; it is ignored for raw points and RoI pooling.
    """

    name: str = "source"
    specs: tuple = ()
    mlps: tuple = ()
    vectorpool: tuple = ()
    level: int | None = None
    enabled: bool = True

    def width(self, aggregator: str) -> int:
        if aggregator == "set_abstraction":
            return sum(m.out_dim for m in self.mlps)
        return sum(v.out_dim for v in self.vectorpool)


def aggregate_source(centers, coords, feats, src: SourceConfig, aggregator: str, workers: int = 1):
    if aggregator == "set_abstraction":
        if not src.specs:
            raise ConfigurationError(f"source {src.name!r} has no set-abstraction radii")
        return set_abstraction(centers, coords, src.specs, src.mlps, features=feats, workers=workers)
    if aggregator == "vectorpool":
        if not src.vectorpool:
            raise ConfigurationError(f"source {src.name!r} has no VectorPool configuration")
        return np.concatenate(
            [vectorpool_aggregate(centers, coords, feats, vp, workers) for vp in src.vectorpool], axis=1
        )
    raise ConfigurationError(f"unknown aggregator {aggregator!r}; expected one of {AGGREGATORS}")


@dataclass(frozen=True)
class VsaConfig:
    levels: tuple = ()
    raw: SourceConfig | None = None
    use_bev: bool = True

    def enabled_sources(self):
        return [s for s in self.levels if s.enabled] + ([self.raw] if self.raw and self.raw.enabled else [])


@dataclass(frozen=True, eq=False)
class KeypointFeatures:
    """Per-keypoint feature rows plus the column range each source occupies."""

    features: np.ndarray
    segments: tuple = field(default_factory=tuple)  # (name, start, stop)

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        width = sum(stop - start for _, start, stop in self.segments)
        if self.segments and width != f.shape[1]:
            raise ConfigurationError(f"segments cover {width} columns, features have {f.shape[1]}")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "segments", tuple(self.segments))

    def slice(self, name: str) -> np.ndarray:
        for n, a, b in self.segments:
            if n == name:
                return self.features[:, a:b]
        raise KeyError(name)

    @property
    def width(self) -> int:
        return self.features.shape[1]


def vsa_keypoint_features(keypoints, raw, voxel_levels, bev: BevMap | None, cfg: VsaConfig,
                          aggregator: str = "set_abstraction", workers: int = 1) -> KeypointFeatures:
    """Concatenate voxel-level, raw-point and BEV features for every keypoint.

    Column order is the enabled voxel levels (ascending), then the raw points,
    then the BEV lookup.
    """
    kp = np.asarray(getattr(keypoints, "coords", keypoints), dtype=np.float64).reshape(-1, 3)
    if aggregator not in AGGREGATORS:
        raise ConfigurationError(f"unknown aggregator {aggregator!r}; expected one of {AGGREGATORS}")
    blocks, segments = [], []
    col = 0

    def add(name, block):
        nonlocal col
        blocks.append(block)
        segments.append((name, col, col + block.shape[1]))
        col += block.shape[1]

    for src in sorted((s for s in cfg.levels if s.enabled), key=lambda s: s.level):
        if src.level is None or not 0 <= src.level < len(voxel_levels):
            raise ConfigurationError(f"source {src.name!r} refers to missing voxel level {src.level}")
        vset = voxel_levels[src.level]
        add(src.name, aggregate_source(kp, voxel_centers_metric(vset), vset.features, src, aggregator, workers))
    if cfg.raw is not None and cfg.raw.enabled:
        add(cfg.raw.name, aggregate_source(kp, raw.coords, raw.features, cfg.raw, aggregator, workers))
    if cfg.use_bev:
        if bev is None:
            raise ConfigurationError("BEV source enabled but no map given")
        add("bev", bev_bilinear(bev, kp[:, :2]).reshape(kp.shape[0], -1))
    if not blocks:
        raise ConfigurationError("at least one feature source must be enabled")
    return KeypointFeatures(np.concatenate(blocks, axis=1), tuple(segments))


def generate_seg_labels(keypoints, gt_boxes) -> np.ndarray:
    """1 for keypoints inside (or on) any ground-truth box, else 0."""
    kp = np.asarray(getattr(keypoints, "coords", keypoints), dtype=np.float64).reshape(-1, 3)
    if len(gt_boxes) == 0:
        return np.zeros(kp.shape[0], np.int64)
    return points_in_boxes(kp, gt_boxes).any(axis=1).astype(np.int64)


def pkw_reweight(features, mlp: MlpSpec):
    """Scale each keypoint's features by ``sigmoid(mlp(features))``.

    Accepts a :class:`KeypointFeatures` (returned with the same segments) or a
    bare array.
    """
    is_kf = isinstance(features, KeypointFeatures)
    f = features.features if is_kf else np.asarray(features, dtype=np.float64)
    if mlp.out_dim != 1:
        raise ConfigurationError(f"the weighting MLP must output one channel, got {mlp.out_dim}")
    if mlp.in_dim != f.shape[1]:
        raise ConfigurationError(f"the weighting MLP takes {mlp.in_dim} inputs, features have {f.shape[1]}")
    gated = expit(mlp(f)) * f
    return KeypointFeatures(gated, features.segments) if is_kf else gated


def default_vsa_config(level_channels=(16, 32, 64, 64), raw_channels: int = 1,
                       aggregator: str = "set_abstraction", seed: int = 0) -> VsaConfig:
    """Randomly weighted configuration with the published radii and grid settings.

    Set abstraction uses radii pairs (0.4, 0.8), (0.8, 1.2), (1.2, 2.4), (2.4, 4.8)
    on the four levels and (0.4, 0.8) on raw points.  VectorPool runs on the
    last two levels with half lengths (1.2, 2.4) / (2.4, 4.8), 3x3x3 voxels and
    reduction 2, and on raw points with 2x2x2 voxels and no reduction.
    """
    radii = ((0.4, 0.8), (0.8, 1.2), (1.2, 2.4), (2.4, 4.8))
    rng = np.random.default_rng(seed)
    levels = []
    for k, c in enumerate(level_channels):
        if aggregator == "set_abstraction":
            specs = tuple(NeighborhoodSpec(r, 16, int(rng.integers(2**31))) for r in radii[k])
            mlps = tuple(MlpSpec.random((c + 3, 16, 16), int(rng.integers(2**31))) for _ in radii[k])
            levels.append(SourceConfig(f"level{k + 1}", specs, mlps, level=k))
        elif k >= 2:
            red = 2 if c % 2 == 0 else 1
            vps = tuple(
                VectorPoolConfig.random(c, (3, 3, 3), l, red, 16, (32, 32), int(rng.integers(2**31)))
                for l in radii[k]
            )
            levels.append(SourceConfig(f"level{k + 1}", vectorpool=vps, level=k))
    if aggregator == "set_abstraction":
        raw = SourceConfig(
            "raw",
            tuple(NeighborhoodSpec(r, 16, int(rng.integers(2**31))) for r in (0.4, 0.8)),
            tuple(MlpSpec.random((raw_channels + 3, 16, 16), int(rng.integers(2**31))) for _ in range(2)),
        )
    else:
        raw = SourceConfig(
            "raw",
            vectorpool=tuple(
                VectorPoolConfig.random(raw_channels, (2, 2, 2), l, 1, 16, (32, 32), int(rng.integers(2**31)))
                for l in (0.4, 0.8)
            ),
        )
    return VsaConfig(tuple(levels), raw, True)
