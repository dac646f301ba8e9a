from __future__ import annotations

import statistics
import time
import tracemalloc
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import _accel
from ..aggregation.mlp import MlpSpec
from ..aggregation.query import NeighborhoodSpec
from ..aggregation.set_abstraction import set_abstraction
from ..aggregation.vectorpool import VectorPoolConfig, vectorpool_aggregate
from ..sampling.config import SamplerConfig, candidate_indices, sample_keypoints
from ..sampling.coverage import coverage_rate
from .report import BenchReport, BenchRow

COVERAGE_RADII = (0.1, 0.2, 0.3, 0.4, 0.5)


def time_call(fn, repeats: int = 3, warmup: int = 1):
    """Median wall time in ms over ``repeats`` calls after ``warmup`` calls; returns (ms, last result)."""
    result = None
    for _ in range(warmup):
        result = fn()
    times = []
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        result = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), result


def _sampler_cell(scene, cfg: SamplerConfig, radii, repeats, workers):
    name, cloud, boxes = scene
    try:
        ms, ks = time_call(lambda: sample_keypoints(cloud, cfg, boxes, workers), repeats)
        ref = cloud.coords[candidate_indices(cloud, boxes, cfg)]
        cov = [coverage_rate(ref, ks, r, workers) for r in radii]
        return BenchRow(cfg.label, name, cfg.seed, cfg.n, ms, cov)
    except Exception as exc:  # recorded per row; the run continues
        return BenchRow(cfg.label, name, cfg.seed, cfg.n, None, [], f"{type(exc).__name__}: {exc}")


def run_sampler_bench(scenes, configs, radii=COVERAGE_RADII, repeats: int = 3, workers: int = 1,
                      jobs: int = 1) -> BenchReport:
    """Time each sampler on each scene and score its keypoints by coverage.

    ``scenes`` holds ``(name, PointCloud, boxes)`` triples.  Coverage is measured
    against the points the sampler drew from (the proposal-centric subset when
    filtering is on).  Rows come back scene-major regardless of ``jobs``.
    """
    cells = [(s, c) for s in scenes for c in configs]
    run = lambda sc: _sampler_cell(sc[0], sc[1], radii, repeats, workers)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    return BenchReport(list(radii), rows)


@dataclass(frozen=True)
class KernelCase:
    name: str
    kind: str            # "set_abstraction" or "vectorpool"
    channels: int = 96
    scales: tuple = (0.8, 1.6)
    max_samples: int = 16
    grid: tuple = (3, 3, 3)
    reduction: int = 3
    out_dim: int = 32

    def build(self, seed: int):
        if self.kind == "set_abstraction":
            specs = [NeighborhoodSpec(r, self.max_samples, seed + k) for k, r in enumerate(self.scales)]
            mlps = [MlpSpec.random((self.channels + 3, self.out_dim, self.out_dim), seed + k)
                    for k in range(len(self.scales))]
            return lambda c, p, f, w: set_abstraction(c, p, specs, mlps, features=f, workers=w)
        vps = [VectorPoolConfig.random(self.channels, self.grid, l, self.reduction, 16, (self.out_dim,), seed + k)
               for k, l in enumerate(self.scales)]
        return lambda c, p, f, w: np.concatenate([vectorpool_aggregate(c, p, f, vp, w) for vp in vps], axis=1)


DEFAULT_KERNEL_CASES = (
    KernelCase("set_abstraction_roi", "set_abstraction"),
    KernelCase("vectorpool_roi", "vectorpool"),
)

KERNEL_COLUMNS = ["kernel", "backend", "num_points", "num_centers", "runtime_ms", "peak_mb", "checksum"]


def kernel_inputs(num_points: int, num_centers: int, channels: int, seed: int, extent: float = 40.0):
    """Keypoint-like points in a flat slab with centres drawn near them."""
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(-extent / 2, extent / 2, (num_points, 2)), rng.uniform(-1, 1, num_points)])
    feats = rng.normal(size=(num_points, channels))
    base = pts[rng.integers(num_points, size=num_centers)]
    centers = base + rng.normal(0.0, 0.5, (num_centers, 3))
    return centers, pts, feats


def run_kernel_bench(cases=DEFAULT_KERNEL_CASES, sizes=((4096, 21600),), seed: int = 0, repeats: int = 3,
                     workers: int = 1, backends=None):
    """Wall time and peak allocation for set abstraction vs VectorPool.

    Returns ``(columns, rows, outputs)``; ``outputs`` maps (kernel, backend,
    size) to the computed features so determinism can be checked.
    """
    backends = list(backends) if backends else [_accel.backend()]
    rows, outputs = [], {}
    for case in cases:
        for num_points, num_centers in sizes:
            centers, pts, feats = kernel_inputs(num_points, num_centers, case.channels, seed)
            fn = case.build(seed)
            for be in backends:
                with _accel.using_backend(be):
                    ms, out = time_call(lambda: fn(centers, pts, feats, workers), repeats)
                    tracemalloc.start()
                    fn(centers, pts, feats, workers)
                    _, peak = tracemalloc.get_traced_memory()
                    tracemalloc.stop()
                outputs[(case.name, be, num_points, num_centers)] = out
                rows.append([case.name, be, num_points, num_centers, ms, peak / 2**20, float(out.sum())])
    return KERNEL_COLUMNS, rows, outputs
