"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the verdict lines also appear in
the terminal summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import os
import subprocess
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from acceptance_log import verdict
from oracles import (
    coverage_oracle,
    fps_oracle,
    mlp_oracle,
    rel_close,
    vectorpool_oracle,
)
from pvkernels.aggregation import (
    MlpSpec,
    NeighborhoodSpec,
    VectorPoolConfig,
    channel_reduction,
    interpolate_voxel_features,
    set_abstraction,
    vectorpool_aggregate,
)
from pvkernels.bench import SceneSpec, run_sampler_bench, synth_scene
from pvkernels.core import Box3D, PointCloud, VoxelGridSpec, box_grid_points, voxel_centers_metric, voxelize
from pvkernels.pooling import (
    BevMap,
    SourceConfig,
    VsaConfig,
    bev_bilinear,
    roi_grid_pool,
    vsa_keypoint_features,
)
from pvkernels.sampling import SamplerConfig, coverage_rate, fps_indices, proposal_centric_filter, sample_keypoints

RADII = (0.1, 0.2, 0.3, 0.4, 0.5)
SUITE_SCENES = 20


@lru_cache(maxsize=None)
def suite():
    """The shared synthetic suite: 20 scenes of 100k points."""
    return [(f"s{k}", *synth_scene(SceneSpec(num_points=100_000, seed=1000 + k))) for k in range(SUITE_SCENES)]


@lru_cache(maxsize=None)
def suite_report(methods: tuple):
    cfgs = [SamplerConfig(n=4096, method=m, sectors=6, extend_radius=1.6) for m in methods]
    return run_sampler_bench(suite(), cfgs, RADII, repeats=1)


# 1 -----------------------------------------------------------------------

def test_criterion_1_fps_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    mismatches = 0
    checked = 0
    for k in range(200):
        N = int(rng.integers(1, 257))
        if k % 4 == 0:
            # integer lattice: forces many exact distance ties
            xyz = rng.integers(0, 4, (N, 3)).astype(np.float64)
        else:
            xyz = rng.normal(size=(N, 3)) * rng.uniform(0.1, 10)
        start = int(rng.integers(N)) if k % 2 else 0
        ref = fps_oracle(xyz, N, start)
        for n in range(1, N + 1):
            checked += 1
            if fps_indices(xyz, n, start).tolist() != ref[:n]:
                mismatches += 1
    dt = time.perf_counter() - t0
    verdict(1, "FPS equals brute-force greedy oracle", mismatches == 0 and dt < 10,
            f"{checked} (cloud, n) pairs, {mismatches} mismatches, {dt:.1f}s")


# 2 -----------------------------------------------------------------------

def test_criterion_2_coverage_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for k in range(100):
        N = int(rng.integers(1, 5001))
        n = int(rng.integers(0, 513))
        pts = rng.uniform(-5, 5, (N, 3))
        kp = pts[rng.choice(N, size=min(n, N), replace=False)] if k % 3 else rng.uniform(-5, 5, (n, 3))
        r = float(rng.uniform(0.05, 2.0))
        worst = max(worst, abs(coverage_rate(pts, kp, r) - coverage_oracle(pts, kp, r)))
    dt = time.perf_counter() - t0
    verdict(2, "coverage rate equals double-loop oracle", worst <= 1e-12 and dt < 10,
            f"100 instances, max abs diff {worst:.1e}, {dt:.1f}s")


# 3 -----------------------------------------------------------------------

def test_criterion_3_spc_coverage_parity():
    t0 = time.perf_counter()
    rep = suite_report(("fps", "sectorized_fps"))
    fps = rep.mean_coverage("pc_filter+fps")
    spc = rep.mean_coverage("pc_filter+sectorized_fps")
    gaps = [abs(a - b) for a, b in zip(fps, spc)]
    errors = [r.error for r in rep.rows if r.error]
    dt = time.perf_counter() - t0
    detail = ", ".join(f"r={r}: {g:.4f}" for r, g in zip(RADII, gaps))
    verdict(3, "SPC-FPS coverage within 0.02 of PC-filter + FPS",
            not errors and max(gaps) <= 0.02 and dt < 120,
            f"{SUITE_SCENES} scenes, |gap| {detail}, {dt:.0f}s")


# 4 -----------------------------------------------------------------------

def _median_time(fn, repeats=3):
    fn()
    ts = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return float(np.median(ts))


def test_criterion_4_spc_speedup():
    t0 = time.perf_counter()
    spec = SceneSpec(num_points=300_000, clusters=60, points_per_cluster=3500, seed=7)
    cloud, boxes = synth_scene(spec)
    n_cand = len(proposal_centric_filter(cloud, boxes, 1.6))
    fps_cfg = SamplerConfig(n=4096, method="fps", extend_radius=1.6)
    spc_cfg = SamplerConfig(n=4096, method="sectorized_fps", sectors=6, extend_radius=1.6)
    t_fps = _median_time(lambda: sample_keypoints(cloud, fps_cfg, boxes, workers=1))
    t_spc = _median_time(lambda: sample_keypoints(cloud, spc_cfg, boxes, workers=4))
    ratio = t_spc / t_fps
    dt = time.perf_counter() - t0
    verdict(4, "SPC (6 sectors, 4 workers) at most 0.5x PC-filter + FPS time",
            n_cand >= 200_000 and ratio <= 0.5 and dt < 120,
            f"{n_cand} candidates, {t_spc * 1e3:.0f} ms vs {t_fps * 1e3:.0f} ms, ratio {ratio:.2f}, "
            f"{os.cpu_count()} cpu(s)")


# 5 -----------------------------------------------------------------------

def test_criterion_5_baseline_ordering():
    rep = suite_report(("fps", "random", "voxelized_fps_voxel", "voxelized_fps_point"))
    avg = {m: float(np.mean([r.cov_avg for r in rep.rows if r.method == f"pc_filter+{m}"]))
           for m in ("voxelized_fps_voxel", "voxelized_fps_point")}
    rnd = rep.mean_coverage("pc_filter+random")[-1]
    fps = rep.mean_coverage("pc_filter+fps")[-1]
    errors = [r.error for r in rep.rows if r.error]
    ok = not errors and avg["voxelized_fps_voxel"] < avg["voxelized_fps_point"] and rnd < fps
    verdict(5, "baseline ordering", ok,
            f"vox-voxel avg {avg['voxelized_fps_voxel']:.4f} < vox-point avg {avg['voxelized_fps_point']:.4f}; "
            f"random@{RADII[-1]} {rnd:.4f} < fps@{RADII[-1]} {fps:.4f}")


# 6 -----------------------------------------------------------------------

def test_criterion_6_vectorpool_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    bad = 0
    for k in range(100):
        n_r = (1, 2, 3)[k % 3]
        c = n_r * int(rng.integers(1, 5))
        N = int(rng.integers(1, 1001))
        M = int(rng.integers(1, 65))
        l = 0.5
        if k % 4 == 0:
            # dyadic lattice: exact arithmetic with many equidistant neighbours
            pts = rng.integers(-16, 17, (N, 3)) * 0.125
            centers = rng.integers(-16, 17, (M, 3)) * 0.125
        else:
            pts = rng.uniform(-2, 2, (N, 3))
            centers = rng.uniform(-2.5, 2.5, (M, 3))
        feats = rng.normal(size=(N, c))
        cfg = VectorPoolConfig.random(c, (3, 3, 3), l, n_r, 8, (16, 8), seed=k)
        if not rel_close(vectorpool_aggregate(centers, pts, feats, cfg), vectorpool_oracle(centers, pts, feats, cfg)):
            bad += 1
    f, _ = interpolate_voxel_features(np.zeros(3), (1, 1, 1), 5.0,
                                      [[1, 0, 0], [0, 2, 0], [0, 0, -4]], [[1.0], [2.0], [4.0]])
    hand_interp = abs(f[0, 0] - 3 / 1.75) < 1e-12
    hand_reduce = channel_reduction([1, 2, 3, 4, 5, 6], 2).tolist() == [5, 7, 9]
    dt = time.perf_counter() - t0
    verdict(6, "VectorPool equals naive oracle", bad == 0 and hand_interp and hand_reduce and dt < 30,
            f"100 instances, {bad} mismatches; 1.714285.. {'ok' if hand_interp else 'WRONG'}; "
            f"[5,7,9] {'ok' if hand_reduce else 'WRONG'}; {dt:.1f}s")


# 7 -----------------------------------------------------------------------

def test_criterion_7_set_abstraction_invariants():
    rng = np.random.default_rng(7)
    perm_bad = trans_bad = empty_bad = 0
    for k in range(100):
        N = int(rng.integers(1, 400))
        M = int(rng.integers(1, 40))
        C = int(rng.integers(0, 6))
        pts = rng.uniform(-3, 3, (N, 3))
        feats = rng.normal(size=(N, C))
        # a few centres far from every point exercise the empty-neighbourhood rule
        centers = np.concatenate([rng.uniform(-3, 3, (M, 3)), rng.uniform(50, 60, (2, 3))])
        radii = sorted(rng.uniform(0.2, 2.0, 2))
        specs = [NeighborhoodSpec(r, N + 1, sample_seed=k) for r in radii]
        mlps = [MlpSpec.random((C + 3, 8, 8), seed=10 * k + j) for j in range(2)]
        out = set_abstraction(centers, pts, specs, mlps, features=feats)

        p = rng.permutation(N)
        if not np.array_equal(out, set_abstraction(centers, pts[p], specs, mlps, features=feats[p])):
            perm_bad += 1
        t = rng.uniform(-100, 100, 3)
        if not rel_close(set_abstraction(centers + t, pts + t, specs, mlps, features=feats), out):
            trans_bad += 1
        if np.any(out[-2:] != 0.0):
            empty_bad += 1
    ok = perm_bad == trans_bad == empty_bad == 0
    verdict(7, "set abstraction invariants", ok,
            f"100 instances; permutation failures {perm_bad}, translation {trans_bad}, empty-block {empty_bad}")


# 8 -----------------------------------------------------------------------

def _pool_scene(rng, k, aggregator):
    raw = PointCloud(rng.uniform(-6, 6, (1500, 3)), rng.normal(size=(1500, 2)))
    levels = [voxelize(PointCloud(raw.coords, rng.normal(size=(1500, 4))),
                       VoxelGridSpec((-6, -6, -6), (0.4, 0.4, 0.4), (30, 30, 30), 1)),
              voxelize(PointCloud(raw.coords, rng.normal(size=(1500, 6))),
                       VoxelGridSpec((-6, -6, -6), (0.4, 0.4, 0.4), (15, 15, 15), 2))]
    bev = BevMap(rng.normal(size=(12, 12, 3)), 1.0, (-6.0, -6.0))
    kp = raw.coords[rng.choice(1500, 64, replace=False)]
    if aggregator == "set_abstraction":
        def src(name, c, level=None):
            return SourceConfig(name, tuple(NeighborhoodSpec(r, 16, k) for r in (0.8, 1.6)),
                                tuple(MlpSpec.random((c + 3, 8), seed=k + j) for j in range(2)), level=level)
    else:
        def src(name, c, level=None):
            red = 2 if c % 2 == 0 else 1
            return SourceConfig(name, vectorpool=tuple(
                VectorPoolConfig.random(c, (2, 2, 2), l, red, 4, (8,), seed=k + j) for j, l in enumerate((0.8, 1.6))
            ), level=level)
    cfg = VsaConfig((src("level1", 4, 0), src("level2", 6, 1)), src("raw", 2), True)
    return raw, levels, bev, kp, cfg, src


def _direct(centers, coords, feats, src, aggregator):
    if aggregator == "set_abstraction":
        return set_abstraction(centers, coords, src.specs, src.mlps, features=feats)
    return np.concatenate([vectorpool_aggregate(centers, coords, feats, vp) for vp in src.vectorpool], axis=1)


def test_criterion_8_pooling_composition():
    rng = np.random.default_rng(8)
    bad = 0
    for k in range(50):
        aggregator = ("set_abstraction", "vectorpool")[k % 2]
        raw, levels, bev, kp, cfg, src = _pool_scene(rng, k, aggregator)

        got = vsa_keypoint_features(kp, raw, levels, bev, cfg, aggregator)
        want = np.concatenate([
            _direct(kp, voxel_centers_metric(levels[0]), levels[0].features, cfg.levels[0], aggregator),
            _direct(kp, voxel_centers_metric(levels[1]), levels[1].features, cfg.levels[1], aggregator),
            _direct(kp, raw.coords, raw.features, cfg.raw, aggregator),
            np.stack([bev_bilinear(bev, p[:2]) for p in kp]),
        ], axis=1)
        bad += not rel_close(got.features, want)

        kf = got.features
        boxes = [Box3D(*rng.uniform(-4, 4, 3), *rng.uniform(1, 4, 3), rng.uniform(-np.pi, np.pi)) for _ in range(3)]
        roi_src = src("roi", kf.shape[1])
        head = MlpSpec.random((8 * roi_src.width(aggregator), 16, 16), seed=k)
        got = roi_grid_pool(boxes, kp, kf, (2, 2, 2), roi_src, head, aggregator)
        want = []
        for b in boxes:
            per_point = _direct(box_grid_points(b, (2, 2, 2)), kp, kf, roi_src, aggregator)
            want.append(mlp_oracle(head, per_point.ravel()))
        bad += not rel_close(got, np.array(want))

    unit = Box3D(0, 0, 0, 1, 1, 1, 0)
    g1 = np.allclose(box_grid_points(Box3D(1, 2, 3, 4, 5, 6, 0.7), (1, 1, 1)), [[1, 2, 3]])
    expect = np.array([[x, y, z] for x in (-0.25, 0.25) for y in (-0.25, 0.25) for z in (-0.25, 0.25)])
    g2 = np.allclose(box_grid_points(unit, (2, 2, 2)), expect, atol=1e-12)
    dims = Box3D(0, 0, 0, 2, 4, 8, 0)
    g3 = np.allclose(np.abs(box_grid_points(dims, (2, 2, 2))), np.tile(0.25 * dims.dims, (8, 1)), atol=1e-12)
    verdict(8, "pooling equals explicit composition", bad == 0 and g1 and g2 and g3,
            f"50 scenes x 2 ops, {bad} mismatches; grid (1,1,1) {'ok' if g1 else 'WRONG'}; "
            f"grid (2,2,2) {'ok' if g2 and g3 else 'WRONG'}")


# 9 -----------------------------------------------------------------------

def _pvk(*args, cwd):
    proc = subprocess.run([sys.executable, "-m", "pvkernels.cli", *args], cwd=cwd,
                          capture_output=True, env={**os.environ, "PVK_THREADS": "1"})
    if proc.returncode != 0:
        raise AssertionError(f"pvk {args[0]} failed ({proc.returncode}): {proc.stderr.decode()}")
    return proc.stdout


def _pipeline(workdir: Path, threads: int) -> tuple[bytes, bytes, bytes]:
    workdir.mkdir()
    _pvk("synth", "--seed", "11", "--out", "scene.pts", cwd=workdir)
    common = ["--input", "scene.pts", "--boxes", "scene.pts.boxes.jsonl", "--threads", str(threads)]
    kp = _pvk("sample", *common, "--method", "sectorized_fps", "--n", "4096", "--sectors", "6",
              "--extend-radius", "1.6", "--seed", "11", "--out", "kp.csv", cwd=workdir)
    cov = _pvk("coverage", *common, "--keypoints", "kp.csv", "--radii", "0.1,0.2,0.3,0.4,0.5", cwd=workdir)
    return (workdir / "scene.pts").read_bytes(), (workdir / "kp.csv").read_bytes(), cov + kp


def test_criterion_9_cli_determinism(tmp_path):
    a = _pipeline(tmp_path / "run1", 1)
    b = _pipeline(tmp_path / "run2", 1)
    c = _pipeline(tmp_path / "run3", 8)
    ok = a == b == c
    verdict(9, "synth -> sample -> coverage byte-identical", ok,
            f"two runs at --threads 1 and one at --threads 8; {len(a[1])} byte keypoint CSV, "
            f"coverage row {a[2].decode().splitlines()[-1]!r}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
