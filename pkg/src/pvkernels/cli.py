"""Command line entry point: ``pvk <subcommand>``.

Exit codes: 0 success, 2 bad arguments or missing inputs, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import _accel
from .aggregation.mlp import MlpSpec
from .aggregation.query import NeighborhoodSpec
from .aggregation.vectorpool import VectorPoolConfig
from .bench.harness import DEFAULT_KERNEL_CASES, COVERAGE_RADII, run_kernel_bench, run_sampler_bench
from .bench.report import write_table
from .bench.scene import SceneSpec, synth_scene
from .core.io import FORMATS, load_boxes, load_point_cloud, save_boxes, save_point_cloud
from .errors import ArgumentError, ConfigurationError
from .pooling.vsa import AGGREGATORS, SourceConfig, aggregate_source
from .sampling.config import METHODS, SamplerConfig, sample_keypoints
from .sampling.coverage import coverage_rate
from .sampling.spc import proposal_centric_filter


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        try:
            p, c = part.lower().split("x")
            out.append((int(p), int(c)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"sizes look like 4096x21600, got {part!r}") from None
    return out


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PVK_THREADS", "1")))
    except ValueError:
        return 1


def _existing(path) -> Path:
    p = Path(path)
    if not p.exists() or p.is_dir():
        raise UsageError(f"input file not found: {p}")
    return p


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# ------------------------------------------------------------- keypoints io

KEYPOINT_COLUMNS = ["index", "x", "y", "z"]


def write_keypoints(ks) -> str:
    recs = [[int(i), float(x), float(y), float(z)] for i, (x, y, z) in zip(ks.indices, ks.coords)]
    return write_table(KEYPOINT_COLUMNS, recs)


def read_keypoints(path) -> tuple[np.ndarray, np.ndarray]:
    with open(_existing(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[-3:]] != ["x", "y", "z"]:
            raise ArgumentError(f"{path}: expected a keypoint CSV ending in x,y,z columns")
        rows = [r for r in reader if r]
    idx = np.array([int(r[0]) for r in rows], np.int64) if "index" in header else np.full(len(rows), -1)
    xyz = np.array([[float(v) for v in r[-3:]] for r in rows]).reshape(-1, 3)
    return idx, xyz


# ---------------------------------------------------------------- commands

def cmd_synth(a) -> None:
    spec = SceneSpec(num_points=a.num_points, clusters=a.clusters, points_per_cluster=a.points_per_cluster,
                     noise_points=a.noise_points, extent=a.extent, seed=a.seed)
    cloud, boxes = synth_scene(spec)
    save_point_cloud(cloud, a.out, a.format)
    save_boxes(boxes, a.boxes or f"{a.out}.boxes.jsonl")


def _sampler_cfg(a, method=None) -> SamplerConfig:
    return SamplerConfig(
        n=a.n, method=method or a.method, sectors=a.sectors, extend_radius=a.extend_radius,
        voxel_size=a.voxel_size, seed=a.seed, pc_filter=not a.no_pc_filter, groups=a.groups,
    )


def cmd_sample(a) -> None:
    cloud = load_point_cloud(_existing(a.input), a.format)
    boxes = load_boxes(_existing(a.boxes)) if a.boxes else []
    ks = sample_keypoints(cloud, _sampler_cfg(a), boxes, a.threads)
    _emit(write_keypoints(ks), a.out)


def cmd_coverage(a) -> None:
    cloud = load_point_cloud(_existing(a.input), a.format)
    _, kp = read_keypoints(a.keypoints)
    pts = cloud.coords
    if a.boxes:
        pts = pts[proposal_centric_filter(pts, load_boxes(_existing(a.boxes)), a.extend_radius)]
    cov = [coverage_rate(pts, kp, r, a.threads) for r in a.radii]
    cols = ["points", "keypoints", *(f"cov@{r!r}" for r in a.radii), "cov_avg"]
    _emit(write_table(cols, [[len(pts), len(kp), *cov, sum(cov) / len(cov)]], a.out_format), a.out)


def cmd_bench_samplers(a) -> None:
    methods = a.methods.split(",")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
    if a.input:
        cloud = load_point_cloud(_existing(a.input), a.format)
        boxes = load_boxes(_existing(a.boxes)) if a.boxes else []
        scenes = [(Path(a.input).name, cloud, boxes)]
    else:
        scenes = []
        for k in range(a.scenes):
            spec = SceneSpec(num_points=a.num_points, seed=a.seed + k)
            cloud, boxes = synth_scene(spec)
            scenes.append((f"synth-{a.seed + k}", cloud, boxes))
    cfgs = [_sampler_cfg(a, m) for m in methods]
    report = run_sampler_bench(scenes, cfgs, a.radii, a.repeats, a.threads)
    _emit(report.to_json() if a.out_format == "json" else report.to_csv(), a.out)


def cmd_bench_kernels(a) -> None:
    backends = a.backends.split(",") if a.backends else None
    for b in backends or []:
        if b not in _accel.available_backends():
            raise UsageError(f"backend {b!r} unavailable; have {_accel.available_backends()}")
    cases = [c for c in DEFAULT_KERNEL_CASES if a.kernels is None or c.kind in a.kernels.split(",")]
    cols, rows, _ = run_kernel_bench(cases, a.sizes, a.seed, a.repeats, a.threads, backends)
    _emit(write_table(cols, rows, a.out_format), a.out)


def default_aggregate_config(channels: int, aggregator: str, seed: int) -> dict:
    """Raw-point settings: radii / half lengths (0.4, 0.8); 2x2x2 voxels, no reduction."""
    rng = np.random.default_rng(seed)
    if aggregator == "vectorpool":
        vps = [VectorPoolConfig.random(channels, (2, 2, 2), l, 1, 16, (32, 32), int(rng.integers(2**31)))
               for l in (0.4, 0.8)]
        return {"aggregator": "vectorpool", "vectorpool": [v.to_dict() for v in vps]}
    mlps = [MlpSpec.random((channels + 3, 16, 16), int(rng.integers(2**31))) for _ in range(2)]
    return {"aggregator": "set_abstraction", "radii": [0.4, 0.8], "max_samples": [16, 16],
            "seeds": [int(rng.integers(2**31)) for _ in range(2)], "mlps": [m.to_dict() for m in mlps]}


def source_from_config(doc: dict) -> tuple[str, SourceConfig]:
    try:
        return _source_from_config(doc)
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed aggregator config: missing or invalid {exc}") from None


def _source_from_config(doc: dict) -> tuple[str, SourceConfig]:
    agg = doc.get("aggregator")
    if agg not in AGGREGATORS:
        raise ConfigurationError(f"config aggregator must be one of {AGGREGATORS}, got {agg!r}")
    if agg == "vectorpool":
        return agg, SourceConfig("points", vectorpool=tuple(VectorPoolConfig.from_dict(d) for d in doc["vectorpool"]))
    radii = doc["radii"]
    samples = doc.get("max_samples", [16] * len(radii))
    seeds = doc.get("seeds", [0] * len(radii))
    specs = tuple(NeighborhoodSpec(r, t, s) for r, t, s in zip(radii, samples, seeds))
    return agg, SourceConfig("points", specs, tuple(MlpSpec.from_dict(m) for m in doc["mlps"]))


def cmd_aggregate(a) -> None:
    cloud = load_point_cloud(_existing(a.input), a.format)
    _, centers = read_keypoints(a.centers)
    if a.config:
        doc = json.loads(_existing(a.config).read_text())
    else:
        doc = default_aggregate_config(cloud.num_features, a.aggregator, a.seed)
    if a.write_config:
        Path(a.write_config).write_text(json.dumps(doc) + "\n")
    agg, src = source_from_config(doc)
    feats = aggregate_source(centers, cloud.coords, cloud.features, src, agg, a.threads)
    cols = [f"f{k}" for k in range(feats.shape[1])]
    _emit(write_table(cols, feats.tolist(), a.out_format), a.out)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pvk", description="Point-cloud sampling and aggregation kernels.")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker threads (default: $PVK_THREADS or 1)")
    common.add_argument("--format", choices=FORMATS, default="pts", help="point file format")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--out-format", choices=("csv", "json"), default="csv")

    sampler = argparse.ArgumentParser(add_help=False)
    sampler.add_argument("--n", type=int, default=4096)
    sampler.add_argument("--sectors", type=int, default=6)
    sampler.add_argument("--extend-radius", type=float, default=1.6)
    sampler.add_argument("--voxel-size", type=float, default=0.2)
    sampler.add_argument("--groups", type=int, default=None, help="random_parallel_fps group count")
    sampler.add_argument("--no-pc-filter", action="store_true", help="sample from the whole cloud")

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic LiDAR-like scene")
    s.add_argument("--num-points", type=int, default=100_000)
    s.add_argument("--clusters", type=int, default=SceneSpec.clusters)
    s.add_argument("--points-per-cluster", type=int, default=SceneSpec.points_per_cluster)
    s.add_argument("--noise-points", type=int, default=SceneSpec.noise_points)
    s.add_argument("--extent", type=float, default=SceneSpec.extent)
    s.add_argument("--boxes", default=None, help="boxes output (default: <out>.boxes.jsonl)")
    s.set_defaults(func=cmd_synth, needs_out=True)

    s = sub.add_parser("sample", parents=[common, sampler], help="sample keypoints from a point file")
    s.add_argument("--input", required=True)
    s.add_argument("--boxes", default=None, help="proposal boxes (JSON lines)")
    s.add_argument("--method", choices=METHODS, default="sectorized_fps")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("coverage", parents=[common], help="coverage rate of keypoints over a cloud")
    s.add_argument("--input", required=True)
    s.add_argument("--keypoints", required=True, help="keypoint CSV written by `sample`")
    s.add_argument("--radii", type=_float_list, default=list(COVERAGE_RADII))
    s.add_argument("--boxes", default=None, help="restrict to the proposal-centric subset of these boxes")
    s.add_argument("--extend-radius", type=float, default=1.6)
    s.set_defaults(func=cmd_coverage)

    s = sub.add_parser("bench-samplers", parents=[common, sampler], help="runtime and coverage per sampler")
    s.add_argument("--methods", default=",".join(METHODS))
    s.add_argument("--scenes", type=int, default=3)
    s.add_argument("--num-points", type=int, default=100_000)
    s.add_argument("--input", default=None, help="benchmark one point file instead of synthetic scenes")
    s.add_argument("--boxes", default=None)
    s.add_argument("--radii", type=_float_list, default=list(COVERAGE_RADII))
    s.add_argument("--repeats", type=int, default=3)
    s.set_defaults(func=cmd_bench_samplers)

    s = sub.add_parser("bench-kernels", parents=[common], help="set abstraction vs VectorPool timing")
    s.add_argument("--sizes", type=_sizes, default=[(4096, 21600)], help="points x centres, e.g. 4096x21600")
    s.add_argument("--kernels", default=None, help="set_abstraction,vectorpool")
    s.add_argument("--backends", default=None, help="numba,numpy (default: active backend)")
    s.add_argument("--repeats", type=int, default=3)
    s.set_defaults(func=cmd_bench_kernels)

    s = sub.add_parser("aggregate", parents=[common], help="aggregate point features onto centres")
    s.add_argument("--input", required=True)
    s.add_argument("--centers", required=True, help="CSV with x,y,z columns (e.g. `sample` output)")
    s.add_argument("--config", default=None, help="aggregator JSON document")
    s.add_argument("--aggregator", choices=AGGREGATORS, default="vectorpool",
                   help="used when no --config is given")
    s.add_argument("--write-config", default=None, help="save the configuration actually used")
    s.set_defaults(func=cmd_aggregate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "needs_out", False) and not args.out:
        parser.error(f"{args.command}: --out is required")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        args.func(args)
    except (UsageError, FileNotFoundError, ArgumentError, ConfigurationError) as exc:
        print(f"pvk {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"pvk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
