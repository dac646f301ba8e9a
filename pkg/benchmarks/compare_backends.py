"""Time the numba kernels against the numpy fallback and check they agree.

    python3 benchmarks/compare_backends.py [--points 50000] [--repeats 3]
"""
import argparse

import numpy as np

from pvkernels import available_backends, using_backend
from pvkernels.aggregation import NeighborhoodSpec, VectorPoolConfig, ball_query, vectorpool_aggregate
from pvkernels.bench import SceneSpec, synth_scene, time_call
from pvkernels.sampling import coverage_rate, fps_indices


def cases(xyz, feats, n_keypoints):
    keypoints = xyz[:: max(1, len(xyz) // n_keypoints)][:n_keypoints]
    vp = VectorPoolConfig.random(feats.shape[1], (3, 3, 3), 0.8, 1, 16, (32,), seed=1)
    spec = NeighborhoodSpec(0.8, 16, sample_seed=1)
    return {
        "fps": lambda: fps_indices(xyz, n_keypoints),
        "coverage": lambda: np.array([coverage_rate(xyz, keypoints, r) for r in (0.2, 0.5, 1.0)]),
        "ball_query": lambda: ball_query(keypoints, xyz, spec).indices,
        "vectorpool": lambda: vectorpool_aggregate(keypoints, xyz, feats, vp),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=50_000)
    ap.add_argument("--keypoints", type=int, default=2048)
    ap.add_argument("--repeats", type=int, default=3)
    a = ap.parse_args()

    cloud, _ = synth_scene(SceneSpec(num_points=a.points, clusters=10,
                                     points_per_cluster=a.points // 20, noise_points=0, seed=0))
    xyz, feats = cloud.coords, cloud.features
    backends = available_backends()
    timings, outputs = {}, {}
    for b in backends:
        with using_backend(b):
            for name, fn in cases(xyz, feats, a.keypoints).items():
                fn()  # warm up compilation
                timings[name, b], outputs[name, b] = time_call(fn, a.repeats)

    print(f"{'kernel':<12}" + "".join(f"{b + ' ms':>12}" for b in backends) + "   agree")
    for name in cases(xyz, feats, 1):
        same = all(np.array_equal(outputs[name, backends[0]], outputs[name, b]) for b in backends)
        print(f"{name:<12}" + "".join(f"{timings[name, b]:>12.1f}" for b in backends) + f"   {same}")


if __name__ == "__main__":
    main()
