"""VectorPool aggregation: interpolated local voxels with per-voxel kernels."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .. import _accel
from .._accel import njit
from ..errors import ArgumentError, ConfigurationError
from .mlp import MlpSpec
from .query import cube_query_batch
from .set_abstraction import lexicographic_rank


@dataclass(frozen=True, eq=False)
class VectorPoolConfig:
    """Parameters of one VectorPool operator.

    ``voxel_kernels`` is ``V x (9 + C_r1) x C_r2`` with ``V = nx * ny * nz`` in
    (ix, iy, iz) row-major order; ``out_mlp`` maps ``V * C_r2`` to the output.
    """

    grid: tuple
    half_length: float
    reduction: int
    voxel_kernels: np.ndarray
    out_mlp: MlpSpec
    pos_fusion: str = "concat"

    def __post_init__(self):
        grid = tuple(int(g) for g in self.grid)
        if len(grid) != 3 or min(grid) < 1:
            raise ConfigurationError(f"grid needs three counts >= 1, got {self.grid}")
        if not self.half_length > 0:
            raise ConfigurationError(f"half length must be positive, got {self.half_length}")
        if int(self.reduction) < 1:
            raise ConfigurationError(f"reduction factor must be >= 1, got {self.reduction}")
        if self.pos_fusion != "concat":
            raise ConfigurationError(f"only concat position fusion is supported, got {self.pos_fusion!r}")
        k = np.array(self.voxel_kernels, dtype=np.float64)
        v = grid[0] * grid[1] * grid[2]
        if k.ndim != 3 or k.shape[0] != v or k.shape[1] < 9:
            raise ConfigurationError(f"expected {v} kernels of shape (9 + C_r1) x C_r2, got {k.shape}")
        if self.out_mlp.in_dim != v * k.shape[2]:
            raise ConfigurationError(
                f"out_mlp takes {self.out_mlp.in_dim} inputs, local vector has {v * k.shape[2]}"
            )
        k.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "half_length", float(self.half_length))
        object.__setattr__(self, "reduction", int(self.reduction))
        object.__setattr__(self, "voxel_kernels", k)

    @property
    def num_voxels(self) -> int:
        return self.grid[0] * self.grid[1] * self.grid[2]

    @property
    def reduced_channels(self) -> int:
        return self.voxel_kernels.shape[1] - 9

    @property
    def in_channels(self) -> int:
        return self.reduced_channels * self.reduction

    @property
    def kernel_channels(self) -> int:
        return self.voxel_kernels.shape[2]

    @property
    def out_dim(self) -> int:
        return self.out_mlp.out_dim

    @classmethod
    def random(cls, in_channels: int, grid=(3, 3, 3), half_length: float = 1.0, reduction: int = 1,
               kernel_channels: int = 32, out_dims=(128, 128), seed: int = 0) -> "VectorPoolConfig":
        if in_channels % reduction:
            raise ConfigurationError(f"{in_channels} channels are not divisible by reduction {reduction}")
        rng = np.random.default_rng(seed)
        v = int(np.prod(grid))
        cr1 = in_channels // reduction
        kernels = rng.normal(0.0, np.sqrt(1.0 / (9 + cr1)), (v, 9 + cr1, kernel_channels))
        mlp = MlpSpec.random((v * kernel_channels, *out_dims), seed=seed + 1)
        return cls(tuple(grid), half_length, reduction, kernels, mlp)

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "half_length": self.half_length,
            "reduction": self.reduction,
            "pos_fusion": self.pos_fusion,
            "voxel_kernels": {"shape": list(self.voxel_kernels.shape), "data": self.voxel_kernels.ravel().tolist()},
            "out_mlp": self.out_mlp.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VectorPoolConfig":
        try:
            k = np.asarray(d["voxel_kernels"]["data"], dtype=np.float64).reshape(d["voxel_kernels"]["shape"])
            return cls(tuple(d["grid"]), float(d["half_length"]), int(d["reduction"]), k,
                       MlpSpec.from_dict(d["out_mlp"]), d.get("pos_fusion", "concat"))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigurationError(f"malformed VectorPool document: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "VectorPoolConfig":
        return cls.from_dict(json.loads(text))


def channel_reduction(features, n_r: int) -> np.ndarray:
    """Sum every ``n_r``-th channel group: ``out[k] = sum_j in[j * C_r1 + k]``."""
    f = np.asarray(features, dtype=np.float64)
    c_in = f.shape[-1]
    if n_r < 1 or c_in % n_r:
        raise ArgumentError(f"{c_in} channels are not divisible by reduction factor {n_r}")
    if n_r == 1:
        return f.copy()
    return f.reshape(*f.shape[:-1], n_r, c_in // n_r).sum(axis=-2)


def local_voxel_offsets(grid, half_length: float) -> np.ndarray:
    """Offsets of local voxel centres from the cube centre, (ix, iy, iz) row-major."""
    axes = [((np.arange(n) + 0.5) / n - 0.5) * 2.0 * half_length for n in grid]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)


# ------------------------------------------------------------ interpolation

@njit
def _interp_kernel(centers, offsets, indices, coords, feats, rank, vox):
    m = centers.shape[0]
    V = vox.shape[0]
    C = feats.shape[1]
    out_f = np.zeros((m, V, C))
    out_r = np.zeros((m, V, 9))
    bd = np.empty(3)
    br = np.empty(3, np.int64)
    bj = np.empty(3, np.int64)
    w = np.empty(3)
    for i in range(m):
        a = offsets[i]
        b = offsets[i + 1]
        if a == b:
            continue
        for v in range(V):
            vx = centers[i, 0] + vox[v, 0]
            vy = centers[i, 1] + vox[v, 1]
            vz = centers[i, 2] + vox[v, 2]
            nsel = 0
            for t in range(a, b):
                j = indices[t]
                dx = coords[j, 0] - vx
                dy = coords[j, 1] - vy
                dz = coords[j, 2] - vz
                d2 = dx * dx + dy * dy + dz * dz
                r = rank[j]
                pos = nsel
                while pos > 0 and (d2 < bd[pos - 1] or (d2 == bd[pos - 1] and r < br[pos - 1])):
                    pos -= 1
                if pos >= 3:
                    continue
                last = min(nsel, 2)
                for q in range(last, pos, -1):
                    bd[q] = bd[q - 1]
                    br[q] = br[q - 1]
                    bj[q] = bj[q - 1]
                bd[pos] = d2
                br[pos] = r
                bj[pos] = j
                if nsel < 3:
                    nsel += 1
            for q in range(nsel):
                j = bj[q]
                out_r[i, v, 3 * q + 0] = coords[j, 0] - vx
                out_r[i, v, 3 * q + 1] = coords[j, 1] - vy
                out_r[i, v, 3 * q + 2] = coords[j, 2] - vz
            if bd[0] == 0.0:
                nz = 0
                for q in range(nsel):
                    if bd[q] == 0.0:
                        nz += 1
                for c in range(C):
                    s = 0.0
                    for q in range(nz):
                        s += feats[bj[q], c]
                    out_f[i, v, c] = s / nz
                continue
            den = 0.0
            for q in range(nsel):
                w[q] = 1.0 / math.sqrt(bd[q])
                den += w[q]
            for c in range(C):
                num = 0.0
                for q in range(nsel):
                    num += w[q] * feats[bj[q], c]
                out_f[i, v, c] = num / den
    return out_f, out_r


def _interp_numpy(centers, offsets, indices, coords, feats, rank, vox):
    m = centers.shape[0]
    V = vox.shape[0]
    C = feats.shape[1]
    out_f = np.zeros((m, V, C))
    out_r = np.zeros((m, V, 9))
    for i in range(m):
        idx = indices[offsets[i]:offsets[i + 1]]
        if idx.size == 0:
            continue
        vc = centers[i] + vox                                   # V x 3
        diff = coords[idx][None, :, :] - vc[:, None, :]         # V x K x 3
        d2 = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1] + diff[..., 2] * diff[..., 2]
        r = np.broadcast_to(rank[idx], d2.shape)
        k = min(3, idx.size)
        sel = np.lexsort((r, d2), axis=-1)[:, :k]               # V x k
        sd2 = np.take_along_axis(d2, sel, axis=1)
        sdiff = np.take_along_axis(diff, sel[..., None], axis=1)
        out_r[i, :, :3 * k] = sdiff.reshape(V, 3 * k)
        sf = feats[idx][sel]                                    # V x k x C
        zero = sd2 == 0.0
        singular = zero[:, 0]
        regular = ~singular
        if regular.any():
            w = 1.0 / np.sqrt(sd2[regular])
            num = np.zeros((int(regular.sum()), C))
            den = np.zeros(int(regular.sum()))
            for q in range(k):
                num += w[:, q, None] * sf[regular, q]
                den += w[:, q]
            out_f[i, regular] = num / den[:, None]
        if singular.any():
            z = zero[singular]
            nz = z.sum(axis=1)
            s = np.zeros((int(singular.sum()), C))
            for q in range(k):
                s += np.where(z[:, q, None], sf[singular, q], 0.0)
            out_f[i, singular] = s / nz[:, None]
    return out_f, out_r


def interpolate_batch(centers, nb, coords, feats, grid, half_length, rank=None):
    """Inverse-distance 3-NN features and neighbour offsets for every local voxel.

    Returns ``(features M x V x C, rel_pos M x V x 9)``.  Neighbours are ranked
    by distance, then lexicographic coordinates; a neighbour sitting on the
    voxel centre takes the whole weight (coincident ones are averaged).
    """
    centers = np.ascontiguousarray(centers, dtype=np.float64).reshape(-1, 3)
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    if rank is None:
        rank = lexicographic_rank(coords)
    vox = local_voxel_offsets(grid, half_length)
    fn = _interp_kernel if _accel.use_numba() else _interp_numpy
    return fn(centers, nb.offsets, nb.indices, coords, feats, rank, vox)


def interpolate_voxel_features(center, grid, half_length: float, neighbor_coords, neighbor_features):
    """Single-centre form of :func:`interpolate_batch` over an explicit neighbour set."""
    from .query import Neighborhoods

    nc = np.asarray(neighbor_coords, dtype=np.float64).reshape(-1, 3)
    nf = np.asarray(neighbor_features, dtype=np.float64)
    nf = nf.reshape(nc.shape[0], -1) if nf.ndim != 2 else nf
    if nf.shape[0] != nc.shape[0]:
        raise ArgumentError(f"{nc.shape[0]} neighbour coordinates but {nf.shape[0]} feature rows")
    if min(int(g) for g in grid) < 1:
        raise ArgumentError(f"grid counts must be >= 1, got {grid}")
    nb = Neighborhoods(np.array([0, nc.shape[0]], np.int64), np.arange(nc.shape[0], dtype=np.int64))
    f, r = interpolate_batch(np.asarray(center, dtype=np.float64)[None], nb, nc, nf, grid, half_length)
    return f[0], r[0]


def position_specific_encode(payload, kernels) -> np.ndarray:
    """``payload[..., v, :] @ kernels[v]`` for every local voxel ``v``."""
    payload = np.asarray(payload, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    if payload.shape[-2] != kernels.shape[0] or payload.shape[-1] != kernels.shape[1]:
        raise ConfigurationError(
            f"payload {payload.shape[-2:]} does not match kernels {kernels.shape[:2]}"
        )
    lead = payload.shape[:-2]
    p = payload.reshape(-1, *payload.shape[-2:])
    out = np.matmul(p.transpose(1, 0, 2), kernels).transpose(1, 0, 2)
    return out.reshape(*lead, kernels.shape[0], kernels.shape[2])


def vectorpool_local_vector(centers, points, features, cfg: VectorPoolConfig, workers: int = 1):
    """Concatenated per-voxel encodings before ``out_mlp``.

    Returns ``(vectors M x (V * C_r2), nonempty mask M)``.
    """
    centers = np.ascontiguousarray(centers, dtype=np.float64).reshape(-1, 3)
    coords = np.ascontiguousarray(getattr(points, "coords", points), dtype=np.float64)
    feats = np.asarray(features, dtype=np.float64).reshape(coords.shape[0], -1)
    if feats.shape[1] != cfg.in_channels:
        raise ConfigurationError(
            f"VectorPool expects {cfg.in_channels} input channels, got {feats.shape[1]}"
        )
    reduced = channel_reduction(feats, cfg.reduction)
    nb = cube_query_batch(centers, coords, cfg.half_length, workers)
    f, r = interpolate_batch(centers, nb, coords, reduced, cfg.grid, cfg.half_length)
    payload = np.concatenate([r, f], axis=2)
    u = position_specific_encode(payload, cfg.voxel_kernels)
    return u.reshape(centers.shape[0], -1), nb.counts > 0


def vectorpool_aggregate(centers, points, features, cfg: VectorPoolConfig, workers: int = 1) -> np.ndarray:
    """VectorPool features for each centre, ``M x cfg.out_dim``.

    Centres with no point inside the doubled cube output zeros directly.
    """
    vec, nonempty = vectorpool_local_vector(centers, points, features, cfg, workers)
    out = np.zeros((vec.shape[0], cfg.out_dim))
    if nonempty.any():
        out[nonempty] = cfg.out_mlp(vec[nonempty])
    return out
