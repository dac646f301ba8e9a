"""Fixed-radius neighbour search shared by the query and coverage kernels.

The numba path hashes the reference points into a uniform grid whose cell is at
least the search radius, so only the 27 cells around a query need scanning.
The numpy path is a chunked brute-force distance matrix.  Both compare squared
Euclidean distances (or Chebyshev offsets) with the same arithmetic, so they
agree exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _accel
from ._accel import njit

EUCLIDEAN = 0
CHEBYSHEV = 1

_CHUNK_ELEMS = 1 << 22
_MASK64 = (1 << 64) - 1


# --------------------------------------------------------------------- grid

def _grid_cell(radius: float, lo: np.ndarray, hi: np.ndarray) -> float:
    # slightly inflated so rounding never puts an in-range point two cells away
    cell = max(float(radius) * (1.0 + 1e-7), 1e-12)
    while True:
        dims = np.floor((hi - lo) / cell) + 1
        if float(np.prod(dims)) < 2.0**62:
            return cell
        cell *= 2.0


@njit
def _grid_build(ref, lo, cell, dims):
    n = ref.shape[0]
    keys = np.empty(n, np.int64)
    for i in range(n):
        cx = np.int64(math.floor((ref[i, 0] - lo[0]) / cell))
        cy = np.int64(math.floor((ref[i, 1] - lo[1]) / cell))
        cz = np.int64(math.floor((ref[i, 2] - lo[2]) / cell))
        keys[i] = (cx * dims[1] + cy) * dims[2] + cz
    order = np.argsort(keys, kind="mergesort")
    sk = keys[order]
    nu = 0
    for i in range(n):
        if i == 0 or sk[i] != sk[i - 1]:
            nu += 1
    ukeys = np.empty(nu, np.int64)
    starts = np.empty(nu + 1, np.int64)
    u = 0
    for i in range(n):
        if i == 0 or sk[i] != sk[i - 1]:
            ukeys[u] = sk[i]
            starts[u] = i
            u += 1
    starts[nu] = n
    return order, ukeys, starts


@njit
def _cell_of(q, lo, cell):
    return (
        np.int64(math.floor((q[0] - lo[0]) / cell)),
        np.int64(math.floor((q[1] - lo[1]) / cell)),
        np.int64(math.floor((q[2] - lo[2]) / cell)),
    )


@njit
def _within(ref, j, q, radius, r2, metric):
    dx = ref[j, 0] - q[0]
    dy = ref[j, 1] - q[1]
    dz = ref[j, 2] - q[2]
    if metric == 0:
        return dx * dx + dy * dy + dz * dz < r2
    return abs(dx) < radius and abs(dy) < radius and abs(dz) < radius


@njit
def _grid_count(queries, ref, lo, cell, dims, order, ukeys, starts, radius, metric):
    m = queries.shape[0]
    r2 = radius * radius
    counts = np.zeros(m, np.int64)
    for i in range(m):
        q = queries[i]
        cx, cy, cz = _cell_of(q, lo, cell)
        c = 0
        for ax in range(cx - 1, cx + 2):
            if ax < 0 or ax >= dims[0]:
                continue
            for ay in range(cy - 1, cy + 2):
                if ay < 0 or ay >= dims[1]:
                    continue
                for az in range(cz - 1, cz + 2):
                    if az < 0 or az >= dims[2]:
                        continue
                    key = (ax * dims[1] + ay) * dims[2] + az
                    u = np.searchsorted(ukeys, key)
                    if u < ukeys.shape[0] and ukeys[u] == key:
                        for t in range(starts[u], starts[u + 1]):
                            if _within(ref, order[t], q, radius, r2, metric):
                                c += 1
        counts[i] = c
    return counts


@njit
def _grid_fill(queries, ref, lo, cell, dims, order, ukeys, starts, radius, metric, offsets):
    m = queries.shape[0]
    r2 = radius * radius
    out = np.empty(offsets[m], np.int64)
    for i in range(m):
        q = queries[i]
        cx, cy, cz = _cell_of(q, lo, cell)
        w = offsets[i]
        for ax in range(cx - 1, cx + 2):
            if ax < 0 or ax >= dims[0]:
                continue
            for ay in range(cy - 1, cy + 2):
                if ay < 0 or ay >= dims[1]:
                    continue
                for az in range(cz - 1, cz + 2):
                    if az < 0 or az >= dims[2]:
                        continue
                    key = (ax * dims[1] + ay) * dims[2] + az
                    u = np.searchsorted(ukeys, key)
                    if u < ukeys.shape[0] and ukeys[u] == key:
                        for t in range(starts[u], starts[u + 1]):
                            j = order[t]
                            if _within(ref, j, q, radius, r2, metric):
                                out[w] = j
                                w += 1
        out[offsets[i]:w] = np.sort(out[offsets[i]:w])
    return out


@njit
def _grid_any(queries, ref, lo, cell, dims, order, ukeys, starts, radius):
    m = queries.shape[0]
    r2 = radius * radius
    hit = np.zeros(m, np.bool_)
    for i in range(m):
        q = queries[i]
        cx, cy, cz = _cell_of(q, lo, cell)
        found = False
        for ax in range(cx - 1, cx + 2):
            if found or ax < 0 or ax >= dims[0]:
                continue
            for ay in range(cy - 1, cy + 2):
                if found or ay < 0 or ay >= dims[1]:
                    continue
                for az in range(cz - 1, cz + 2):
                    if found or az < 0 or az >= dims[2]:
                        continue
                    key = (ax * dims[1] + ay) * dims[2] + az
                    u = np.searchsorted(ukeys, key)
                    if u < ukeys.shape[0] and ukeys[u] == key:
                        for t in range(starts[u], starts[u + 1]):
                            if _within(ref, order[t], q, radius, r2, 0):
                                found = True
                                break
        hit[i] = found
    return hit


class _Grid:
    def __init__(self, ref: np.ndarray, radius: float):
        self.ref = ref
        self.lo = ref.min(axis=0)
        hi = ref.max(axis=0)
        self.cell = _grid_cell(radius, self.lo, hi)
        self.dims = (np.floor((hi - self.lo) / self.cell) + 1).astype(np.int64)
        self.order, self.ukeys, self.starts = _grid_build(ref, self.lo, self.cell, self.dims)

    def args(self):
        return self.ref, self.lo, self.cell, self.dims, self.order, self.ukeys, self.starts


# ------------------------------------------------------------ numpy paths

def _np_mask(q: np.ndarray, ref: np.ndarray, radius: float, metric: int) -> np.ndarray:
    dx = ref[None, :, 0] - q[:, None, 0]
    dy = ref[None, :, 1] - q[:, None, 1]
    dz = ref[None, :, 2] - q[:, None, 2]
    if metric == EUCLIDEAN:
        return dx * dx + dy * dy + dz * dz < radius * radius
    return (np.abs(dx) < radius) & (np.abs(dy) < radius) & (np.abs(dz) < radius)


def _chunk_rows(n_ref: int) -> int:
    return max(1, _CHUNK_ELEMS // max(n_ref, 1))


def _np_neighbors(queries, ref, radius, metric):
    counts = np.zeros(queries.shape[0], np.int64)
    cols = []
    step = _chunk_rows(ref.shape[0])
    for s in range(0, queries.shape[0], step):
        rows, c = np.nonzero(_np_mask(queries[s:s + step], ref, radius, metric))
        counts[s:s + step] = np.bincount(rows, minlength=min(step, queries.shape[0] - s))
        cols.append(c)
    idx = np.concatenate(cols).astype(np.int64) if cols else np.zeros(0, np.int64)
    return counts, idx


def _np_any(queries, ref, radius):
    hit = np.zeros(queries.shape[0], bool)
    step = _chunk_rows(ref.shape[0])
    for s in range(0, queries.shape[0], step):
        hit[s:s + step] = _np_mask(queries[s:s + step], ref, radius, EUCLIDEAN).any(axis=1)
    return hit


# ------------------------------------------------------------- public API

def _split(m: int, workers: int):
    workers = max(1, min(int(workers), m))
    bounds = np.linspace(0, m, workers + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def map_chunks(fn, m: int, workers: int):
    """Run ``fn(start, stop)`` over contiguous row chunks; results keep chunk order."""
    chunks = _split(m, workers)
    if len(chunks) <= 1:
        return [fn(0, m)]
    with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
        return list(ex.map(lambda ab: fn(*ab), chunks))


def radius_neighbors(queries, ref, radius: float, metric: int = EUCLIDEAN, workers: int = 1):
    """All reference indices strictly within ``radius`` of each query.

    Returns CSR arrays ``(offsets, indices)``; each query's indices ascend.
    With ``metric=CHEBYSHEV`` the test is ``max |offset| < radius``.
    """
    queries = np.ascontiguousarray(queries, dtype=np.float64).reshape(-1, 3)
    ref = np.ascontiguousarray(ref, dtype=np.float64).reshape(-1, 3)
    m = queries.shape[0]
    if m == 0 or ref.shape[0] == 0:
        return np.zeros(m + 1, np.int64), np.zeros(0, np.int64)

    if _accel.use_numba():
        grid = _Grid(ref, radius)

        def run(a, b):
            q = queries[a:b]
            counts = _grid_count(q, *grid.args(), float(radius), metric)
            offs = np.zeros(b - a + 1, np.int64)
            np.cumsum(counts, out=offs[1:])
            return counts, _grid_fill(q, *grid.args(), float(radius), metric, offs)
    else:
        def run(a, b):
            return _np_neighbors(queries[a:b], ref, float(radius), metric)

    parts = map_chunks(run, m, workers)
    counts = np.concatenate([p[0] for p in parts])
    offsets = np.zeros(m + 1, np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, np.concatenate([p[1] for p in parts])


def any_within(queries, ref, radius: float, workers: int = 1) -> np.ndarray:
    """Mask of queries having at least one reference point strictly within ``radius``."""
    queries = np.ascontiguousarray(queries, dtype=np.float64).reshape(-1, 3)
    ref = np.ascontiguousarray(ref, dtype=np.float64).reshape(-1, 3)
    if queries.shape[0] == 0 or ref.shape[0] == 0:
        return np.zeros(queries.shape[0], bool)
    if _accel.use_numba():
        grid = _Grid(ref, radius)
        fn = lambda a, b: _grid_any(queries[a:b], *grid.args(), float(radius))
    else:
        fn = lambda a, b: _np_any(queries[a:b], ref, float(radius))
    return np.concatenate(map_chunks(fn, queries.shape[0], workers))


# --------------------------------------------------------------- hashing

@njit
def _mix64(x):
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _np_mix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def hash_keys(seed: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Deterministic pseudo-random 64-bit key per (seed, row, col) triple."""
    s = _np_mix64(np.array([int(seed) & _MASK64], dtype=np.uint64))[0]
    r = _np_mix64(np.asarray(rows).astype(np.uint64) ^ s)
    return _np_mix64(r ^ np.asarray(cols).astype(np.uint64))


@njit
def _subsample_kernel(offsets, indices, limit, seed_key):
    m = offsets.shape[0] - 1
    new_off = np.zeros(m + 1, np.int64)
    for i in range(m):
        new_off[i + 1] = new_off[i] + min(offsets[i + 1] - offsets[i], limit)
    out = np.empty(new_off[m], np.int64)
    for i in range(m):
        a = offsets[i]
        b = offsets[i + 1]
        if b - a <= limit:
            out[new_off[i]:new_off[i + 1]] = indices[a:b]
            continue
        rk = _mix64(np.uint64(i) ^ seed_key)
        keys = np.empty(b - a, np.uint64)
        for t in range(a, b):
            keys[t - a] = _mix64(rk ^ np.uint64(indices[t]))
        pick = np.argsort(keys, kind="mergesort")[:limit]
        chosen = np.sort(indices[a:b][pick])
        out[new_off[i]:new_off[i + 1]] = chosen
    return new_off, out


def subsample_neighbors(offsets, indices, limit: int, seed: int):
    """Keep at most ``limit`` entries per row, chosen by a seeded hash ranking.

    Each row's subset is a uniformly random ``limit``-subset that depends only on
    ``(seed, row, index)``, so chunking and worker count cannot change it.
    Kept indices stay ascending.
    """
    counts = np.diff(offsets)
    if counts.size == 0 or counts.max() <= limit:
        return offsets, indices
    if _accel.use_numba():
        seed_key = _np_mix64(np.array([int(seed) & _MASK64], dtype=np.uint64))[0]
        return _subsample_kernel(offsets, indices, int(limit), seed_key)
    rows = np.repeat(np.arange(counts.size), counts)
    keys = hash_keys(seed, rows, indices)
    order = np.lexsort((keys, rows))
    rank = np.arange(indices.size) - np.repeat(offsets[:-1], counts)
    keep = np.zeros(indices.size, bool)
    keep[order[rank < limit]] = True
    kept_rows = rows[keep]
    kept = indices[keep]
    resort = np.lexsort((kept, kept_rows))
    new_counts = np.minimum(counts, limit)
    new_off = np.zeros_like(offsets)
    np.cumsum(new_counts, out=new_off[1:])
    return new_off, kept[resort]
