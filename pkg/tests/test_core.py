import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import point_in_box_oracle
from pvkernels.core import (
    Box3D,
    PointCloud,
    SparseVoxelSet,
    VoxelGridSpec,
    box_grid_points,
    load_boxes,
    load_point_cloud,
    normalize_yaw,
    point_in_box,
    points_in_boxes,
    save_boxes,
    save_point_cloud,
    voxel_centers_metric,
    voxelize,
)
from pvkernels.errors import ArgumentError, ConfigurationError, FormatError

finite = st.floats(-50, 50, allow_nan=False)


# ---------------------------------------------------------------- types

def test_point_cloud_is_immutable_float64():
    pc = PointCloud(np.zeros((4, 3), np.float32), np.ones((4, 2)))
    assert pc.coords.dtype == np.float64 and len(pc) == 4 and pc.num_features == 2
    with pytest.raises(ValueError):
        pc.coords[0, 0] = 1.0


def test_point_cloud_rejects_mismatch_and_nonfinite():
    with pytest.raises(ArgumentError):
        PointCloud(np.zeros((3, 3)), np.zeros((2, 1)))
    with pytest.raises(ArgumentError):
        PointCloud(np.array([[0.0, np.nan, 0.0]]))


def test_point_cloud_defaults_to_zero_channels():
    assert PointCloud(np.zeros((5, 3))).features.shape == (5, 0)


@pytest.mark.parametrize("yaw, want", [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi),
                                       (3 * math.pi, math.pi), (2 * math.pi + 0.5, 0.5)])
def test_yaw_is_normalized_into_half_open_interval(yaw, want):
    assert normalize_yaw(yaw) == pytest.approx(want)
    assert -math.pi < Box3D(0, 0, 0, 1, 1, 1, yaw).yaw <= math.pi


def test_box_requires_positive_dims():
    with pytest.raises(ArgumentError):
        Box3D(0, 0, 0, 1, 0, 1)


def test_box_dict_round_trip():
    b = Box3D(1, 2, 3, 4, 5, 6, 0.25)
    assert Box3D(**b.to_dict()) == b


@pytest.mark.parametrize("kw", [dict(voxel_size=(0.1, 0, 0.1)), dict(voxel_size=(-1, 1, 1)),
                                dict(extent=(0, 1, 1)), dict(stride=0)])
def test_invalid_grid_spec_is_a_configuration_error(kw):
    with pytest.raises(ConfigurationError):
        VoxelGridSpec(**kw)


def test_sparse_voxel_set_rejects_duplicates_and_out_of_range():
    spec = VoxelGridSpec(extent=(2, 2, 2))
    with pytest.raises(ArgumentError):
        SparseVoxelSet([[0, 0, 0], [0, 0, 0]], [[1.0], [2.0]], spec)
    with pytest.raises(ArgumentError):
        SparseVoxelSet([[2, 0, 0]], [[1.0]], spec)


# ------------------------------------------------------------ voxelize

SPEC = VoxelGridSpec((0, 0, 0), (0.1, 0.1, 0.1), (10, 10, 10), 1)


def test_voxelize_single_point():
    vs = voxelize(PointCloud([[0.05, 0.05, 0.05]], [[7.0]]), SPEC)
    assert vs.indices.tolist() == [[0, 0, 0]] and vs.features.tolist() == [[7.0]]


def test_voxelize_averages_shared_voxel():
    vs = voxelize(PointCloud([[0.01, 0.02, 0.03], [0.05, 0.05, 0.05]], [[2.0], [4.0]]), SPEC)
    assert vs.features.tolist() == [[3.0]]


def test_voxelize_neighbouring_cells():
    vs = voxelize(PointCloud([[0.05, 0.05, 0.05], [0.15, 0.05, 0.05]], [[1.0], [1.0]]), SPEC)
    assert len(vs) == 2
    assert (vs.indices[1] - vs.indices[0]).tolist() == [1, 0, 0]


def test_voxelize_drops_points_outside_extent_including_upper_boundary():
    pts = [[0.05, 0.05, 0.05], [-0.01, 0, 0], [1.0, 0.5, 0.5], [0.5, 0.5, 0.5]]
    vs = voxelize(PointCloud(pts, np.ones((4, 1))), SPEC)
    assert vs.indices.tolist() == [[0, 0, 0], [5, 5, 5]]


def test_voxelize_empty_cloud_is_an_error():
    with pytest.raises(ArgumentError):
        voxelize(PointCloud(np.zeros((0, 3))), SPEC)


def test_voxelize_uses_strided_cells():
    spec = VoxelGridSpec((0, 0, 0), (0.1, 0.1, 0.1), (5, 5, 5), 2)
    vs = voxelize(PointCloud([[0.15, 0.15, 0.15]], [[1.0]]), spec)
    assert vs.indices.tolist() == [[0, 0, 0]]
    assert np.allclose(voxel_centers_metric(vs), [[0.1, 0.1, 0.1]])


def test_voxel_center_examples():
    one = SparseVoxelSet([[0, 0, 0]], [[0.0]], SPEC)
    assert np.allclose(voxel_centers_metric(one), [[0.05, 0.05, 0.05]])
    strided = SparseVoxelSet([[0, 0, 0]], [[0.0]], VoxelGridSpec((0, 0, 0), (0.1,) * 3, (4, 4, 4), 2))
    assert np.allclose(voxel_centers_metric(strided), [[0.1, 0.1, 0.1]])


def test_voxel_centers_shift_with_origin():
    idx = [[0, 1, 2], [3, 1, 0]]
    a = SparseVoxelSet(idx, [[0.0], [0.0]], SPEC)
    b = SparseVoxelSet(idx, [[0.0], [0.0]], VoxelGridSpec((1.5, -2, 3), SPEC.voxel_size, SPEC.extent))
    assert np.allclose(voxel_centers_metric(b) - voxel_centers_metric(a), [1.5, -2, 3])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_voxelize_mass_and_center_properties(seed, stride):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 2, (200, 3))
    feats = rng.normal(size=(200, 2))
    spec = VoxelGridSpec((0, 0, 0), (0.1, 0.2, 0.15), (6, 4, 5), stride)
    vs = voxelize(PointCloud(pts, feats), spec)
    cell = np.asarray(spec.voxel_size) * stride
    q = np.floor(pts / cell).astype(int)
    inside = ((q >= 0) & (q < spec.extent)).all(axis=1)
    counts = np.array([(q[inside] == v).all(axis=1).sum() for v in vs.indices])
    assert counts.min(initial=1) >= 1
    np.testing.assert_allclose((vs.features * counts[:, None]).sum(axis=0), feats[inside].sum(axis=0),
                               rtol=1e-9, atol=1e-9)
    centers = voxel_centers_metric(vs)
    for c, v in zip(centers, vs.indices):
        members = pts[inside][(q[inside] == v).all(axis=1)]
        assert (np.abs(members - c) <= cell / 2 + 1e-12).all(axis=1).any()


# ------------------------------------------------------------ boxes

def test_point_in_box_examples():
    unit = Box3D(0, 0, 0, 1, 1, 1)
    assert point_in_box(unit.center, unit)
    assert not point_in_box([0.6, 0, 0], unit)
    assert point_in_box([0.5, 0.5, -0.5], unit)  # boundary is inside
    rot = Box3D(0, 0, 0, 2, 1, 1, math.pi / 2)
    assert not point_in_box([0.9, 0, 0], rot)
    assert point_in_box([0, 0.9, 0], rot)


def test_points_in_boxes_matches_oracle():
    rng = np.random.default_rng(3)
    boxes = [Box3D(*rng.uniform(-2, 2, 3), *rng.uniform(0.5, 3, 3), rng.uniform(-4, 4)) for _ in range(6)]
    pts = rng.uniform(-4, 4, (500, 3))
    mask = points_in_boxes(pts, boxes)
    want = np.array([[point_in_box_oracle(p, b) for b in boxes] for p in pts])
    assert mask.shape == (500, 6) and np.array_equal(mask, want)


@settings(max_examples=100, deadline=None)
@given(finite, finite, finite, st.floats(-4, 4), finite, finite)
def test_point_in_box_is_rigid_invariant(px, py, pz, theta, tx, ty):
    box = Box3D(1.0, -2.0, 0.5, 3.0, 1.5, 2.0, 0.3)
    p = np.array([px, py, pz]) / 10.0
    c, s = math.cos(theta), math.sin(theta)

    def move(q):
        return np.array([c * q[0] - s * q[1] + tx, s * q[0] + c * q[1] + ty, q[2]])

    # keep clear of faces, where rounding in the transform may legitimately flip the answer
    d = p - box.center
    cy, sy = math.cos(-box.yaw), math.sin(-box.yaw)
    local = np.abs([cy * d[0] - sy * d[1], sy * d[0] + cy * d[1], d[2]])
    if np.min(np.abs(local - box.dims / 2)) < 1e-6:
        return
    moved = Box3D(*move(box.center), box.dx, box.dy, box.dz, box.yaw + theta)
    assert point_in_box(p, box) == point_in_box(move(p), moved)


def test_grid_points_examples():
    assert np.allclose(box_grid_points(Box3D(1, 2, 3, 4, 5, 6, 1.0), (1, 1, 1)), [[1, 2, 3]])
    g = box_grid_points(Box3D(0, 0, 0, 1, 1, 1), (2, 2, 2))
    want = [[x, y, z] for x in (-0.25, 0.25) for y in (-0.25, 0.25) for z in (-0.25, 0.25)]
    assert np.allclose(g, want)
    r = box_grid_points(Box3D(0, 0, 0, 2, 1, 1, math.pi / 2), (2, 1, 1))
    # x offsets of the axis-aligned box land on y
    assert np.allclose(r, [[0, -0.5, 0], [0, 0.5, 0]], atol=1e-12)


def test_grid_rejects_zero_counts():
    with pytest.raises(ArgumentError):
        box_grid_points(Box3D(0, 0, 0, 1, 1, 1), (0, 1, 1))


@settings(max_examples=60, deadline=None)
@given(st.tuples(finite, finite, finite), st.tuples(*[st.floats(0.1, 10)] * 3), st.floats(-4, 4),
       st.tuples(*[st.integers(1, 6)] * 3))
def test_grid_points_are_inside_their_box(center, dims, yaw, grid):
    box = Box3D(*center, *dims, yaw)
    g = box_grid_points(box, grid)
    assert g.shape == (grid[0] * grid[1] * grid[2], 3)
    assert points_in_boxes(g, [box]).all()


# ------------------------------------------------------------ io

def test_pts_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    pc = PointCloud(rng.normal(size=(100, 3)).astype(np.float32), rng.normal(size=(100, 2)).astype(np.float32))
    save_point_cloud(pc, tmp_path / "a.pts")
    back = load_point_cloud(tmp_path / "a.pts")
    assert np.array_equal(back.coords, pc.coords) and np.array_equal(back.features, pc.features)


def test_bin_two_points(tmp_path):
    path = tmp_path / "x.bin"
    np.array([[1, 2, 3, 0.5], [4, 5, 6, 0.25]], "<f4").tofile(path)
    pc = load_point_cloud(path, "bin")
    assert len(pc) == 2 and pc.num_features == 1
    assert pc.coords.tolist() == [[1, 2, 3], [4, 5, 6]]
    save_point_cloud(pc, tmp_path / "y.bin", "bin")
    assert (tmp_path / "y.bin").read_bytes() == path.read_bytes()


def test_bin_length_not_multiple_of_record(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"\0" * 37)
    with pytest.raises(FormatError) as err:
        load_point_cloud(path, "bin")
    assert err.value.offset == 32 and "byte offset 32" in str(err.value)


def test_pts_truncated_file(tmp_path):
    pc = PointCloud(np.ones((10, 3)), np.ones((10, 1)))
    save_point_cloud(pc, tmp_path / "a.pts")
    data = (tmp_path / "a.pts").read_bytes()
    (tmp_path / "a.pts").write_bytes(data[:-6])
    with pytest.raises(FormatError) as err:
        load_point_cloud(tmp_path / "a.pts")
    assert err.value.offset == len(data) - 6


def test_missing_point_file_names_path(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.pts"):
        load_point_cloud(tmp_path / "nope.pts")


def test_bin_requires_one_channel(tmp_path):
    with pytest.raises(ArgumentError):
        save_point_cloud(PointCloud(np.zeros((2, 3))), tmp_path / "a.bin", "bin")


def test_boxes_round_trip_and_bad_record(tmp_path):
    boxes = [Box3D(1, 2, 3, 4, 5, 6, 0.5), Box3D(-1, 0, 0, 1, 1, 1, -2.0)]
    save_boxes(boxes, tmp_path / "b.jsonl")
    assert load_boxes(tmp_path / "b.jsonl") == boxes
    good = (tmp_path / "b.jsonl").read_text()
    (tmp_path / "c.jsonl").write_text(good + '{"cx": 1}\n')
    with pytest.raises(FormatError) as err:
        load_boxes(tmp_path / "c.jsonl")
    assert err.value.offset == len(good.encode())
