"""Point and box file formats.

``pts``
    Little-endian float32, row-major ``N x (3 + C)``, with a ``<name>.pts.json``
    sidecar ``{"num_points": N, "num_features": C}``.
``bin``
    Headerless little-endian float32 ``x, y, z, intensity`` records.

Boxes are JSON lines with keys ``cx cy cz dx dy dz yaw``.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, FormatError
from .types import Box3D, PointCloud

FORMATS = ("pts", "bin")
_F32 = np.dtype("<f4")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_point_cloud(points: PointCloud, path, format: str = "pts") -> None:
    """Write ``points`` as float32.  Values must be float32-representable to round-trip."""
    path = Path(path)
    if format == "pts":
        data = np.hstack([points.coords, points.features]).astype(_F32)
        path.write_bytes(data.tobytes())
        meta = {"num_points": len(points), "num_features": points.num_features}
        sidecar_path(path).write_text(json.dumps(meta) + "\n")
    elif format == "bin":
        if points.num_features != 1:
            raise ArgumentError(
                f"bin format stores exactly one intensity channel, cloud has {points.num_features}"
            )
        data = np.hstack([points.coords, points.features]).astype(_F32)
        path.write_bytes(data.tobytes())
    else:
        raise ArgumentError(f"unknown point format {format!r}; expected one of {FORMATS}")


def load_point_cloud(path, format: str = "pts") -> PointCloud:
    path = Path(path)
    if format not in FORMATS:
        raise ArgumentError(f"unknown point format {format!r}; expected one of {FORMATS}")
    if not path.is_file():
        raise FileNotFoundError(f"point file not found: {path}")
    size = os.path.getsize(path)

    if format == "pts":
        meta_path = sidecar_path(path)
        if not meta_path.is_file():
            raise FileNotFoundError(f"sidecar not found: {meta_path}")
        try:
            meta = json.loads(meta_path.read_text())
            n = int(meta["num_points"])
            c = int(meta["num_features"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"malformed sidecar ({exc})", path=meta_path) from None
        if n < 0 or c < 0:
            raise FormatError("negative sizes in sidecar", path=meta_path)
        width = 3 + c
        expected = n * width * 4
        if size != expected:
            # first byte that disagrees with the declared layout
            raise FormatError(
                f"file holds {size} bytes, sidecar declares {n} x {width} float32 = {expected}",
                offset=min(size, expected),
                path=path,
            )
    else:
        width = 4
        record = width * 4
        if size % record:
            raise FormatError(
                f"length {size} is not a multiple of the {record}-byte record",
                offset=size - size % record,
                path=path,
            )
        n = size // record

    data = np.fromfile(path, dtype=_F32).reshape(n, width).astype(np.float64)
    return PointCloud(data[:, :3], data[:, 3:])


def save_boxes(boxes, path) -> None:
    with open(path, "w") as fh:
        for b in boxes:
            fh.write(json.dumps(b.to_dict()) + "\n")


def load_boxes(path) -> list[Box3D]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"boxes file not found: {path}")
    boxes = []
    offset = 0
    with open(path, "rb") as fh:
        for raw in fh:
            line = raw.strip()
            if line:
                try:
                    obj = json.loads(line)
                    boxes.append(Box3D(*(float(obj[k]) for k in ("cx", "cy", "cz", "dx", "dy", "dz", "yaw"))))
                except (ValueError, KeyError, TypeError) as exc:
                    raise FormatError(f"bad box record ({exc})", offset=offset, path=path) from None
            offset += len(raw)
    return boxes
