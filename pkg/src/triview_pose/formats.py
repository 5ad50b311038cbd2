"""Plain-text inputs for the command-line solver.

Correspondence file, one record per line (pixels, ``#`` starts a comment)::

    P u1 v1 u2 v2 u3 v3
    L x1a y1a x1b y1b x2a y2a x2b y2b x3a y3a x3b y3b

Camera file, one ``key = numbers`` entry per line::

    K  = 9 numbers, row-major (or K1, K2, K3 for per-view calibration)
    R0 = 9 numbers, row-major rotation of view 2 relative to view 1
    t0 = 3 numbers
    R_true = 9 numbers    (optional ground truth for view 3)
    t_true = 3 numbers    (optional)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ._io import atomic_write
from .correspondences import Correspondences
from .errors import ParseError
from .geometry import CameraPose, Intrinsics

CAMERA_KEYS = {"K": 9, "K1": 9, "K2": 9, "K3": 9, "R0": 9, "t0": 3, "R_true": 9, "t_true": 3}


def _numbers(fields, path, lineno) -> list[float]:
    out = []
    for f in fields:
        try:
            x = float(f)
        except ValueError:
            raise ParseError(f"not a number: {f!r}", path, lineno) from None
        if not np.isfinite(x):
            raise ParseError(f"non-finite value: {f!r}", path, lineno)
        out.append(x)
    return out


def _content_lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path) from None
    except UnicodeDecodeError:
        raise ParseError("not a text file", path) from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def read_correspondences(path) -> Correspondences:
    """Parse a correspondence file.

    Raises:
        ParseError: unknown record tag, wrong field count, bad number, or a
            segment whose endpoints coincide.
    """
    points, segments = [], []
    for lineno, line in _content_lines(path):
        tag, *fields = line.split()
        if tag == "P":
            if len(fields) != 6:
                raise ParseError(f"point record needs 6 numbers, got {len(fields)}", path, lineno)
            points.append(np.reshape(_numbers(fields, path, lineno), (3, 2)))
        elif tag == "L":
            if len(fields) != 12:
                raise ParseError(f"line record needs 12 numbers, got {len(fields)}", path, lineno)
            seg = np.reshape(_numbers(fields, path, lineno), (3, 2, 2))
            if np.any(np.all(seg[:, 0] == seg[:, 1], axis=-1)):
                raise ParseError("segment endpoints coincide", path, lineno)
            segments.append(seg)
        else:
            raise ParseError(f"unknown record tag {tag!r} (expected P or L)", path, lineno)
    return Correspondences(np.array(points).reshape(-1, 3, 2),
                           np.array(segments).reshape(-1, 3, 2, 2))


def write_correspondences(path, corr: Correspondences) -> None:
    with atomic_write(path) as fh:
        for p in corr.points:
            fh.write("P " + " ".join(repr(float(x)) for x in p.ravel()) + "\n")
        for s in corr.segments:
            fh.write("L " + " ".join(repr(float(x)) for x in s.ravel()) + "\n")


@dataclass(frozen=True)
class CameraSetup:
    intrinsics: tuple[Intrinsics, Intrinsics, Intrinsics]
    pose2: CameraPose
    pose3_true: Optional[CameraPose] = None


def read_cameras(path) -> CameraSetup:
    """Parse a camera key-value file.

    Raises:
        ParseError: unknown or repeated key, wrong count, missing required key,
            or an invalid calibration or rotation.
    """
    vals: dict[str, list[float]] = {}
    where: dict[str, int] = {}
    for lineno, line in _content_lines(path):
        if "=" not in line:
            raise ParseError("expected 'key = numbers'", path, lineno)
        key, rhs = (s.strip() for s in line.split("=", 1))
        if key not in CAMERA_KEYS:
            raise ParseError(f"unknown key {key!r}", path, lineno)
        if key in vals:
            raise ParseError(f"repeated key {key!r}", path, lineno)
        nums = _numbers(rhs.split(), path, lineno)
        if len(nums) != CAMERA_KEYS[key]:
            raise ParseError(f"{key} needs {CAMERA_KEYS[key]} numbers, got {len(nums)}", path, lineno)
        vals[key] = nums
        where[key] = lineno

    def build(ctor, key, *args):
        try:
            return ctor(*args)
        except ValueError as exc:
            raise ParseError(f"{key}: {exc}", path, where.get(key)) from None

    per_view = [k for k in ("K1", "K2", "K3") if k in vals]
    if "K" in vals and per_view:
        raise ParseError("give either K or K1..K3, not both", path, where[per_view[0]])
    if "K" in vals:
        K = build(Intrinsics, "K", np.reshape(vals["K"], (3, 3)))
        ks = (K, K, K)
    elif len(per_view) == 3:
        ks = tuple(build(Intrinsics, k, np.reshape(vals[k], (3, 3))) for k in ("K1", "K2", "K3"))
    else:
        raise ParseError("missing intrinsics (K, or all of K1, K2, K3)", path)
    for k in ("R0", "t0"):
        if k not in vals:
            raise ParseError(f"missing required key {k}", path)
    pose2 = build(CameraPose, "R0", np.reshape(vals["R0"], (3, 3)), vals["t0"])
    truth = None
    if ("R_true" in vals) != ("t_true" in vals):
        raise ParseError("R_true and t_true must be given together", path)
    if "R_true" in vals:
        truth = build(CameraPose, "R_true", np.reshape(vals["R_true"], (3, 3)), vals["t_true"])
    return CameraSetup(ks, pose2, truth)


def write_cameras(path, setup: CameraSetup) -> None:
    def row(key, arr):
        return f"{key} = " + " ".join(repr(float(x)) for x in np.ravel(arr)) + "\n"

    with atomic_write(path) as fh:
        k1, k2, k3 = setup.intrinsics
        if k1 is k2 is k3 or (np.array_equal(k1.K, k2.K) and np.array_equal(k1.K, k3.K)):
            fh.write(row("K", k1.K))
        else:
            for name, k in zip(("K1", "K2", "K3"), setup.intrinsics):
                fh.write(row(name, k.K))
        fh.write(row("R0", setup.pose2.R))
        fh.write(row("t0", setup.pose2.t))
        if setup.pose3_true is not None:
            fh.write(row("R_true", setup.pose3_true.R))
            fh.write(row("t_true", setup.pose3_true.t))
