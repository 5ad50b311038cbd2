"""Pixel-space correspondences across the three views."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .constraints import LineTriplet, PointTriplet
from .geometry import HomLine2, HomPoint2, Intrinsics, line_from_endpoints

IntrinsicsLike = Union[Intrinsics, Sequence[Intrinsics]]


def per_view(intrinsics: IntrinsicsLike) -> tuple[Intrinsics, Intrinsics, Intrinsics]:
    """Accept a shared calibration or one per view."""
    if isinstance(intrinsics, Intrinsics):
        return (intrinsics,) * 3
    ks = tuple(intrinsics)
    if len(ks) != 3:
        raise ValueError("expected one Intrinsics or three")
    return ks


@dataclass(frozen=True)
class Correspondences:
    """Point triplets ``points[n, view] = (u, v)`` and segment triplets
    ``segments[m, view] = ((ua, va), (ub, vb))``, all in pixels."""

    points: np.ndarray
    segments: np.ndarray

    def __init__(self, points=None, segments=None):
        pts = np.zeros((0, 3, 2)) if points is None else np.array(points, dtype=float)
        seg = np.zeros((0, 3, 2, 2)) if segments is None else np.array(segments, dtype=float)
        pts = pts.reshape(-1, 3, 2)
        seg = seg.reshape(-1, 3, 2, 2)
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(seg))):
            raise ValueError("correspondences must be finite")
        if np.any(np.all(seg[:, :, 0] == seg[:, :, 1], axis=-1)):
            raise ValueError("segment with coincident endpoints")
        pts.setflags(write=False)
        seg.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "segments", seg)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_lines(self) -> int:
        return len(self.segments)

    def __len__(self) -> int:
        return self.n_points + self.n_lines

    def subset(self, point_idx=None, line_idx=None) -> "Correspondences":
        p = self.points if point_idx is None else self.points[np.asarray(point_idx, dtype=int)]
        s = self.segments if line_idx is None else self.segments[np.asarray(line_idx, dtype=int)]
        return Correspondences(p, s)

    def pixel_lines(self) -> np.ndarray:
        """(m, 3, 3) unit-norm pixel lines through the segment endpoints."""
        return line_from_endpoints(self.segments[:, :, 0], self.segments[:, :, 1])

    def calibrated_points(self, intrinsics: IntrinsicsLike) -> np.ndarray:
        ks = per_view(intrinsics)
        out = np.empty((self.n_points, 3, 3))
        for v, K in enumerate(ks):
            out[:, v] = K.calibrate_points(self.points[:, v])
        return out

    def calibrated_lines(self, intrinsics: IntrinsicsLike) -> np.ndarray:
        ks = per_view(intrinsics)
        lines = self.pixel_lines()
        out = np.empty((self.n_lines, 3, 3))
        for v, K in enumerate(ks):
            out[:, v] = K.calibrate_lines(lines[:, v])
        return out

    def point_triplets(self, intrinsics: IntrinsicsLike) -> list[PointTriplet]:
        return [PointTriplet(*(HomPoint2(x) for x in trip))
                for trip in self.calibrated_points(intrinsics)]

    def line_triplets(self, intrinsics: IntrinsicsLike) -> list[LineTriplet]:
        return [LineTriplet(*(HomLine2(l) for l in trip))
                for trip in self.calibrated_lines(intrinsics)]
