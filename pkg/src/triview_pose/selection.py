"""Candidate scoring by third-view reprojection error, with a cheirality prescreen."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .correspondences import Correspondences, IntrinsicsLike, per_view
from .errors import NoValidPose, ScoreUnavailable, TriangulationDegenerate
from .geometry import CameraPose, triangulate_line, triangulate_point


@dataclass(frozen=True)
class ScoredPose:
    pose: CameraPose
    point_rms: Optional[float]
    line_rms: Optional[float]
    combined: float
    positive_depth_fraction: Optional[float]
    fallback: bool = False


@dataclass(frozen=True)
class ScoringData:
    """Structure triangulated once from the two known views."""

    X: np.ndarray            # (n, 3) points in the view-1 frame
    point_ok: np.ndarray     # (n,) triangulation succeeded
    point_obs: np.ndarray    # (n, 2) view-3 pixels
    L: np.ndarray            # (m, 2, 4) homogeneous points spanning each 3D line
    line_ok: np.ndarray      # (m,)
    line_obs: np.ndarray     # (m, 2, 2) view-3 endpoint pixels
    K3: np.ndarray

    @property
    def has_points(self) -> bool:
        return len(self.X) > 0


def prepare(corr: Correspondences, pose2: CameraPose, intrinsics: IntrinsicsLike) -> ScoringData:
    """Triangulate every point and line from views 1 and 2.

    Raises:
        ScoreUnavailable: no feature could be triangulated.
    """
    ks = per_view(intrinsics)
    P1 = np.hstack([np.eye(3), np.zeros((3, 1))])
    P2 = pose2.matrix
    xs = corr.calibrated_points(ks)
    X = np.zeros((corr.n_points, 3))
    pok = np.zeros(corr.n_points, dtype=bool)
    for i in range(corr.n_points):
        try:
            X[i] = triangulate_point(P1, P2, xs[i, 0], xs[i, 1])
            pok[i] = True
        except TriangulationDegenerate:
            pass
    ls = corr.calibrated_lines(ks)
    L = np.zeros((corr.n_lines, 2, 4))
    lok = np.zeros(corr.n_lines, dtype=bool)
    for i in range(corr.n_lines):
        try:
            L[i] = triangulate_line(P1, P2, ls[i, 0], ls[i, 1]).points()
            lok[i] = True
        except TriangulationDegenerate:
            pass
    if not (pok.any() or lok.any()):
        raise ScoreUnavailable("no point or line could be triangulated from views 1 and 2")
    return ScoringData(X, pok, corr.points[:, 2].copy(), L, lok,
                       corr.segments[:, 2].copy(), np.asarray(ks[2].K))


def _errors_batch(Rs: np.ndarray, ts: np.ndarray, data: ScoringData):
    """Errors for ``c`` stacked poses: ``(c, n)``, ``(c, m, 2)``, ``(c, n)``."""
    K = data.K3
    Y = np.einsum("cij,nj->cni", Rs, data.X) + ts[:, None, :]
    depth = np.where(data.point_ok, Y[..., 2], np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = Y @ K.T
        pix = h[..., :2] / h[..., 2:3]
        perr = np.linalg.norm(pix - data.point_obs, axis=-1)
    perr = np.where(data.point_ok & np.isfinite(perr), perr, np.inf)

    # the two spanning points of every 3D line, projected by each pose
    Yl = np.einsum("cij,mej->cmei", Rs, data.L[..., :3]) + ts[:, None, None, :] * data.L[None, :, :, 3:4]
    lc = np.cross(Yl[:, :, 0], Yl[:, :, 1])           # calibrated lines
    lp = lc @ np.linalg.inv(K)                         # pixel lines K^-T l
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.abs(np.einsum("cmk,mek->cme", lp[..., :2], data.line_obs) + lp[..., 2:3])
        lerr = num / np.hypot(lp[..., 0], lp[..., 1])[..., None]
    lerr = np.where(data.line_ok[:, None] & np.isfinite(lerr), lerr, np.inf)
    return perr, lerr, depth


def feature_errors(pose: CameraPose, data: ScoringData):
    """Per-feature view-3 errors in pixels.

    Returns ``(point_err (n,), endpoint_err (m, 2), depth (n,))``; features that
    failed to triangulate get ``inf`` errors and ``nan`` depth.
    """
    perr, lerr, depth = _errors_batch(pose.R[None], pose.t[None], data)
    return perr[0], lerr[0], depth[0]


def _rms(x: np.ndarray) -> Optional[float]:
    x = x[np.isfinite(x)]
    return float(np.sqrt(np.mean(x ** 2))) if x.size else None


def _scored(pose, perr, lerr, depth) -> ScoredPose:
    point_rms = _rms(perr)
    line_rms = _rms(lerr.ravel())
    combined = _rms(np.concatenate([perr, lerr.ravel()]))
    valid_depth = depth[np.isfinite(depth)]
    frac = float(np.mean(valid_depth > 0)) if valid_depth.size else None
    return ScoredPose(pose, point_rms, line_rms, np.inf if combined is None else combined, frac)


def score_with(pose: CameraPose, data: ScoringData) -> ScoredPose:
    return _scored(pose, *feature_errors(pose, data))


def score_many(poses, data: ScoringData) -> list[ScoredPose]:
    Rs = np.array([p.R for p in poses])
    ts = np.array([p.t for p in poses])
    perr, lerr, depth = _errors_batch(Rs, ts, data)
    return [_scored(p, perr[i], lerr[i], depth[i]) for i, p in enumerate(poses)]


def score(candidate, corr: Correspondences, pose2: CameraPose, intrinsics: IntrinsicsLike) -> ScoredPose:
    """Score one candidate (a PoseCandidate or a CameraPose)."""
    pose = getattr(candidate, "pose", candidate)
    return score_with(pose, prepare(corr, pose2, intrinsics))


def _key(s: ScoredPose):
    # total order independent of the candidate list order
    return (s.combined, tuple(s.pose.R.ravel()), tuple(s.pose.t))


def select_with(candidates, data: ScoringData) -> tuple[CameraPose, ScoredPose]:
    if not candidates:
        raise NoValidPose("empty candidate list")
    scored = score_many([getattr(c, "pose", c) for c in candidates], data)
    survivors = scored
    fallback = False
    if data.has_points and data.point_ok.any():
        survivors = [s for s in scored if s.positive_depth_fraction is not None
                     and s.positive_depth_fraction > 0.5]
        if not survivors:
            survivors, fallback = scored, True
    best = min(survivors, key=_key)
    if fallback:
        best = ScoredPose(best.pose, best.point_rms, best.line_rms, best.combined,
                          best.positive_depth_fraction, fallback=True)
    return best.pose, best


def select(candidates, corr: Correspondences, pose2: CameraPose,
           intrinsics: IntrinsicsLike) -> tuple[CameraPose, ScoredPose]:
    """Best candidate by pooled reprojection RMS among those passing the prescreen.

    The prescreen keeps candidates that put strictly more than half of the
    triangulated points in front of camera 3.  If it removes everything, all
    candidates are ranked and the result carries ``fallback=True``.
    """
    if not candidates:
        raise NoValidPose("empty candidate list")
    return select_with(candidates, prepare(corr, pose2, intrinsics))
