"""Hypothesize-and-test wrapper around the linear solver."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .correspondences import Correspondences, IntrinsicsLike, per_view
from .errors import PoseError, RobustFailure
from .geometry import CameraPose
from .solver import PoseEstimate, estimate_pose

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RansacConfig:
    """Sampling and consensus parameters.

    A sample holds ``sample_lines`` lines and ``sample_points`` points.  When
    one class is short the shortfall is taken from the other class.
    """

    sample_lines: int = 3
    sample_points: int = 3
    max_iterations: int = 500
    inlier_threshold_px: float = 2.0
    confidence: float = 0.99
    seed: int = 0
    refit_rounds: int = 3

    def __post_init__(self):
        if self.sample_lines < 0 or self.sample_points < 0:
            raise ValueError("sample sizes must be non-negative")
        if 4 * self.sample_points + 2 * self.sample_lines < 8:
            raise ValueError("sample must provide at least 8 constraint rows")
        if self.inlier_threshold_px <= 0:
            raise ValueError("inlier threshold must be positive")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class RansacResult:
    pose: CameraPose
    inlier_mask: np.ndarray     # points first, then lines
    iterations_run: int
    best_score: float           # inlier RMS error (px) of the final pose
    n_candidates: int = 0       # candidates produced by the final solve

    def point_inliers(self, n_points: int) -> np.ndarray:
        return self.inlier_mask[:n_points]

    def line_inliers(self, n_points: int) -> np.ndarray:
        return self.inlier_mask[n_points:]


def sample_sizes(config: RansacConfig, n_lines: int, n_points: int) -> tuple[int, int]:
    """Per-class sample sizes, degrading to whatever class is available."""
    total = config.sample_lines + config.sample_points
    sl = min(config.sample_lines, n_lines)
    sp = min(total - sl, n_points)
    sl = min(total - sp, n_lines)
    # a point yields two independent rows and a line two as well
    if 2 * (sl + sp) < 8:
        raise RobustFailure(
            f"{n_lines} lines + {n_points} points cannot fill a sample of {total} features")
    return sl, sp


def _cameras(pose2: CameraPose, pose3: CameraPose) -> np.ndarray:
    P1 = np.hstack([np.eye(3), np.zeros((3, 1))])
    return np.stack([P1, pose2.matrix, pose3.matrix])


def feature_residuals(pose: CameraPose, corr: Correspondences, pose2: CameraPose,
                      intrinsics: IntrinsicsLike) -> np.ndarray:
    """One view-3 error per feature (pixels), points first, then lines.

    Each feature is triangulated from all three views under the hypothesised
    pose, then reprojected into view 3.  A point scores its distance; a line
    scores the farther of its two observed endpoints.
    """
    ks = per_view(intrinsics)
    Ps = _cameras(pose2, pose)
    K3 = ks[2].K

    x = corr.calibrated_points(ks)                       # (n, 3, 3)
    x = x[..., :2] / x[..., 2:3]
    A = np.concatenate([x[:, :, 0, None] * Ps[:, 2] - Ps[:, 0],
                        x[:, :, 1, None] * Ps[:, 2] - Ps[:, 1]], axis=1)
    X = np.linalg.svd(A)[2][:, -1] if len(A) else np.zeros((0, 4))
    h = X @ Ps[2].T @ K3.T
    with np.errstate(divide="ignore", invalid="ignore"):
        perr = np.linalg.norm(h[:, :2] / h[:, 2:3] - corr.points[:, 2], axis=1)

    # scale each image line so its plane residual is a depth-weighted image
    # distance; unit 4-norm planes would mix metres with the homogeneous part
    lines = corr.calibrated_lines(ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        lines = lines / np.linalg.norm(lines[..., :2], axis=-1, keepdims=True)
    planes = np.einsum("mvi,vij->mvj", lines, Ps)
    L = np.linalg.svd(planes)[2][:, 2:] if len(planes) else np.zeros((0, 2, 4))
    Y = L @ Ps[2].T
    lp = np.cross(Y[:, 0], Y[:, 1]) @ np.linalg.inv(K3)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.abs(np.einsum("mk,mek->me", lp[:, :2], corr.segments[:, 2]) + lp[:, 2:3])
        lerr = (num / np.hypot(lp[:, 0], lp[:, 1])[:, None]).max(axis=1, initial=0.0)
    err = np.concatenate([perr, lerr])
    return np.where(np.isfinite(err), err, np.inf)


def required_iterations(inlier_ratio: float, sample_size: int, confidence: float) -> float:
    if inlier_ratio <= 0.0:
        return math.inf
    good = inlier_ratio ** sample_size
    if good >= 1.0:
        return 1.0
    return math.log(1.0 - confidence) / math.log(1.0 - good)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x ** 2))) if x.size else math.inf


def _solve(corr: Correspondences, pose2, intrinsics, pidx, lidx) -> Optional[PoseEstimate]:
    try:
        return estimate_pose(corr.subset(pidx, lidx), pose2, intrinsics)
    except PoseError:
        return None


def estimate(corr: Correspondences, pose2: CameraPose, intrinsics: IntrinsicsLike,
             config: RansacConfig = RansacConfig()) -> RansacResult:
    """Robust pose of view 3 from correspondences that may contain outliers.

    Every iteration draws a sample without replacement from a generator seeded
    by ``(seed, iteration)``, solves it, and counts features whose view-3 error
    is within the threshold.  Ties in the inlier count go to the lower inlier
    RMS and then to the earlier iteration.  The best consensus set is refit and
    the mask recomputed under the refit pose.

    Raises:
        RobustFailure: too few features for a sample, or no sample gave a pose.
    """
    n_p, n_l = corr.n_points, corr.n_lines
    sl, sp = sample_sizes(config, n_l, n_p)
    th = config.inlier_threshold_px

    best: Optional[tuple] = None       # (count, rms, solve, mask)
    needed = float(config.max_iterations)
    it = 0
    while it < min(needed, config.max_iterations):
        rng = np.random.default_rng([config.seed, it])
        pidx = np.sort(rng.choice(n_p, sp, replace=False)) if sp else np.zeros(0, int)
        lidx = np.sort(rng.choice(n_l, sl, replace=False)) if sl else np.zeros(0, int)
        it += 1
        sol = _solve(corr, pose2, intrinsics, pidx, lidx)
        if sol is None:
            continue
        pose = sol.pose
        err = feature_residuals(pose, corr, pose2, intrinsics)
        mask = err <= th
        count = int(mask.sum())
        rms = _rms(err[mask])
        if best is None or count > best[0] or (count == best[0] and rms < best[1]):
            best = (count, rms, sol, mask)
            needed = required_iterations(count / len(err), sl + sp, config.confidence)
    if best is None:
        raise RobustFailure(f"no valid pose in {it} iterations")

    sol, mask = best[2], best[3]
    for _ in range(config.refit_rounds):
        refit = _solve(corr, pose2, intrinsics, np.flatnonzero(mask[:n_p]),
                       np.flatnonzero(mask[n_p:]))
        if refit is None:
            log.warning("refit on %d inliers failed; keeping the sample pose", int(mask.sum()))
            break
        new_mask = feature_residuals(refit.pose, corr, pose2, intrinsics) <= th
        if new_mask.sum() < mask.sum():
            break
        sol, stable = refit, np.array_equal(new_mask, mask)
        mask = new_mask
        if stable:
            break

    err = feature_residuals(sol.pose, corr, pose2, intrinsics)
    mask = err <= th
    mask.setflags(write=False)
    return RansacResult(sol.pose, mask, it, _rms(err[mask]), len(sol.candidates))
