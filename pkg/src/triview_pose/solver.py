"""End-to-end solve: pixels -> constraints -> candidates -> selected pose."""

from __future__ import annotations

from dataclasses import dataclass

from .beta_solver import PoseCandidate, all_candidates
from .constraints import ConstraintSystem, assemble
from .correspondences import Correspondences, IntrinsicsLike
from .geometry import CameraPose
from .selection import ScoredPose, prepare, select_with


@dataclass(frozen=True)
class PoseEstimate:
    pose: CameraPose
    score: ScoredPose
    candidates: list[PoseCandidate]
    system: ConstraintSystem


def estimate_pose(corr: Correspondences, pose2: CameraPose,
                  intrinsics: IntrinsicsLike) -> PoseEstimate:
    """Pose of view 3 relative to view 1, given the pose of view 2 relative to view 1.

    Raises:
        InsufficientConstraints: fewer than 8 usable rows.
        NoCandidates: the null-space solver produced nothing.
        ScoreUnavailable: nothing could be triangulated for scoring.
    """
    system = assemble(corr.line_triplets(intrinsics), corr.point_triplets(intrinsics), pose2)
    candidates = all_candidates(system)
    pose, scored = select_with(candidates, prepare(corr, pose2, intrinsics))
    return PoseEstimate(pose, scored, candidates, system)
