"""Relative pose of a third calibrated view from mixed point and line triplets.

Given the pose of view 2 relative to view 1, every point or line seen in all
three views contributes linear constraints on ``[R | t]`` of view 3.  The
constraints are stacked, their near-null space is searched under rotation
constraints, and the candidate that best reprojects into view 3 is returned.
"""

from .correspondences import Correspondences
from .errors import (
    InsufficientConstraints,
    NoCandidates,
    NoValidPose,
    ParseError,
    PoseError,
    RobustFailure,
)
from .geometry import CameraPose, Intrinsics, pose_errors
from .ransac import RansacConfig, RansacResult, estimate
from .simulation import SimConfig, generate_scene, run_batch
from .solver import PoseEstimate, estimate_pose

__all__ = [
    "CameraPose", "Correspondences", "Intrinsics", "PoseEstimate", "RansacConfig",
    "RansacResult", "SimConfig", "estimate", "estimate_pose", "generate_scene",
    "pose_errors", "run_batch", "InsufficientConstraints", "NoCandidates", "NoValidPose",
    "ParseError", "PoseError", "RobustFailure",
]
