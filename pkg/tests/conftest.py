import numpy as np
import pytest

from triview_pose.constraints import LineTriplet, PointTriplet
from triview_pose.geometry import CameraPose, HomLine2, HomPoint2, random_rotation
from triview_pose.simulation import SimConfig, generate_scene, trial_seed


def scene(n_points=4, n_lines=4, seed=0, sigma=0.0, motion="large"):
    cfg = SimConfig(n_points=n_points, n_lines=n_lines, motion=motion)
    return generate_scene(cfg, trial_seed(seed, 0), sigma, noise_seed=1)


def random_pose(rng, scale=5.0):
    return CameraPose(random_rotation(rng), rng.normal(size=3) * scale)


def calibrated_triplets(sc):
    """Point and line triplets of a scene in calibrated coordinates."""
    return sc.observed.line_triplets(sc.intrinsics), sc.observed.point_triplets(sc.intrinsics)


def synthetic_point_triplet(rng, pose2, pose3):
    X = rng.uniform(-3, 3, 3) + np.array([0, 0, 12])
    xs = [X, pose2.R @ X + pose2.t, pose3.R @ X + pose3.t]
    return PointTriplet(*(HomPoint2(x / x[2]) for x in xs)), X


def synthetic_line_triplet(rng, pose2, pose3):
    A = rng.uniform(-3, 3, 3) + np.array([0, 0, 12])
    B = rng.uniform(-3, 3, 3) + np.array([0, 0, 12])
    ls = []
    for p in (CameraPose.identity(), pose2, pose3):
        a, b = p.R @ A + p.t, p.R @ B + p.t
        ls.append(HomLine2(np.cross(a, b)))
    return LineTriplet(*ls), (A, B)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
