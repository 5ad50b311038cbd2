import numpy as np
import pytest

from triview_pose.constraints import assemble
from triview_pose.errors import TranslationDegenerate
from triview_pose.translation import solve_translation, split_system

from conftest import calibrated_triplets, scene


def test_truth_rotation_gives_truth_translation():
    for seed in range(10):
        sc = scene(4, 4, seed=seed)
        lines, pts = calibrated_triplets(sc)
        t = solve_translation(assemble(lines, pts, sc.pose2), sc.pose3.R)
        assert np.linalg.norm(t - sc.pose3.t) < 1e-8


def test_consistent_system_exact(rng):
    for _ in range(50):
        A = rng.normal(size=(16, 9))
        B = rng.normal(size=(16, 3))
        r, t0 = rng.normal(size=9), rng.normal(size=3)
        A = A - np.outer(A @ r + B @ t0, r) / (r @ r)     # make A r = -B t0
        t = solve_translation(np.hstack([A, B]), r.reshape(3, 3, order="F"))
        assert np.linalg.norm(t - t0) < 1e-10 * max(1.0, np.linalg.norm(t0))


def test_residual_orthogonality(rng):
    for _ in range(50):
        C = rng.normal(size=(20, 12))
        R = rng.normal(size=(3, 3))
        t = solve_translation(C, R)
        s = split_system(C)
        resid = s.A_r @ R.ravel(order="F") + s.B_t @ t
        assert np.linalg.norm(s.B_t.T @ resid) < 1e-8 * np.linalg.norm(C)


def test_rank_deficient_translation_block(rng):
    C = rng.normal(size=(12, 12))
    C[:, 11] = C[:, 10]
    with pytest.raises(TranslationDegenerate):
        solve_translation(C, np.eye(3))
