import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triview_pose.errors import DegenerateConfiguration, PointAtInfinity, TriangulationDegenerate
from triview_pose.geometry import (
    CameraPose, HomLine2, HomPoint2, Intrinsics, axis_angle, line_from_endpoints, look_at,
    normalize_view, project_point, rotation_error_deg, transform_trifocal, translation_error,
    triangulate_line, triangulate_point, trifocal_from_cameras, trilinear_residuals,
)

from conftest import random_pose

I0 = np.hstack([np.eye(3), np.zeros((3, 1))])


# -- types -----------------------------------------------------------------

def test_line_is_unit_norm():
    assert np.isclose(np.linalg.norm(HomLine2([3.0, 4.0, 10.0]).coeffs), 1.0)


def test_zero_vectors_rejected():
    with pytest.raises(ValueError):
        HomPoint2([0, 0, 0])
    with pytest.raises(ValueError):
        HomLine2([0, 0, 0])


def test_point_at_infinity_is_flagged():
    p = HomPoint2([1.0, 2.0, 0.0])
    assert p.at_infinity
    with pytest.raises(PointAtInfinity):
        p.xy


def test_pose_rejects_non_rotation():
    with pytest.raises(ValueError):
        CameraPose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        CameraPose(2 * np.eye(3), np.zeros(3))


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        Intrinsics(np.array([[800, 0, 0], [1, 800, 0], [0, 0, 1.0]]))
    K = Intrinsics.from_focal(800, 320, 240)
    x = K.calibrate_points([[320, 240], [1120, 240]])
    assert np.allclose(x, [[0, 0, 1], [1, 0, 1]])
    assert np.allclose(K.pixels(x), [[320, 240], [1120, 240]])


def test_calibrated_line_incidence(rng):
    K = Intrinsics.from_focal(700, 300, 200)
    uv = rng.uniform(0, 600, (2, 2))
    lc = K.calibrate_lines(line_from_endpoints(uv[0], uv[1]))
    x = K.calibrate_points(uv)
    assert np.max(np.abs(x @ lc)) < 1e-12


def test_relative_pose_roundtrip(rng):
    a, b = random_pose(rng), random_pose(rng)
    rel = b.relative_to(a)
    X = rng.normal(size=3)
    assert np.allclose(rel.R @ (a.R @ X + a.t) + rel.t, b.R @ X + b.t)


def test_look_at_points_axis_at_target():
    pose = look_at([20.0, 5.0, 3.0])
    assert np.allclose((pose.R @ np.zeros(3) + pose.t)[:2], 0.0)
    assert (pose.R @ np.zeros(3) + pose.t)[2] > 0
    # straight down the up axis uses the fallback
    top = look_at([0.0, 0.0, 20.0])
    assert np.isclose(top.t[2], 20.0)


# -- normalization ---------------------------------------------------------

def test_normalize_square_example():
    pts = np.array([[0, 0, 1], [2, 0, 1], [0, 2, 1], [2, 2, 1.0]])
    F, ph, _ = normalize_view(pts)
    assert np.allclose(ph[:, :2].mean(axis=0), 0.0, atol=1e-12)
    assert abs(np.linalg.norm(ph[:, :2], axis=1).mean() - np.sqrt(2)) < 1e-12


def test_normalize_fixed_point():
    r = np.sqrt(2)
    pts = np.array([[r, 0, 1], [-r, 0, 1], [0, r, 1], [0, -r, 1.0]])
    F, _, _ = normalize_view(pts)
    assert np.allclose(F, np.eye(3), atol=1e-12)


def test_normalize_preserves_incidence(rng):
    pts = np.column_stack([rng.uniform(0, 600, (10, 2)), np.ones(10)])
    line = np.cross(pts[0], pts[1])
    F, ph, lh = normalize_view(pts, [line])
    assert abs(lh[0] @ ph[0]) < 1e-12 and abs(lh[0] @ ph[1]) < 1e-12


def test_normalize_coincident_points():
    with pytest.raises(DegenerateConfiguration):
        normalize_view(np.array([[1, 1, 1.0]] * 4))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=20))
def test_normalize_property(xy):
    xy = np.array(xy)
    if np.linalg.norm(xy - xy.mean(0), axis=1).mean() < 1e-3:
        return
    _, ph, _ = normalize_view(np.column_stack([xy, np.ones(len(xy))]))
    assert np.allclose(ph[:, :2].mean(0), 0, atol=1e-9)
    assert abs(np.linalg.norm(ph[:, :2], axis=1).mean() - np.sqrt(2)) < 1e-9


# -- trifocal tensor -------------------------------------------------------

def test_trifocal_zero_translations():
    assert np.all(trifocal_from_cameras(I0, I0) == 0)


def test_trifocal_unit_translations():
    P2 = np.hstack([np.eye(3), [[1], [0], [0]]])
    P3 = np.hstack([np.eye(3), [[0], [1], [0]]])
    T = trifocal_from_cameras(P2, P3)
    d = np.eye(3)
    expected = np.einsum("ij,k->ijk", d, d[1]) - np.einsum("j,ik->ijk", d[0], d)
    assert np.array_equal(T, expected)


def test_trilinearities_vanish(rng):
    for _ in range(20):
        p2, p3 = random_pose(rng), random_pose(rng)
        T = trifocal_from_cameras(p2.matrix, p3.matrix)
        X = rng.normal(size=3) + [0, 0, 10]
        xs = [X, p2.R @ X + p2.t, p3.R @ X + p3.t]
        assert np.max(np.abs(trilinear_residuals(*xs, T))) < 1e-9


def test_transformed_tensor_matches_transformed_cameras(rng):
    p2, p3 = random_pose(rng), random_pose(rng)
    F, G, H = (np.diag([s, s, 1.0]) + np.array([[0, 0, a], [0, 0, b], [0, 0, 0]])
               for s, a, b in rng.uniform(0.5, 2, (3, 3)))
    T = trifocal_from_cameras(p2.matrix, p3.matrix)
    Th = transform_trifocal(T, F, G, H)
    X = rng.normal(size=3) + [0, 0, 10]
    xs = [F @ X, G @ (p2.R @ X + p2.t), H @ (p3.R @ X + p3.t)]
    assert np.max(np.abs(trilinear_residuals(*xs, Th))) < 1e-9


# -- projection and triangulation -------------------------------------------

def test_project_examples():
    assert np.allclose(project_point(I0, [0, 0, 5]).xy, [0, 0])
    assert np.allclose(project_point(I0, [1, 2, 2]).xy, [0.5, 1.0])
    assert project_point(I0, [1, 2, 0]).at_infinity


def test_triangulate_point_exact(rng):
    P2 = random_pose(rng).matrix
    X = np.array([1.0, 2.0, 10.0])
    x1, x2 = I0 @ np.append(X, 1), P2 @ np.append(X, 1)
    assert np.allclose(triangulate_point(I0, P2, x1, x2), X, atol=1e-9)


def test_triangulate_point_perturbed(rng):
    P2 = np.hstack([np.eye(3), [[-1.0], [0], [0]]])
    X = np.array([0.3, -0.2, 5.0])
    x1 = I0 @ np.append(X, 1)
    x2 = P2 @ np.append(X, 1)
    x1, x2 = x1 / x1[2], x2 / x2[2]
    x1[:2] += rng.normal(0, 1e-6, 2)
    x2[:2] += rng.normal(0, 1e-6, 2)
    assert np.linalg.norm(triangulate_point(I0, P2, x1, x2) - X) < 1e-4


def test_triangulate_point_no_parallax():
    with pytest.raises(TriangulationDegenerate):
        triangulate_point(I0, I0, [0.1, 0.2, 1.0], [0.1, 0.2, 1.0])


def test_triangulate_line_reprojects(rng):
    p2, p3 = random_pose(rng, 2.0), random_pose(rng, 2.0)
    A, B = rng.normal(size=3) + [0, 0, 10], rng.normal(size=3) + [0, 0, 10]

    def image(P):
        a, b = P @ np.append(A, 1), P @ np.append(B, 1)
        return HomLine2(np.cross(a, b))

    L = triangulate_line(I0, p2.matrix, image(I0), image(p2.matrix))
    got, want = L.project(p3.matrix).coeffs, image(p3.matrix).coeffs
    assert min(np.linalg.norm(got - want), np.linalg.norm(got + want)) < 1e-9


def test_triangulate_line_degenerate():
    l = HomLine2([1.0, 2.0, 3.0])
    with pytest.raises(TriangulationDegenerate):
        triangulate_line(I0, I0, l, l)
    # a line through both camera centres projects to planes containing the baseline
    P2 = np.hstack([np.eye(3), [[-1.0], [0], [0]]])
    with pytest.raises(TriangulationDegenerate):
        triangulate_line(I0, P2, [0.0, 1.0, 0.0], [0.0, 1.0, 0.0])


# -- metrics ---------------------------------------------------------------

def test_rotation_error_examples(rng):
    R = axis_angle(rng.normal(size=3), 0.7)
    assert rotation_error_deg(R, R) == pytest.approx(0.0, abs=1e-12)
    assert rotation_error_deg(axis_angle([0, 0, 1], np.radians(10)), np.eye(3)) == pytest.approx(10.0)
    for _ in range(20):
        ang = rng.uniform(0, np.pi)
        R0 = axis_angle(rng.normal(size=3), rng.uniform(0, 3))
        got = rotation_error_deg(R0 @ axis_angle(rng.normal(size=3), ang), R0)
        assert abs(got - np.degrees(ang)) < 1e-9


def test_translation_error_examples():
    t = np.array([1.0, 2.0, 3.0])
    assert translation_error(t, t) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert translation_error(2 * t, t) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert translation_error([0, 0, 1.0], [1.0, 0, 0]) == pytest.approx((90.0, 0.0))
    assert translation_error(np.zeros(3), t) == (90.0, 1.0)
