"""Geometric primitives, camera model and error metrics.

Conventions used throughout the package:

* A camera maps a world point ``X`` to ``x ~ K [R | t] X``.  The solver works in
  calibrated coordinates (``K`` removed), with the first camera fixed at
  ``[I | 0]``, the second known as ``[R0 | t0]`` and the third ``[R | t]``
  unknown.
* The unknown vector is ``v = [r1; r2; r3; t]`` where ``r_i`` are the *columns*
  of ``R``, i.e. ``v[:9] == R.ravel(order="F")``.
* ``T[i, j, k]`` stores the trifocal tensor entry with covariant index ``i``
  and contravariant indices ``j`` and ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateConfiguration, PointAtInfinity, TriangulationDegenerate

SO3_TOL = 1e-9


def _as_vector(values, size: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape != (size,):
        raise ValueError(f"{name} must have {size} entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HomPoint2:
    """Homogeneous image point."""

    coords: np.ndarray

    def __post_init__(self):
        c = _as_vector(self.coords, 3, "point")
        if not np.any(c):
            raise ValueError("homogeneous point cannot be the zero vector")
        object.__setattr__(self, "coords", _frozen(c))

    @property
    def at_infinity(self) -> bool:
        return abs(self.coords[2]) <= 1e-12 * np.linalg.norm(self.coords)

    @property
    def xy(self) -> np.ndarray:
        """Inhomogeneous coordinates; raises PointAtInfinity instead of dividing by ~0."""
        if self.at_infinity:
            raise PointAtInfinity(f"point {self.coords} lies at infinity")
        return self.coords[:2] / self.coords[2]


@dataclass(frozen=True)
class HomLine2:
    """Homogeneous image line ``l`` with ``l . x = 0``, stored with unit norm."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _as_vector(self.coeffs, 3, "line")
        n = np.linalg.norm(c)
        if n == 0.0:
            raise ValueError("homogeneous line cannot be the zero vector")
        object.__setattr__(self, "coeffs", _frozen(c / n))

    def distance(self, xy) -> np.ndarray:
        """Perpendicular distance of inhomogeneous points ``xy`` (..., 2) to the line."""
        xy = np.asarray(xy, dtype=float)
        a, b, c = self.coeffs
        return np.abs(a * xy[..., 0] + b * xy[..., 1] + c) / np.hypot(a, b)


@dataclass(frozen=True)
class Segment2:
    """Image segment between two pixel endpoints."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = _as_vector(self.p, 2, "endpoint p")
        q = _as_vector(self.q, 2, "endpoint q")
        if np.array_equal(p, q):
            raise ValueError("segment endpoints coincide")
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "q", _frozen(q))

    def line(self) -> HomLine2:
        return HomLine2(np.cross(np.append(self.p, 1.0), np.append(self.q, 1.0)))


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole calibration matrix."""

    K: np.ndarray

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.shape != (3, 3):
            raise ValueError("K must be 3x3")
        if np.any(np.tril(K, -1)):
            raise ValueError("K must be upper triangular")
        if K[2, 2] != 1.0:
            raise ValueError("K[2, 2] must equal 1")
        if abs(np.linalg.det(K)) < 1e-12:
            raise ValueError("K must be invertible")
        object.__setattr__(self, "K", _frozen(K))

    @classmethod
    def from_focal(cls, focal: float, cx: float, cy: float) -> "Intrinsics":
        return cls(np.array([[focal, 0.0, cx], [0.0, focal, cy], [0.0, 0.0, 1.0]]))

    @property
    def K_inv(self) -> np.ndarray:
        return np.linalg.inv(self.K)

    def calibrate_points(self, uv) -> np.ndarray:
        """Pixels (..., 2) -> calibrated homogeneous points (..., 3) with w = 1."""
        uv = np.asarray(uv, dtype=float)
        h = np.concatenate([uv, np.ones(uv.shape[:-1] + (1,))], axis=-1)
        x = h @ self.K_inv.T
        return x / x[..., 2:3]

    def calibrate_lines(self, lines) -> np.ndarray:
        """Pixel lines (..., 3) -> calibrated lines ``K^T l``, unit norm."""
        lc = np.asarray(lines, dtype=float) @ self.K
        return lc / np.linalg.norm(lc, axis=-1, keepdims=True)

    def pixel_lines(self, lines) -> np.ndarray:
        """Calibrated lines (..., 3) -> pixel lines ``K^-T l``."""
        return np.asarray(lines, dtype=float) @ self.K_inv

    def pixels(self, x) -> np.ndarray:
        """Calibrated homogeneous points (..., 3) -> pixels (..., 2)."""
        h = np.asarray(x, dtype=float) @ self.K.T
        return h[..., :2] / h[..., 2:3]


@dataclass(frozen=True)
class CameraPose:
    """Rigid pose ``[R | t]`` mapping reference-frame points into the camera frame."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        if R.shape != (3, 3) or not np.all(np.isfinite(R)):
            raise ValueError("R must be a finite 3x3 matrix")
        if np.max(np.abs(R.T @ R - np.eye(3))) >= SO3_TOL:
            raise ValueError("R is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) >= SO3_TOL:
            raise ValueError("det(R) must be +1")
        object.__setattr__(self, "R", _frozen(R))
        object.__setattr__(self, "t", _frozen(_as_vector(self.t, 3, "t")))

    @classmethod
    def identity(cls) -> "CameraPose":
        return cls(np.eye(3), np.zeros(3))

    @property
    def matrix(self) -> np.ndarray:
        return np.hstack([self.R, self.t[:, None]])

    @property
    def center(self) -> np.ndarray:
        return -self.R.T @ self.t

    @property
    def v(self) -> np.ndarray:
        """Stacked unknown ``[r1; r2; r3; t]``."""
        return np.concatenate([self.R.ravel(order="F"), self.t])

    def relative_to(self, reference: "CameraPose") -> "CameraPose":
        """This pose expressed in the camera frame of ``reference``."""
        R = self.R @ reference.R.T
        return CameraPose(project_to_so3(R), self.t - R @ reference.t)


@dataclass(frozen=True)
class NormalizingTransform:
    """Per-view similarity transforms for views 1, 2 and 3."""

    F: np.ndarray = field(default_factory=lambda: np.eye(3))
    G: np.ndarray = field(default_factory=lambda: np.eye(3))
    H: np.ndarray = field(default_factory=lambda: np.eye(3))


def project_to_so3(M: np.ndarray) -> np.ndarray:
    """Closest rotation to ``M`` in the Frobenius sense."""
    U, _, Vt = np.linalg.svd(M)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_angle(axis, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation about ``axis``."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    S = skew(a)
    return np.eye(3) + np.sin(angle_rad) * S + (1.0 - np.cos(angle_rad)) * (S @ S)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def look_at(center, target=(0.0, 0.0, 0.0), up=(0.0, 0.0, 1.0)) -> CameraPose:
    """World-to-camera pose of a camera at ``center`` whose optical axis hits ``target``.

    Camera axes: x right, y down, z forward.  Falls back to a second up axis when
    the viewing direction is nearly parallel to ``up``.
    """
    c = np.asarray(center, dtype=float)
    z = np.asarray(target, dtype=float) - c
    z /= np.linalg.norm(z)
    up = np.asarray(up, dtype=float)
    if abs(z @ up) > 0.99 * np.linalg.norm(up):
        up = np.array([0.0, 1.0, 0.0]) if abs(z[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    x = np.cross(z, up)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    R = np.vstack([x, y, z])
    return CameraPose(project_to_so3(R), -R @ c)


def line_from_endpoints(p, q) -> np.ndarray:
    """Unit-norm homogeneous lines through endpoint arrays ``p``, ``q`` (..., 2)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    one = np.ones(p.shape[:-1] + (1,))
    line = np.cross(np.concatenate([p, one], -1), np.concatenate([q, one], -1))
    return line / np.linalg.norm(line, axis=-1, keepdims=True)


# --------------------------------------------------------------------------
# normalization

def normalize_view(points, lines=()):
    """Hartley-normalize one view.

    Args:
        points: (n, 3) homogeneous points (or HomPoint2 instances).
        lines: (m, 3) homogeneous lines (or HomLine2 instances).

    Returns:
        ``(F, points_hat, lines_hat)`` where ``points_hat = F x`` (dehomogenized)
        and ``lines_hat = F^-T l`` (unit norm).  With no points the transform is
        the identity.

    Raises:
        DegenerateConfiguration: all points coincide, or no features at all.
    """
    pts = _stack(points, "coords")
    lns = _stack(lines, "coeffs")
    if len(pts) == 0 and len(lns) == 0:
        raise DegenerateConfiguration("normalize_view needs at least one point or line")
    if len(pts) == 0:
        F = np.eye(3)
    else:
        if np.any(np.abs(pts[:, 2]) <= 1e-12 * np.linalg.norm(pts, axis=1)):
            raise DegenerateConfiguration("cannot normalize points at infinity")
        xy = pts[:, :2] / pts[:, 2:3]
        centroid = xy.mean(axis=0)
        mean_dist = np.linalg.norm(xy - centroid, axis=1).mean()
        if mean_dist <= 1e-12 * max(1.0, np.abs(centroid).max()):
            raise DegenerateConfiguration("all points coincide")
        s = np.sqrt(2.0) / mean_dist
        F = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    pts_hat = pts @ F.T if len(pts) else pts
    if len(pts_hat):
        pts_hat = pts_hat / pts_hat[:, 2:3]
    lns_hat = lns @ np.linalg.inv(F) if len(lns) else lns
    if len(lns_hat):
        lns_hat = lns_hat / np.linalg.norm(lns_hat, axis=1, keepdims=True)
    return F, pts_hat, lns_hat


def _stack(items, attr) -> np.ndarray:
    if isinstance(items, np.ndarray):
        return items.reshape(-1, 3).astype(float)
    rows = [getattr(it, attr) if hasattr(it, attr) else it for it in items]
    if not rows:
        return np.zeros((0, 3))
    return np.asarray(rows, dtype=float).reshape(-1, 3)


# --------------------------------------------------------------------------
# trifocal tensor

def trifocal_from_cameras(P2, P3) -> np.ndarray:
    """Trifocal tensor of cameras ``[I|0]``, ``P2``, ``P3``: ``T_i^{jk} = a_i^j b_4^k - a_4^j b_i^k``."""
    P2 = np.asarray(P2, dtype=float)
    P3 = np.asarray(P3, dtype=float)
    a4, b4 = P2[:, 3], P3[:, 3]
    return (np.einsum("ji,k->ijk", P2[:, :3], b4)
            - np.einsum("j,ki->ijk", a4, P3[:, :3]))


def transform_trifocal(T, F, G, H) -> np.ndarray:
    """Tensor seen after image transforms ``x1 -> F x1``, ``x2 -> G x2``, ``x3 -> H x3``."""
    return np.einsum("ri,js,kt,rst->ijk", np.linalg.inv(F), G, H, T)


def trilinear_residuals(x1, x2, x3, T) -> np.ndarray:
    """The four point-point-point trilinearities, in the order (1,1), (1,2), (2,1), (2,2).

    Written out term by term for homogeneous points; with unit third
    coordinates this is the textbook inhomogeneous form.
    """
    x1, x2, x3 = (np.asarray(x, dtype=float) for x in (x1, x2, x3))
    out = np.empty(4)
    n = 0
    for j in (0, 1):
        for m in (0, 1):
            acc = 0.0
            for k in range(3):
                acc += x1[k] * (
                    x2[j] * x3[m] * T[k, 2, 2]
                    - x2[2] * x3[m] * T[k, j, 2]
                    - x2[j] * x3[2] * T[k, 2, m]
                    + x2[2] * x3[2] * T[k, j, m]
                )
            out[n] = acc
            n += 1
    return out


# --------------------------------------------------------------------------
# projection and triangulation

def project_point(P, X) -> HomPoint2:
    """Homogeneous projection ``P [X; 1]``; check ``.at_infinity`` before dividing."""
    X = _as_vector(X, 3, "X")
    return HomPoint2(np.asarray(P, dtype=float) @ np.append(X, 1.0))


def project_points(P, X) -> np.ndarray:
    """Vectorized projection of (n, 3) world points, returns (n, 3) homogeneous."""
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    return X @ P[:, :3].T + P[:, 3]


def _coords(x) -> np.ndarray:
    return np.asarray(getattr(x, "coords", x), dtype=float)


def triangulate_point(P1, P2, x1, x2) -> np.ndarray:
    """Linear (DLT) two-view triangulation; returns the Euclidean 3D point."""
    P1 = np.asarray(P1, dtype=float)
    P2 = np.asarray(P2, dtype=float)
    rows = []
    for P, x in ((P1, _coords(x1)), (P2, _coords(x2))):
        rows.append(x[0] * P[2] - x[2] * P[0])
        rows.append(x[1] * P[2] - x[2] * P[1])
    A = np.asarray(rows)
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    _, s, Vt = np.linalg.svd(A)
    if s[2] <= 1e-10 * s[0]:
        raise TriangulationDegenerate("rays do not determine a unique point (no parallax)")
    X = Vt[-1]
    if abs(X[3]) <= 1e-12 * np.linalg.norm(X):
        raise TriangulationDegenerate("triangulated point lies at infinity")
    return X[:3] / X[3]


@dataclass(frozen=True)
class Line3D:
    """3D line stored as the intersection of two planes (rows of ``planes``)."""

    planes: np.ndarray

    def points(self) -> np.ndarray:
        """Two homogeneous 4-vectors spanning the line (rows)."""
        _, _, Vt = np.linalg.svd(self.planes)
        return Vt[2:]

    def project(self, P) -> HomLine2:
        Y = self.points() @ np.asarray(P, dtype=float).T
        return HomLine2(np.cross(Y[0], Y[1]))


def triangulate_line(P1, P2, l1, l2) -> Line3D:
    """Intersect the back-projected planes ``P1^T l1`` and ``P2^T l2``."""
    l1 = np.asarray(getattr(l1, "coeffs", l1), dtype=float)
    l2 = np.asarray(getattr(l2, "coeffs", l2), dtype=float)
    planes = np.vstack([np.asarray(P1, float).T @ l1, np.asarray(P2, float).T @ l2])
    planes /= np.linalg.norm(planes, axis=1, keepdims=True)
    s = np.linalg.svd(planes, compute_uv=False)
    if s[1] <= 1e-10 * s[0]:
        raise TriangulationDegenerate("back-projected planes are parallel or identical")
    return Line3D(planes)


# --------------------------------------------------------------------------
# metrics

def rotation_error_deg(R_est, R_gt) -> float:
    """Geodesic angle of ``R_est^T R_gt`` in degrees, in [0, 180]."""
    D = np.asarray(R_est, dtype=float).T @ np.asarray(R_gt, dtype=float)
    w = np.array([D[2, 1] - D[1, 2], D[0, 2] - D[2, 0], D[1, 0] - D[0, 1]])
    # atan2 keeps full precision near 0 deg, where arccos(trace) does not
    return float(np.degrees(np.arctan2(np.linalg.norm(w), np.trace(D) - 1.0)))


def translation_error(t_est, t_gt) -> tuple[float, float]:
    """Direction angle (degrees) and ``| |t_est| / |t_gt| - 1 |``."""
    t_est = np.asarray(t_est, dtype=float)
    t_gt = np.asarray(t_gt, dtype=float)
    n_gt = np.linalg.norm(t_gt)
    if n_gt == 0.0:
        raise ValueError("ground-truth translation must be nonzero")
    n_est = np.linalg.norm(t_est)
    if n_est == 0.0:
        return 90.0, 1.0
    angle = np.degrees(np.arctan2(np.linalg.norm(np.cross(t_est, t_gt)), t_est @ t_gt))
    return float(angle), float(abs(n_est / n_gt - 1.0))


def pose_errors(est: CameraPose, gt: CameraPose) -> tuple[float, float, float]:
    """``(rotation_deg, translation_angle_deg, translation_ratio_error)``."""
    return (rotation_error_deg(est.R, gt.R), *translation_error(est.t, gt.t))


def relative_translation_error(t_est, t_gt) -> float:
    """``|t_est - t_gt| / |t_gt|``."""
    return float(np.linalg.norm(np.asarray(t_est) - t_gt) / np.linalg.norm(t_gt))


def as_poses(world_poses: Sequence[CameraPose]) -> list[CameraPose]:
    """Express a list of world poses relative to the first one."""
    ref = world_poses[0]
    return [p.relative_to(ref) for p in world_poses]
