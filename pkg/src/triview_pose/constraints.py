"""Linear constraints on the third camera from line and point triplets.

Every triplet yields rows ``c`` with ``c . v = 0`` where ``v = [r1; r2; r3; t]``
stacks the columns of the unknown ``[R | t]``.  Lines give two rows, points
give four.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfiguration, DegenerateLine, InsufficientConstraints
from .geometry import CameraPose, HomLine2, HomPoint2, NormalizingTransform, normalize_view

log = logging.getLogger(__name__)

MIN_ROWS = 8
PARALLEL_TOL = 1e-10


@dataclass(frozen=True)
class LineTriplet:
    l1: HomLine2
    l2: HomLine2
    l3: HomLine2

    @classmethod
    def from_array(cls, arr) -> "LineTriplet":
        return cls(*(HomLine2(a) for a in np.asarray(arr, dtype=float).reshape(3, 3)))


@dataclass(frozen=True)
class PointTriplet:
    x1: HomPoint2
    x2: HomPoint2
    x3: HomPoint2

    @classmethod
    def from_array(cls, arr) -> "PointTriplet":
        return cls(*(HomPoint2(a) for a in np.asarray(arr, dtype=float).reshape(3, 3)))


@dataclass(frozen=True)
class ConstraintSystem:
    """Stacked ``n x 12`` homogeneous system ``C v = 0``.

    ``row_tags[r]`` is ``("line", k, 1|2)`` or ``("point", k, 1..4)`` where
    ``k`` indexes the input list.  ``skipped_lines`` lists degenerate line
    triplets that contributed no rows.
    """

    C: np.ndarray
    row_tags: tuple
    skipped_lines: tuple = ()
    norms: NormalizingTransform = field(default_factory=NormalizingTransform)

    @property
    def n_rows(self) -> int:
        return self.C.shape[0]

    @property
    def A(self) -> np.ndarray:
        """Rotation block (columns of ``r1, r2, r3``)."""
        return self.C[:, :9]

    @property
    def B(self) -> np.ndarray:
        """Translation block."""
        return self.C[:, 9:]


def _householder(x: np.ndarray) -> np.ndarray:
    """Reflector ``H`` with ``H x = -sign(x0) |x| e1`` (no cancellation in ``x0 + sign |x|``)."""
    v = x.astype(float).copy()
    sign = 1.0 if v[0] >= 0 else -1.0
    v[0] += sign * np.linalg.norm(x)
    vv = v @ v
    H = np.eye(len(x))
    if vv > 0.0:
        H -= (2.0 / vv) * np.outer(v, v)
    return H


def line_rows(triplet: LineTriplet, pose2: CameraPose) -> np.ndarray:
    """Two unit-norm rows from one line triplet.

    The plane matrix ``M = [m1 m2 m3]`` has known columns
    ``m1 = (l1, 0)`` and ``m2 = (R0^T l2, t0 . l2)`` and a third column
    ``m3 = (R^T l3, t . l3) = J v`` that is linear in ``v``.  Two Householder
    reflections built from ``m1`` and ``m2`` alone are applied to ``J``; rows 3
    and 4 of the result must vanish for ``rank M = 2``.
    """
    l1, l2, l3 = triplet.l1.coeffs, triplet.l2.coeffs, triplet.l3.coeffs
    m1 = np.append(l1, 0.0)
    m2 = np.append(pose2.R.T @ l2, pose2.t @ l2)
    g11, g22, g12 = m1 @ m1, m2 @ m2, m1 @ m2
    if (g11 * g22 - g12 * g12) / (g11 * g22) < PARALLEL_TOL:
        raise DegenerateLine("back-projected planes of views 1 and 2 coincide")

    H1 = _householder(m1)
    m2r = H1 @ m2
    H2 = np.eye(4)
    H2[1:, 1:] = _householder(m2r[1:])
    Q = H2 @ H1
    # J = kron(I4, l3^T): row a of m3 is l3 . (block a of v)
    rows = np.kron(Q[2:4], l3)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _point_row_factors(x2: np.ndarray, x3: np.ndarray, norms: NormalizingTransform):
    """Contraction vectors of the four trilinearities, mapped back to raw image coordinates.

    Trilinearity ``(j, m)`` is ``sum x1^i alpha_j^q gamma_m^r T_i^{qr}`` with
    ``alpha_j = x2^3 e_j - x2^j e_3`` and ``gamma_m = x3^3 e_m - x3^m e_3`` built
    from normalized points.  Pulling the normalized tensor back through the
    transforms turns ``alpha`` into ``G^T alpha`` and ``gamma`` into ``H^T gamma``.
    """
    xh2 = norms.G @ x2
    xh3 = norms.H @ x3
    alphas, gammas = [], []
    for j in (0, 1):
        for m in (0, 1):
            a = np.zeros(3)
            a[j] = xh2[2]
            a[2] -= xh2[j]
            g = np.zeros(3)
            g[m] = xh3[2]
            g[2] -= xh3[m]
            alphas.append(norms.G.T @ a)
            gammas.append(norms.H.T @ g)
    return np.array(alphas), np.array(gammas)


def point_rows_raw(triplet: PointTriplet, pose2: CameraPose,
                   norms: NormalizingTransform | None = None) -> np.ndarray:
    """The four trilinearity rows over ``v`` before unit scaling.

    With ``T_i^{jk} = a_i^j b_4^k - a_4^j b_i^k`` the residual of a
    trilinearity with contraction vectors ``(x1, alpha, gamma)`` is
    ``(A x1 . alpha)(gamma . t) - (a4 . alpha) sum_i x1^i (gamma . r_i)``.
    """
    if norms is None:
        norms = NormalizingTransform()
    x1 = triplet.x1.coords / triplet.x1.coords[2]
    x2 = triplet.x2.coords / triplet.x2.coords[2]
    x3 = triplet.x3.coords / triplet.x3.coords[2]
    # the normalized x1 pulled back through F^-1 is x1 itself, so F drops out
    alphas, gammas = _point_row_factors(x2, x3, norms)
    Ax1 = pose2.R @ x1
    a4 = pose2.t
    rows = np.empty((4, 12))
    for n in range(4):
        al, ga = alphas[n], gammas[n]
        rows[n, :9] = -(a4 @ al) * np.kron(x1, ga)
        rows[n, 9:] = (Ax1 @ al) * ga
    return rows


def point_rows(triplet: PointTriplet, pose2: CameraPose,
               norms: NormalizingTransform | None = None) -> np.ndarray:
    """Four unit-norm rows from one point triplet."""
    rows = point_rows_raw(triplet, pose2, norms)
    n = np.linalg.norm(rows, axis=1, keepdims=True)
    if np.any(n == 0.0):
        raise DegenerateConfiguration("point triplet produced a vanishing constraint row")
    return rows / n


def view_normalization(points: list[PointTriplet]) -> NormalizingTransform:
    """Hartley transforms per view; identity for a view whose points cannot be normalized."""
    mats = []
    for attr in ("x1", "x2", "x3"):
        pts = np.array([getattr(p, attr).coords for p in points]).reshape(-1, 3)
        try:
            F, _, _ = normalize_view(pts)
        except DegenerateConfiguration:
            F = np.eye(3)
        mats.append(F)
    return NormalizingTransform(*mats)


def assemble(lines: list[LineTriplet], points: list[PointTriplet],
             pose2: CameraPose, normalize: bool = True) -> ConstraintSystem:
    """Stack line rows then point rows, in input order.

    Raises:
        InsufficientConstraints: fewer than 8 rows remain after skipping
            degenerate lines.
    """
    blocks, tags, skipped = [], [], []
    for k, lt in enumerate(lines):
        try:
            r = line_rows(lt, pose2)
        except DegenerateLine as exc:
            log.warning("skipping line triplet %d: %s", k, exc)
            skipped.append(k)
            continue
        blocks.append(r)
        tags += [("line", k, 1), ("line", k, 2)]
    norms = view_normalization(points) if (normalize and points) else NormalizingTransform()
    for k, pt in enumerate(points):
        blocks.append(point_rows(pt, pose2, norms))
        tags += [("point", k, i) for i in (1, 2, 3, 4)]
    n = 2 * (len(lines) - len(skipped)) + 4 * len(points)
    if n < MIN_ROWS:
        raise InsufficientConstraints(f"{n} usable constraint rows, need at least {MIN_ROWS}")
    return ConstraintSystem(np.vstack(blocks), tuple(tags), tuple(skipped), norms)
