"""Pose candidates from the near-null space of the constraint system.

The solution is written as ``v = sum_i beta_i V_i`` over the right singular
vectors ``V_i`` of the smallest singular values.  The betas are fixed by the
orthonormality of ``R``'s columns, solved by linearization for N = 1, 2, 3
and by relinearization plus a univariate polynomial for N = 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .constraints import ConstraintSystem
from .errors import (DegenerateCandidate, NoCandidates, NumericalFailure,
                     TranslationDegenerate)
from .geometry import CameraPose, project_to_so3
from .polynomial import interpolate_on_circle, real_roots
from .translation import solve_translation

FACTOR_TOL = 1e-6
CASE3_MAX_COND = 1e12
DEDUP_DEG = 0.01
DEDUP_REL_T = 1e-6


@dataclass(frozen=True)
class NullBasis:
    """``V[:, 0]`` belongs to the smallest singular value; ``sigma`` is descending."""

    V: np.ndarray
    sigma: np.ndarray

    @property
    def k(self) -> int:
        return self.V.shape[1]


@dataclass(frozen=True)
class BetaSolution:
    betas: np.ndarray
    case: int
    root_index: int = 0
    low_confidence: bool = False


@dataclass(frozen=True)
class PoseCandidate:
    pose: CameraPose
    source: BetaSolution
    residual: float


def null_basis(system: ConstraintSystem | np.ndarray, k: int = 4) -> NullBasis:
    C = system.C if isinstance(system, ConstraintSystem) else np.asarray(system, dtype=float)
    if not 1 <= k <= C.shape[1]:
        raise ValueError(f"k must be in 1..{C.shape[1]}")
    if not np.all(np.isfinite(C)):
        raise NumericalFailure("constraint matrix has non-finite entries")
    try:
        _, s, Vt = np.linalg.svd(C, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD failed: {exc}") from exc
    sigma = np.zeros(C.shape[1])
    sigma[: len(s)] = s
    return NullBasis(Vt[::-1][:k].T.copy(), sigma)


# --------------------------------------------------------------------------
# quadratic constraints

def _gram_blocks(V: np.ndarray) -> list[list[np.ndarray]]:
    """``G[a][b][i, j] = V_i^(a) . V_j^(b)`` with ``V^(a)`` the rows of ``r_a``."""
    blocks = [V[3 * a: 3 * a + 3] for a in range(3)]
    return [[blocks[a].T @ blocks[b] for b in range(3)] for a in range(3)]


def quadratic_forms(V: np.ndarray) -> dict[str, np.ndarray]:
    """Symmetric forms ``Q`` such that each constraint reads ``beta^T Q beta``.

    Keys: ``n1, n2, n3`` (squared column norms) and ``o12, o23, o31`` (dot products).
    """
    G = _gram_blocks(V)

    def sym(M):
        return 0.5 * (M + M.T)

    return {
        "n1": sym(G[0][0]), "n2": sym(G[1][1]), "n3": sym(G[2][2]),
        "o12": sym(G[0][1]), "o23": sym(G[1][2]), "o31": sym(G[2][0]),
    }


def equal_norm_forms(V: np.ndarray) -> list[np.ndarray]:
    """The five homogeneous constraints: three dot products and two norm differences."""
    q = quadratic_forms(V)
    return [q["o12"], q["o23"], q["o31"], q["n1"] - q["n2"], q["n2"] - q["n3"]]


def _pairs(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def monomial_row(Q: np.ndarray) -> np.ndarray:
    """Coefficients over ``[beta_1^2 .. beta_k^2, beta_i beta_j (i<j)]``."""
    k = Q.shape[0]
    return np.concatenate([np.diag(Q), [2.0 * Q[i, j] for i, j in _pairs(k)]])


# --------------------------------------------------------------------------
# factorization of monomial vectors

def factor_pair(m) -> tuple[np.ndarray, bool]:
    """``[b1^2, b2^2, b1 b2] -> (b1, b2)`` with ``b1 >= 0``; second value flags inconsistency."""
    m = np.asarray(m, dtype=float)
    if m[0] + m[1] < 0:
        m = -m
    scale = np.linalg.norm(m)
    if scale == 0.0 or max(m[0], m[1]) <= FACTOR_TOL * scale:
        raise DegenerateCandidate("monomial vector has no positive squared term")
    b1 = np.sqrt(max(m[0], 0.0))
    b2 = (1.0 if m[2] >= 0 else -1.0) * np.sqrt(max(m[1], 0.0))
    low = (min(m[0], m[1]) < -FACTOR_TOL * scale
           or abs(m[2] ** 2 - max(m[0], 0.0) * max(m[1], 0.0)) > FACTOR_TOL * scale ** 2)
    return np.array([b1, b2]), bool(low)


def factor_triple(m) -> tuple[np.ndarray, bool]:
    """``[b1^2, b2^2, b3^2, b1b2, b1b3, b2b3] -> betas`` via the dominant square and cross terms."""
    m = np.asarray(m, dtype=float)
    sq = m[:3]
    cross = {(0, 1): m[3], (0, 2): m[4], (1, 2): m[5]}
    d = int(np.argmax(sq))
    scale = np.linalg.norm(m)
    if scale == 0.0 or sq[d] <= FACTOR_TOL * scale:
        raise DegenerateCandidate("monomial vector has no positive squared term")
    beta = np.zeros(3)
    beta[d] = np.sqrt(sq[d])
    for j in range(3):
        if j != d:
            beta[j] = cross[tuple(sorted((d, j)))] / beta[d]
    resid = max(abs(beta[i] ** 2 - sq[i]) for i in range(3))
    resid = max(resid, max(abs(beta[i] * beta[j] - c) for (i, j), c in cross.items()))
    return beta, bool(resid > FACTOR_TOL * scale)


# --------------------------------------------------------------------------
# cases

def solve_case1(basis: NullBasis) -> list[BetaSolution]:
    r = basis.V[:9, 0]
    n = np.linalg.norm(r)
    if n <= 1e-12:
        raise DegenerateCandidate("rotation part of the singular vector vanishes")
    return [BetaSolution(np.array([1.0 / n]), 1), BetaSolution(np.array([-1.0 / n]), 1)]


def solve_case2(basis: NullBasis) -> list[BetaSolution]:
    if basis.k < 2:
        raise ValueError("case 2 needs a basis with at least 2 columns")
    M = np.array([monomial_row(Q) for Q in equal_norm_forms(basis.V[:, :2])])
    _, _, Vt = np.linalg.svd(M)
    beta, low = factor_pair(Vt[-1])
    return [BetaSolution(beta, 2, 0, low), BetaSolution(-beta, 2, 1, low)]


def solve_case3(basis: NullBasis) -> list[BetaSolution]:
    if basis.k < 3:
        raise ValueError("case 3 needs a basis with at least 3 columns")
    q = quadratic_forms(basis.V[:, :3])
    A = np.array([monomial_row(q[key]) for key in ("o12", "o23", "o31", "n1", "n2", "n3")])
    b = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    if np.linalg.cond(A) > CASE3_MAX_COND:
        raise DegenerateCandidate("case-3 monomial system is singular")
    beta, low = factor_triple(np.linalg.solve(A, b))
    return [BetaSolution(beta, 3, 0, low), BetaSolution(-beta, 3, 1, low)]


@dataclass(frozen=True)
class Case4System:
    """Polynomial objects of the relinearization, kept for inspection and tests.

    ``W`` holds the basis columns in solver order: the three scaled-out
    coefficients first, then the pivot column with coefficient fixed to 1.
    ``M[c, col]`` is the ascending coefficient array (length 3) in ``beta3``
    of the 5x6 matrix acting on ``[b1^2, b2^2, b1 b2, b1, b2, 1]``.
    """

    W: np.ndarray
    order: np.ndarray
    M: np.ndarray
    u: list
    f: list
    dF: np.ndarray

    def matrix_at(self, beta3: float) -> np.ndarray:
        return np.array([[P.polyval(beta3, self.M[c, j]) for j in range(6)] for c in range(5)])

    def null_vector_at(self, beta3: float) -> np.ndarray:
        return np.array([P.polyval(beta3, u) for u in self.u])


def case4_system(basis: NullBasis, order=(1, 2, 3, 0)) -> Case4System:
    """Build the 5x6 polynomial matrix, cofactor null vector, compatibility polynomials and ``F'``.

    ``order[3]`` is the pivot column (coefficient fixed to 1) and ``order[2]``
    the column whose coefficient becomes the polynomial variable.
    """
    if basis.k < 4:
        raise ValueError("case 4 needs a basis with 4 columns")
    order = np.asarray(order)
    W = basis.V[:, order]
    M = np.zeros((5, 6, 3))
    for c, Q in enumerate(equal_norm_forms(W)):
        M[c, 0, 0] = Q[0, 0]
        M[c, 1, 0] = Q[1, 1]
        M[c, 2, 0] = 2 * Q[0, 1]
        M[c, 3] = [2 * Q[0, 3], 2 * Q[0, 2], 0.0]
        M[c, 4] = [2 * Q[1, 3], 2 * Q[1, 2], 0.0]
        M[c, 5] = [Q[3, 3], 2 * Q[2, 3], Q[2, 2]]

    degrees = [4, 4, 4, 3, 3, 2]

    def minors(z):
        # (len(z), 5, 6) complex matrices, then the signed 5x5 minors
        Mz = M[..., 0][None] + M[..., 1][None] * z[:, None, None] + M[..., 2][None] * (z ** 2)[:, None, None]
        out = np.empty((len(z), 6), dtype=complex)
        for i in range(6):
            out[:, i] = (-1) ** i * np.linalg.det(np.delete(Mz, i, axis=2))
        return out

    coeffs = interpolate_on_circle(minors, 4)
    u = [coeffs[: degrees[i] + 1, i].copy() for i in range(6)]
    f = [
        P.polysub(P.polymul(u[3], u[4]), P.polymul(u[2], u[5])),
        P.polysub(P.polymul(u[3], u[3]), P.polymul(u[0], u[5])),
        P.polysub(P.polymul(u[4], u[4]), P.polymul(u[1], u[5])),
    ]
    dF = np.zeros(12)
    for fi in f:
        term = 2.0 * P.polymul(fi, P.polyder(fi))
        dF[: len(term)] += term
    return Case4System(W, order, M, u, f, dF)


# Each column is the pivot once, with the next column as the polynomial
# variable.  A single ordering can leave the 5x6 matrix nearly rank 4 at the
# true root, which flattens F' there; cycling the pivot avoids that.
PIVOT_ORDERS = ((1, 2, 3, 0), (2, 3, 0, 1), (3, 0, 1, 2), (0, 1, 2, 3))


def case4_roots(sysm: Case4System) -> list[tuple[float, np.ndarray]]:
    """Real roots of ``F'`` and the matching ``betas`` (original column order)."""
    out = []
    for b3 in real_roots(sysm.dF):
        u = sysm.null_vector_at(b3)
        if abs(u[5]) <= 1e-12 * np.max(np.abs(u)):
            continue
        b = np.array([u[3] / u[5], u[4] / u[5], b3, 1.0])
        v = sysm.W @ b
        norms = np.linalg.norm(v[:9].reshape(3, 3, order="F"), axis=0)
        betas = np.empty(4)
        betas[sysm.order] = b / norms.mean()
        out.append((float(b3), betas))
    return out


def solve_case4(basis: NullBasis, orders=PIVOT_ORDERS) -> list[BetaSolution]:
    sols = []
    for order in orders:
        for _, betas in case4_roots(case4_system(basis, order)):
            sols.append(BetaSolution(betas, 4, len(sols)))
    if not sols:
        raise DegenerateCandidate("no usable real root for case 4")
    return sols


# --------------------------------------------------------------------------
# reconstruction

def reconstruct_rotation(basis: NullBasis, solution: BetaSolution) -> tuple[np.ndarray, np.ndarray]:
    """Rotation from the beta combination: fix ``det = 1`` then project onto SO(3).

    Returns ``(R, v)`` where ``v`` is the combination rescaled by the same
    determinant factor.
    """
    betas = np.asarray(solution.betas, dtype=float)
    v = basis.V[:, : len(betas)] @ betas
    Q = v[:9].reshape(3, 3, order="F")
    det = np.linalg.det(Q)
    if abs(det) <= 1e-12 * np.linalg.norm(Q) ** 3:
        raise DegenerateCandidate("raw rotation matrix is singular")
    s = np.cbrt(1.0 / det)
    return project_to_so3(s * Q), s * v


# for rotations |R1 - R2|_F = 2 sqrt(2) sin(angle / 2)
_DEDUP_FRO = 2.0 * np.sqrt(2.0) * np.sin(np.radians(DEDUP_DEG) / 2.0)


def _is_duplicate(pose: CameraPose, Rs: list, ts: list) -> bool:
    if not Rs:
        return False
    dR = np.linalg.norm(np.asarray(Rs) - pose.R, axis=(1, 2))
    T = np.asarray(ts)
    scale = np.maximum(np.maximum(np.linalg.norm(T, axis=1), np.linalg.norm(pose.t)), 1e-300)
    dt = np.linalg.norm(T - pose.t, axis=1)
    return bool(np.any((dR < _DEDUP_FRO) & (dt < DEDUP_REL_T * scale)))


def all_candidates(system: ConstraintSystem, cases=(1, 2, 3, 4)) -> list[PoseCandidate]:
    """Pool the candidates of every case on one 4-column basis, deduplicated.

    Raises:
        NoCandidates: nothing survived.
    """
    basis = null_basis(system, 4)
    solvers = {1: solve_case1, 2: solve_case2, 3: solve_case3, 4: solve_case4}
    out: list[PoseCandidate] = []
    Rs, ts = [], []
    for case in cases:
        try:
            solutions = solvers[case](basis)
        except DegenerateCandidate:
            continue
        for sol in solutions:
            try:
                R, _ = reconstruct_rotation(basis, sol)
                t = solve_translation(system, R)
            except (DegenerateCandidate, TranslationDegenerate):
                continue
            pose = CameraPose(R, t)
            if _is_duplicate(pose, Rs, ts):
                continue
            out.append(PoseCandidate(pose, sol, float(np.linalg.norm(system.C @ pose.v))))
            Rs.append(pose.R)
            ts.append(pose.t)
    if not out:
        raise NoCandidates("no pose candidate could be reconstructed")
    return out
