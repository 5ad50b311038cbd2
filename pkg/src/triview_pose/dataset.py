"""Multiview sequences stored as whitespace-separated text, and their evaluation.

A sequence directory holds, for every view ``<stem>`` (views ordered by stem):

``<stem>.P``
    Three rows of four numbers, the 3x4 projection matrix.
``<stem>.corners``
    One ``x y`` pixel point per row (optional if no point tracks).
``<stem>.lines``
    One ``xa ya xb yb`` pixel segment per row (optional if no line tracks).

plus the track tables ``nview-corners`` and ``nview-lines`` (optional).  Each
track row has one field per view: a 0-based index into that view's feature
list, or ``*`` / ``-1`` when the feature is not observed there.  Lines starting
with ``#`` are ignored everywhere.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from ._io import atomic_write, write_csv
from .correspondences import Correspondences
from .errors import InsufficientData, MissingData, ParseError, PoseError
from .geometry import CameraPose, Intrinsics, look_at, pose_errors, project_to_so3
from .solver import estimate_pose

log = logging.getLogger(__name__)

ABSENT = -1
ABSENT_TOKENS = ("*", "-1")
DEFAULT_COMBOS = ((2, 2), (2, 3), (2, 4), (3, 3), (4, 2), (4, 4), (6, 6), (10, 10))
RUN_HEADER = ("combo", "run", "rot_deg", "t_angle_deg", "t_ratio", "status")
STATS_HEADER = ("combo",
                "rot_q1", "rot_median", "rot_q3",
                "t_angle_q1", "t_angle_median", "t_angle_q3",
                "t_ratio_q1", "t_ratio_median", "t_ratio_q3")


@dataclass(frozen=True)
class SequenceData:
    cameras: list[np.ndarray]              # (3, 4) each
    points_2d: list[np.ndarray]            # (n_v, 2) per view
    lines_2d: list[np.ndarray]             # (m_v, 2, 2) per view
    point_tracks: np.ndarray               # (N, views) int, ABSENT when missing
    line_tracks: np.ndarray                # (M, views)
    stems: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.cameras) < 3:
            raise ValueError("a sequence needs at least three cameras")

    @property
    def n_views(self) -> int:
        return len(self.cameras)

    def correspondences(self, views: Sequence[int]) -> Correspondences:
        """Every point and line track observed in all of ``views``."""
        views = list(views)
        pt = self.point_tracks[np.all(self.point_tracks[:, views] != ABSENT, axis=1)] \
            if len(self.point_tracks) else np.zeros((0, self.n_views), int)
        lt = self.line_tracks[np.all(self.line_tracks[:, views] != ABSENT, axis=1)] \
            if len(self.line_tracks) else np.zeros((0, self.n_views), int)
        pts = np.stack([self.points_2d[v][pt[:, v]] for v in views], axis=1) if len(pt) \
            else np.zeros((0, 3, 2))
        seg = np.stack([self.lines_2d[v][lt[:, v]] for v in views], axis=1) if len(lt) \
            else np.zeros((0, 3, 2, 2))
        return Correspondences(pts, seg)


# --------------------------------------------------------------------------
# reading

def _rows(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path) from None
    except UnicodeDecodeError:
        raise ParseError("not a text file", path) from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _float_table(path: Path, width: int) -> np.ndarray:
    out = []
    for lineno, fields in _rows(path):
        if len(fields) != width:
            raise ParseError(f"expected {width} numbers, got {len(fields)}", path, lineno)
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"malformed number in {fields}", path, lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite value", path, lineno)
        out.append(vals)
    return np.array(out, dtype=float).reshape(-1, width)


def read_camera(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingData(f"camera file not found: {path}")
    P = _float_table(path, 4)
    if P.shape != (3, 4):
        raise ParseError(f"camera matrix needs 3 rows, got {len(P)}", path)
    return P


def _track_table(path: Path, n_views: int, sizes: Sequence[int]) -> np.ndarray:
    out = []
    for lineno, fields in _rows(path):
        if len(fields) != n_views:
            raise ParseError(f"track row needs {n_views} fields, got {len(fields)}", path, lineno)
        row = []
        for v, f in enumerate(fields):
            if f in ABSENT_TOKENS:
                row.append(ABSENT)
                continue
            try:
                idx = int(f)
            except ValueError:
                raise ParseError(f"malformed track index {f!r}", path, lineno) from None
            if not 0 <= idx < sizes[v]:
                raise ParseError(f"index {idx} out of range for view {v} "
                                 f"({sizes[v]} features)", path, lineno)
            row.append(idx)
        out.append(row)
    return np.array(out, dtype=int).reshape(-1, n_views)


def load_sequence(directory) -> SequenceData:
    """Read a sequence directory (grammar in the module docstring).

    Raises:
        MissingData: directory or a required file is missing, or fewer than
            three cameras.
        ParseError: any malformed file, with file name and line number.
    """
    d = Path(directory)
    if not d.is_dir():
        raise MissingData(f"sequence directory not found: {d}")
    stems = sorted(p.stem for p in d.glob("*.P"))
    if len(stems) < 3:
        raise MissingData(f"need at least three *.P camera files in {d}, found {len(stems)}")
    cameras = [read_camera(d / f"{s}.P") for s in stems]

    def per_view(suffix, width, shape, tracks_name):
        needed = (d / tracks_name).is_file()
        feats = []
        for s in stems:
            p = d / f"{s}.{suffix}"
            if p.is_file():
                feats.append(_float_table(p, width).reshape((-1,) + shape))
            elif needed:
                raise MissingData(f"feature file not found: {p}")
            else:
                feats.append(np.zeros((0,) + shape))
        return feats

    points = per_view("corners", 2, (2,), "nview-corners")
    lines = per_view("lines", 4, (2, 2), "nview-lines")
    n = len(stems)
    pt = _track_table(d / "nview-corners", n, [len(p) for p in points]) \
        if (d / "nview-corners").is_file() else np.zeros((0, n), int)
    lt = _track_table(d / "nview-lines", n, [len(l) for l in lines]) \
        if (d / "nview-lines").is_file() else np.zeros((0, n), int)
    return SequenceData(cameras, points, lines, pt, lt, stems)


# --------------------------------------------------------------------------
# writing

def write_sequence(directory, seq: SequenceData) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stems = seq.stems or [f"{i:03d}" for i in range(seq.n_views)]

    def table(path, rows):
        with atomic_write(path) as fh:
            for r in rows:
                fh.write(" ".join(r) + "\n")

    for s, P, pts, segs in zip(stems, seq.cameras, seq.points_2d, seq.lines_2d):
        table(d / f"{s}.P", ([repr(float(x)) for x in row] for row in P))
        table(d / f"{s}.corners", ([repr(float(x)) for x in p] for p in pts))
        table(d / f"{s}.lines", ([repr(float(x)) for x in l.ravel()] for l in segs))
    for name, tr in (("nview-corners", seq.point_tracks), ("nview-lines", seq.line_tracks)):
        table(d / name, (["*" if i == ABSENT else str(int(i)) for i in row] for row in tr))


# --------------------------------------------------------------------------
# cameras

def decompose_camera(P) -> tuple[Intrinsics, CameraPose]:
    """Split ``P ~ K [R | t]`` with ``K`` upper triangular, positive diagonal, ``K[2,2] = 1``."""
    P = np.asarray(P, dtype=float)
    M = P[:, :3]
    if np.linalg.det(M) < 0:
        P, M = -P, -M
    K, R = scipy.linalg.rq(M)
    S = np.diag(np.sign(np.diag(K)))
    K, R = K @ S, S @ R
    # the overall scale of P lives in K, so t needs no rescaling
    t = np.linalg.solve(K, P[:, 3])
    K = np.triu(K / K[2, 2])
    return Intrinsics(K), CameraPose(project_to_so3(R), t)


def synthetic_sequence(n_views: int = 4, n_points: int = 60, n_lines: int = 60,
                       sigma: float = 0.0, seed: int = 0, focal: float = 800.0,
                       image_size=(640, 480), cube_side: float = 10.0,
                       camera_distance: float = 20.0, dropout: float = 0.2) -> SequenceData:
    """A sequence in dataset form built from a random synthetic scene.

    Cameras sit on the sphere around the cube and look at its centre.  Each
    feature is kept in a view when it projects inside the image, then dropped
    from non-leading views with probability ``dropout`` to exercise absent
    track entries.  Features are shuffled per view so track indices differ.
    """
    rng = np.random.default_rng(seed)
    w, h = image_size
    K = np.array([[focal, 0, w / 2], [0, focal, h / 2], [0, 0, 1.0]])
    dirs = rng.standard_normal((n_views, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    poses = [look_at(camera_distance * d) for d in dirs]
    half = cube_side / 2
    X = rng.uniform(-half, half, (n_points, 3))
    S = rng.uniform(-half, half, (n_lines, 2, 3))

    def proj(Y, pose):
        c = Y @ pose.R.T + pose.t
        p = c @ K.T
        return p[..., :2] / p[..., 2:3], c[..., 2]

    cams, pts2d, lines2d = [], [], []
    pt = np.full((n_points, n_views), ABSENT)
    lt = np.full((n_lines, n_views), ABSENT)
    for v, pose in enumerate(poses):
        cams.append(K @ pose.matrix)
        uv, z = proj(X, pose)
        ok = (z > 0) & np.all((uv >= 0) & (uv <= (w, h)), axis=-1)
        ue, ze = proj(S, pose)
        okl = np.all(ze > 0, axis=-1) & np.all((ue >= 0) & (ue <= (w, h)), axis=(-1, -2))
        if v > 0:
            ok &= rng.random(n_points) >= dropout
            okl &= rng.random(n_lines) >= dropout
        uv = uv + rng.normal(0, sigma, uv.shape) if sigma > 0 else uv
        ue = ue + rng.normal(0, sigma, ue.shape) if sigma > 0 else ue
        ip, il = np.flatnonzero(ok), np.flatnonzero(okl)
        ip, il = rng.permutation(ip), rng.permutation(il)
        pts2d.append(uv[ip])
        lines2d.append(ue[il])
        pt[ip, v] = np.arange(len(ip))
        lt[il, v] = np.arange(len(il))
    return SequenceData(cams, pts2d, lines2d, pt, lt, [f"{i:03d}" for i in range(n_views)])


# --------------------------------------------------------------------------
# evaluation

Estimator = Callable[[Correspondences, CameraPose, tuple], CameraPose]


def default_estimator(corr: Correspondences, pose2: CameraPose, intrinsics) -> CameraPose:
    return estimate_pose(corr, pose2, intrinsics).pose


@dataclass(frozen=True)
class EvalConfig:
    path: str
    views: tuple[int, int, int] = (0, 1, 2)
    combos: Sequence[tuple[int, int]] = DEFAULT_COMBOS      # (n_lines, n_points)
    runs: int = 100
    seed: int = 0

    def __post_init__(self):
        if len(set(self.views)) != 3 or len(self.views) != 3:
            raise ValueError("views must be three distinct indices")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        object.__setattr__(self, "views", tuple(int(v) for v in self.views))
        object.__setattr__(self, "combos", tuple((int(a), int(b)) for a, b in self.combos))


def combo_label(n_lines: int, n_points: int) -> str:
    return f"{n_lines}L+{n_points}P"


@dataclass
class EvalResult:
    rows: list[tuple]
    config: EvalConfig

    def errors(self, combo: str, metric: int = 2) -> np.ndarray:
        return np.array([r[metric] for r in self.rows if r[0] == combo and r[5] == "ok"])

    def stats(self) -> list[tuple]:
        out = []
        for nl, np_ in self.config.combos:
            label = combo_label(nl, np_)
            row = [label]
            for m in (2, 3, 4):
                e = self.errors(label, m)
                row += list(np.percentile(e, [25, 50, 75])) if e.size else [float("nan")] * 3
            out.append(tuple(row))
        return out

    def write(self, runs_path, stats_path=None) -> None:
        write_csv(runs_path, RUN_HEADER, self.rows)
        if stats_path is not None:
            write_csv(stats_path, STATS_HEADER, self.stats())


def view_geometry(seq: SequenceData, views) -> tuple[tuple[Intrinsics, ...], CameraPose, CameraPose]:
    """Per-view calibration, then poses of the 2nd and 3rd view relative to the 1st."""
    dec = [decompose_camera(seq.cameras[v]) for v in views]
    ks = tuple(k for k, _ in dec)
    ref = dec[0][1]
    return ks, dec[1][1].relative_to(ref), dec[2][1].relative_to(ref)


def evaluate(config: EvalConfig, seq: Optional[SequenceData] = None,
             estimator: Estimator = default_estimator) -> EvalResult:
    """Repeated solves on random feature subsets of one view triple.

    Every run draws the combo's line and point counts without replacement from
    the tracks seen in all three views, using a generator seeded by
    ``(seed, combo index, run)``.

    Raises:
        InsufficientData: a combo asks for more tracks than are available.
    """
    if seq is None:
        seq = load_sequence(config.path)
    if max(config.views) >= seq.n_views or min(config.views) < 0:
        raise ValueError(f"view index out of range for {seq.n_views} views")
    ks, pose2, gt = view_geometry(seq, config.views)
    corr = seq.correspondences(config.views)
    for nl, np_ in config.combos:
        if nl > corr.n_lines or np_ > corr.n_points:
            raise InsufficientData(
                f"combo {combo_label(nl, np_)} needs {nl} lines and {np_} points; "
                f"views {config.views} share {corr.n_lines} lines and {corr.n_points} points")
    rows = []
    for ci, (nl, np_) in enumerate(config.combos):
        label = combo_label(nl, np_)
        for run in range(config.runs):
            rng = np.random.default_rng([config.seed, ci, run])
            li = rng.choice(corr.n_lines, nl, replace=False)
            pi = rng.choice(corr.n_points, np_, replace=False)
            try:
                pose = estimator(corr.subset(pi, li), pose2, ks)
            except PoseError as exc:
                rows.append((label, run, math.nan, math.nan, math.nan, type(exc).__name__))
                continue
            rot, ang, ratio = pose_errors(pose, gt)
            rows.append((label, run, rot, ang, ratio, "ok"))
    return EvalResult(rows, config)
