"""Monte Carlo experiments on synthetic scenes.

Points and segment endpoints are drawn uniformly in a cube centred at the
origin and viewed by three cameras that look at the origin.  Camera 1 sits
on a sphere around the cube; cameras 2 and 3 either sit on the same sphere
(large motion) or within a ball around camera 1 (small motion).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._io import write_csv
from .correspondences import Correspondences
from .errors import PoseError, SceneGenerationFailure
from .geometry import CameraPose, Intrinsics, look_at, pose_errors, relative_translation_error
from .solver import estimate_pose

TRIAL_HEADER = ("sigma", "rot_deg", "t_angle_deg", "t_ratio", "ms", "status")
AGGREGATE_HEADER = (
    "sigma", "trials", "ok",
    "rot_q1", "rot_median", "rot_mean",
    "t_angle_q1", "t_angle_median", "t_angle_mean",
    "t_ratio_q1", "t_ratio_median", "t_ratio_mean",
    "ms_mean",
)


@dataclass(frozen=True)
class SimConfig:
    n_points: int = 4
    n_lines: int = 4
    noise_sigmas: Sequence[float] = (0.0, 0.5, 1.0, 1.5, 2.0)
    trials: int = 500
    motion: str = "large"
    cube_side: float = 10.0
    camera_distance: float = 20.0
    small_motion_radius: float = 5.0
    image_size: tuple[int, int] = (640, 480)
    focal: float = 800.0
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 0 or self.n_lines < 0 or self.n_points + self.n_lines == 0:
            raise ValueError("need a positive number of features")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.motion not in ("large", "small"):
            raise ValueError("motion must be 'large' or 'small'")
        if min(self.cube_side, self.camera_distance, self.small_motion_radius, self.focal) <= 0:
            raise ValueError("geometric parameters must be positive")
        if any(s < 0 for s in self.noise_sigmas):
            raise ValueError("noise sigmas must be non-negative")
        object.__setattr__(self, "noise_sigmas", tuple(float(s) for s in self.noise_sigmas))
        object.__setattr__(self, "image_size", tuple(int(s) for s in self.image_size))

    @property
    def intrinsics(self) -> Intrinsics:
        w, h = self.image_size
        return Intrinsics.from_focal(self.focal, w / 2.0, h / 2.0)

    def banner(self) -> str:
        w, h = self.image_size
        return (f"cube {self.cube_side:g} m | camera distance {self.camera_distance:g} m | "
                f"small-motion radius {self.small_motion_radius:g} m | image {w}x{h} | "
                f"focal {self.focal:g} px | {self.trials} trials | motion {self.motion} | "
                f"{self.n_lines} lines + {self.n_points} points | sigmas {list(self.noise_sigmas)} | "
                f"seed {self.seed}")


@dataclass(frozen=True)
class Scene:
    world_poses: tuple[CameraPose, CameraPose, CameraPose]
    points3d: np.ndarray
    segments3d: np.ndarray
    clean: Correspondences
    observed: Correspondences
    intrinsics: Intrinsics

    @property
    def pose2(self) -> CameraPose:
        return self.world_poses[1].relative_to(self.world_poses[0])

    @property
    def pose3(self) -> CameraPose:
        return self.world_poses[2].relative_to(self.world_poses[0])


@dataclass(frozen=True)
class TrialRecord:
    sigma: float
    rotation_error_deg: float
    translation_angle_deg: float
    translation_ratio_error: float
    solve_time: float
    status: str = "ok"
    translation_rel_error: float = float("nan")

    def row(self):
        return (self.sigma, self.rotation_error_deg, self.translation_angle_deg,
                self.translation_ratio_error, self.solve_time, self.status)


@dataclass
class BatchResult:
    config: SimConfig
    records: list[TrialRecord] = field(default_factory=list)

    def for_sigma(self, sigma: float) -> list[TrialRecord]:
        return [r for r in self.records if r.sigma == sigma]

    def aggregate(self) -> list[dict]:
        rows = []
        for s in self.config.noise_sigmas:
            recs = self.for_sigma(s)
            ok = [r for r in recs if r.status == "ok"]
            row = {"sigma": s, "trials": len(recs), "ok": len(ok)}
            for name, attr in (("rot", "rotation_error_deg"), ("t_angle", "translation_angle_deg"),
                               ("t_ratio", "translation_ratio_error")):
                vals = np.array([getattr(r, attr) for r in ok])
                row[f"{name}_q1"] = float(np.percentile(vals, 25)) if vals.size else float("nan")
                row[f"{name}_median"] = float(np.median(vals)) if vals.size else float("nan")
                row[f"{name}_mean"] = float(vals.mean()) if vals.size else float("nan")
            times = [r.solve_time for r in ok]
            row["ms_mean"] = float(np.mean(times)) if times else float("nan")
            rows.append(row)
        return rows

    def write(self, trials_path, aggregate_path=None) -> None:
        write_csv(trials_path, TRIAL_HEADER, [r.row() for r in self.records])
        if aggregate_path is not None:
            write_csv(aggregate_path, AGGREGATE_HEADER,
                      [[row[h] for h in AGGREGATE_HEADER] for row in self.aggregate()])


# --------------------------------------------------------------------------
# scene generation

def _unit_vectors(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def place_cameras(config: SimConfig, rng: np.random.Generator) -> tuple[CameraPose, ...]:
    c1 = config.camera_distance * _unit_vectors(rng, 1)[0]
    if config.motion == "large":
        c23 = config.camera_distance * _unit_vectors(rng, 2)
    else:
        r = config.small_motion_radius * rng.random(2) ** (1.0 / 3.0)
        c23 = c1 + r[:, None] * _unit_vectors(rng, 2)
    return tuple(look_at(c) for c in (c1, c23[0], c23[1]))


def _visible(X, poses, K, size):
    """Mask of world points inside every image (with positive depth)."""
    w, h = size
    ok = np.ones(len(X), dtype=bool)
    for p in poses:
        Y = X @ p.R.T + p.t
        ok &= Y[:, 2] > 1e-6
        with np.errstate(divide="ignore", invalid="ignore"):
            u = K[0, 0] * Y[:, 0] / Y[:, 2] + K[0, 2]
            v = K[1, 1] * Y[:, 1] / Y[:, 2] + K[1, 2]
        ok &= (u >= 0) & (u <= w) & (v >= 0) & (v <= h)
    return ok


def _project_px(X, pose, K):
    Y = X @ pose.R.T + pose.t
    h = Y @ K.T
    return h[..., :2] / h[..., 2:3]


def _draw_visible(rng, n, poses, config, pairs: bool, budget: int = 200):
    half = config.cube_side / 2.0
    K = config.intrinsics.K
    out = []
    have = 0
    for _ in range(budget):
        if have >= n:
            break
        batch = max(64, 4 * (n - have))
        if pairs:
            E = rng.uniform(-half, half, (batch, 2, 3))
            ok = _visible(E[:, 0], poses, K, config.image_size) & _visible(E[:, 1], poses, K, config.image_size)
            good = E[ok]
        else:
            X = rng.uniform(-half, half, (batch, 3))
            good = X[_visible(X, poses, K, config.image_size)]
        out.append(good[: n - have])
        have += len(out[-1])
    if have < n:
        raise SceneGenerationFailure(f"could not place {n} visible features within the budget")
    return np.concatenate(out) if out else np.zeros((0, 2, 3) if pairs else (0, 3))


def generate_scene(config: SimConfig, trial_seed: int, sigma: float = 0.0,
                   noise_seed: Optional[int] = None) -> Scene:
    """One random scene plus its noisy observations.

    The geometry depends only on ``trial_seed``; the noise on
    ``(trial_seed, noise_seed)``.  Features not visible in all three images
    are redrawn so counts are exact.
    """
    rng = np.random.default_rng(trial_seed)
    poses = place_cameras(config, rng)
    X = _draw_visible(rng, config.n_points, poses, config, pairs=False)
    S = _draw_visible(rng, config.n_lines, poses, config, pairs=True)
    if len(X) == 0:
        X = np.zeros((0, 3))
    if len(S) == 0:
        S = np.zeros((0, 2, 3))
    K = config.intrinsics.K
    pts = np.stack([_project_px(X, p, K) for p in poses], axis=1) if len(X) else np.zeros((0, 3, 2))
    seg = np.stack([_project_px(S, p, K) for p in poses], axis=1) if len(S) else np.zeros((0, 3, 2, 2))
    clean = Correspondences(pts, seg)
    if sigma > 0:
        nrng = np.random.default_rng([trial_seed, 0 if noise_seed is None else noise_seed, 1])
        pts = pts + nrng.normal(0.0, sigma, pts.shape)
        seg = seg + nrng.normal(0.0, sigma, seg.shape)
    return Scene(poses, X, S, clean, Correspondences(pts, seg), config.intrinsics)


def add_outliers(corr: Correspondences, fraction: float, rng: np.random.Generator,
                 image_size=(640, 480)) -> tuple[Correspondences, np.ndarray]:
    """Replace a fraction of each feature class with uniform random observations.

    Every view of a corrupted feature is redrawn uniformly inside the image.
    Returns the corrupted set and the true inlier mask (points, then lines).
    """
    w, h = image_size
    pts = corr.points.copy()
    seg = corr.segments.copy()
    bad_p = rng.permutation(corr.n_points)[: int(round(fraction * corr.n_points))]
    bad_l = rng.permutation(corr.n_lines)[: int(round(fraction * corr.n_lines))]
    pts[bad_p] = rng.uniform((0, 0), (w, h), (len(bad_p), 3, 2))
    seg[bad_l] = rng.uniform((0, 0), (w, h), (len(bad_l), 3, 2, 2))
    mask = np.ones(corr.n_points + corr.n_lines, dtype=bool)
    mask[bad_p] = False
    mask[corr.n_points + bad_l] = False
    return Correspondences(pts, seg), mask


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


# --------------------------------------------------------------------------
# batch

def run_trial(config: SimConfig, trial: int, sigma_index: int) -> TrialRecord:
    sigma = config.noise_sigmas[sigma_index]
    ts = trial_seed(config.seed, trial)
    try:
        scene = generate_scene(config, ts, sigma, noise_seed=sigma_index)
    except SceneGenerationFailure:
        return TrialRecord(sigma, *(float("nan"),) * 4, status="SceneGenerationFailure")
    t0 = time.perf_counter()
    try:
        est = estimate_pose(scene.observed, scene.pose2, scene.intrinsics)
    except PoseError as exc:
        ms = 1e3 * (time.perf_counter() - t0)
        return TrialRecord(sigma, *(float("nan"),) * 3, ms, status=type(exc).__name__)
    ms = 1e3 * (time.perf_counter() - t0)
    gt = scene.pose3
    rot, t_ang, t_ratio = pose_errors(est.pose, gt)
    return TrialRecord(sigma, rot, t_ang, t_ratio, ms, "ok",
                       relative_translation_error(est.pose.t, gt.t))


def run_batch(config: SimConfig) -> BatchResult:
    """Every sigma x trial.  A trial keeps its scene geometry across sigmas."""
    result = BatchResult(config)
    for si in range(len(config.noise_sigmas)):
        for trial in range(config.trials):
            result.records.append(run_trial(config, trial, si))
    return result


def runtime_profile(feature_counts: Sequence[int], trials: int = 100, seed: int = 0,
                    sigma: float = 1.0) -> list[tuple[int, float]]:
    """Mean solve time (ms) per total feature count, half lines and half points."""
    out = []
    for n in feature_counts:
        cfg = SimConfig(n_points=n // 2, n_lines=n - n // 2, noise_sigmas=(sigma,),
                        trials=trials, seed=seed)
        times = [run_trial(cfg, t, 0).solve_time for t in range(trials)]
        out.append((n, float(np.nanmean(times))))
    return out
