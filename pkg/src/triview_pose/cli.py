"""Command-line front end: ``solve``, ``simulate`` and ``evaluate``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 too few
constraints, 4 no valid pose.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import dataset, formats
from ._io import write_csv
from .errors import (
    InsufficientConstraints,
    InsufficientData,
    MissingData,
    ParseError,
    PoseError,
)
from .geometry import pose_errors
from .ransac import RansacConfig, estimate
from .simulation import SimConfig, run_batch
from .solver import estimate_pose

EXIT_INPUT, EXIT_CONSTRAINTS, EXIT_NO_POSE = 2, 3, 4

SOLVE_HEADER = tuple(f"R{i}{j}" for i in range(1, 4) for j in range(1, 4)) + \
    ("t1", "t2", "t3", "combined_px", "candidates", "inliers")

TRIALS_CSV_NOTE = """\
CSV layout (gnuplot: set datafile separator ','):
  trials     sigma,rot_deg,t_angle_deg,t_ratio,ms,status
  aggregate  sigma,trials,ok,rot_q1,rot_median,rot_mean,t_angle_q1,t_angle_median,
             t_angle_mean,t_ratio_q1,t_ratio_median,t_ratio_mean,ms_mean
"""

EVAL_CSV_NOTE = """\
CSV layout (gnuplot: set datafile separator ','):
  runs   combo,run,rot_deg,t_angle_deg,t_ratio,status
  stats  combo,rot_q1,rot_median,rot_q3,t_angle_q1,t_angle_median,t_angle_q3,
         t_ratio_q1,t_ratio_median,t_ratio_q3
"""


def exit_code(exc: PoseError) -> int:
    if isinstance(exc, (ParseError, MissingData)):
        return EXIT_INPUT
    if isinstance(exc, (InsufficientConstraints, InsufficientData)):
        return EXIT_CONSTRAINTS
    return EXIT_NO_POSE


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_solve(args) -> int:
    corr = formats.read_correspondences(args.correspondences)
    setup = formats.read_cameras(args.cameras)
    inliers = ""
    if args.ransac:
        cfg = RansacConfig(sample_lines=args.sample_lines, sample_points=args.sample_points,
                           max_iterations=args.max_iterations,
                           inlier_threshold_px=args.threshold, seed=args.seed)
        res = estimate(corr, setup.pose2, setup.intrinsics, cfg)
        pose, combined, n_cand = res.pose, res.best_score, res.n_candidates
        inliers = f"{int(res.inlier_mask.sum())}/{len(res.inlier_mask)}"
    else:
        est = estimate_pose(corr, setup.pose2, setup.intrinsics)
        pose, combined, n_cand = est.pose, est.score.combined, len(est.candidates)
    print("R " + " ".join(_fmt(x) for x in pose.R.ravel()))
    print("t " + " ".join(_fmt(x) for x in pose.t))
    print(f"combined_error_px {combined:.6g}")
    print(f"candidates {n_cand}")
    if args.ransac:
        print(f"inliers {inliers}")
    if setup.pose3_true is not None:
        rot, ang, ratio = pose_errors(pose, setup.pose3_true)
        print(f"truth rot_deg {rot:.6g} t_angle_deg {ang:.6g} t_ratio {ratio:.6g}")
    if args.csv:
        row = [*pose.R.ravel(), *pose.t, combined, n_cand, inliers]
        write_csv(args.csv, SOLVE_HEADER, [row])
    return 0


def cmd_simulate(args) -> int:
    cfg = SimConfig(n_points=args.points, n_lines=args.lines, noise_sigmas=args.sigma,
                    trials=args.trials, motion=args.motion, cube_side=args.cube_side,
                    camera_distance=args.camera_distance,
                    small_motion_radius=args.small_motion_radius,
                    image_size=(args.width, args.height), focal=args.focal, seed=args.seed)
    print(cfg.banner())
    result = run_batch(cfg)
    result.write(args.out, args.aggregate)
    for row in result.aggregate():
        print(f"sigma {row['sigma']:g}: ok {row['ok']}/{row['trials']}  "
              f"rot q1 {row['rot_q1']:.4g} median {row['rot_median']:.4g} deg  "
              f"ms {row['ms_mean']:.3g}")
    return 0


def cmd_evaluate(args) -> int:
    combos = [tuple(c) for c in args.combo] if args.combo else dataset.DEFAULT_COMBOS
    cfg = dataset.EvalConfig(args.sequence, tuple(args.views), combos, args.runs, args.seed)
    result = dataset.evaluate(cfg)
    result.write(args.out, args.stats)
    for row in result.stats():
        print(f"{row[0]}: rot median {row[2]:.4g} deg (q1 {row[1]:.4g}, q3 {row[3]:.4g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    raw = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(
        prog="triview",
        description="Pose of a third calibrated view from point and line triplets.",
        epilog="exit codes: 0 ok, 2 bad input, 3 too few constraints, 4 no valid pose",
        formatter_class=raw)
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="estimate the pose of view 3",
                       description="Estimate the pose of view 3 relative to view 1.",
                       epilog=formats.__doc__, formatter_class=raw)
    s.add_argument("correspondences", help="correspondence file (grammar below)")
    s.add_argument("cameras", help="camera key-value file (grammar below)")
    s.add_argument("--ransac", action="store_true", help="robust estimation with inlier classification")
    s.add_argument("--threshold", type=float, default=2.0, help="inlier threshold in pixels (default 2)")
    s.add_argument("--max-iterations", type=int, default=500, help="RANSAC iteration cap (default 500)")
    s.add_argument("--sample-lines", type=int, default=3, help="lines per RANSAC sample (default 3)")
    s.add_argument("--sample-points", type=int, default=3, help="points per RANSAC sample (default 3)")
    s.add_argument("--seed", type=int, default=0, help="RANSAC seed (default 0)")
    s.add_argument("--csv", help="also write the result as a one-row CSV")
    s.set_defaults(func=cmd_solve)

    d = SimConfig()
    m = sub.add_parser("simulate", help="Monte Carlo experiments on synthetic scenes",
                       description="Run seeded synthetic trials and write per-trial and aggregate CSVs.",
                       epilog=TRIALS_CSV_NOTE, formatter_class=raw)
    m.add_argument("--points", type=int, default=d.n_points, help=f"points per scene (default {d.n_points})")
    m.add_argument("--lines", type=int, default=d.n_lines, help=f"lines per scene (default {d.n_lines})")
    m.add_argument("--sigma", type=float, nargs="+", default=list(d.noise_sigmas),
                   help="pixel noise levels (default 0 0.5 1 1.5 2)")
    m.add_argument("--trials", type=int, default=d.trials, help=f"trials per noise level (default {d.trials})")
    m.add_argument("--motion", choices=("large", "small"), default=d.motion, help="camera motion regime")
    m.add_argument("--cube-side", type=float, default=d.cube_side, help="scene cube side in m (default 10)")
    m.add_argument("--camera-distance", type=float, default=d.camera_distance,
                   help="camera distance from the origin in m (default 20)")
    m.add_argument("--small-motion-radius", type=float, default=d.small_motion_radius,
                   help="ball radius around camera 1 for small motion in m (default 5)")
    m.add_argument("--width", type=int, default=d.image_size[0], help="image width in px (default 640)")
    m.add_argument("--height", type=int, default=d.image_size[1], help="image height in px (default 480)")
    m.add_argument("--focal", type=float, default=d.focal, help="focal length in px (default 800)")
    m.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    m.add_argument("--out", default="trials.csv", help="per-trial CSV (default trials.csv)")
    m.add_argument("--aggregate", default="aggregate.csv", help="per-sigma CSV (default aggregate.csv)")
    m.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evaluate", help="repeated solves on a multiview sequence",
                       description="Evaluate on a sequence directory.\n\n" + dataset.__doc__,
                       epilog=EVAL_CSV_NOTE, formatter_class=raw)
    e.add_argument("sequence", help="sequence directory")
    e.add_argument("--views", type=int, nargs=3, default=[0, 1, 2], metavar=("I", "J", "K"),
                   help="view triple, 0-based in stem order (default 0 1 2)")
    e.add_argument("--combo", type=int, nargs=2, action="append", metavar=("LINES", "POINTS"),
                   help="feature combination, repeatable (default: 2 2, 2 3, 2 4, 3 3, 4 2, 4 4, 6 6, 10 10)")
    e.add_argument("--runs", type=int, default=100, help="runs per combination (default 100)")
    e.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    e.add_argument("--out", default="runs.csv", help="per-run CSV (default runs.csv)")
    e.add_argument("--stats", default="stats.csv", help="quartile CSV (default stats.csv)")
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PoseError as exc:
        code = exit_code(exc)
        message = f"{type(exc).__name__}: {exc}"
    except ValueError as exc:
        code, message = EXIT_INPUT, f"invalid argument: {exc}"
    print(f"error: {message}", file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
