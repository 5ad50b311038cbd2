"""Acceptance checks: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even when
output capture is on) or directly as ``python3 tests/test_acceptance.py``.
Set ``TRIVIEW_VGG_DIR`` to a directory of sequence directories to run the
dataset check on real data instead of the synthetic stand-in.
"""

import os
import sys
import time
from pathlib import Path

import numpy as np
import numpy.polynomial.polynomial as P

from triview_pose.beta_solver import (PIVOT_ORDERS, NullBasis, case4_roots, case4_system,
                                      solve_case4)
from triview_pose.constraints import assemble
from triview_pose.dataset import (DEFAULT_COMBOS, EvalConfig, evaluate, load_sequence,
                                  synthetic_sequence, write_sequence)
from triview_pose.geometry import rotation_error_deg
from triview_pose.polynomial import from_roots, real_roots
from triview_pose.ransac import RansacConfig, estimate
from triview_pose.simulation import (SimConfig, add_outliers, generate_scene, run_batch,
                                     run_trial, runtime_profile, trial_seed)
from triview_pose.translation import solve_translation, split_system

SEED = 20240


def report(capsys, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


def _exact(rec):
    return rec.status == "ok" and rec.rotation_error_deg < 0.01 and rec.translation_rel_error < 1e-4


def _success_rate(n_points, n_lines, trials=500):
    cfg = SimConfig(n_points=n_points, n_lines=n_lines, noise_sigmas=(0.0,), trials=trials, seed=SEED)
    return np.mean([_exact(run_trial(cfg, t, 0)) for t in range(trials)])


# 1 -------------------------------------------------------------------------

def test_zero_noise_exact_recovery(capsys):
    rate = _success_rate(4, 4)
    report(capsys, 1, rate >= 0.99,
           f"4 lines + 4 points, sigma 0, 500 trials: {100 * rate:.1f}% within 0.01 deg / 1e-4 (need >= 99%)")


# 2 -------------------------------------------------------------------------

def test_minimal_configurations(capsys):
    configs = {"3P+0L": (3, 0), "0P+6L": (0, 6), "2P+2L": (2, 2), "3P+3L": (3, 3)}
    rates = {k: _success_rate(*v) for k, v in configs.items()}
    ok = all(r >= 0.99 for r in rates.values())
    detail = ", ".join(f"{k} {100 * r:.1f}%" for k, r in rates.items())
    report(capsys, 2, ok, f"zero-noise success over 500 trials each: {detail} (need >= 99% each)")


# 3 -------------------------------------------------------------------------

def _rot(records):
    return np.array([r.rotation_error_deg for r in records if r.status == "ok"])


def test_noise_monotonicity_and_stability(capsys):
    sigmas = (0.0, 0.5, 1.0, 1.5, 2.0)
    batch = run_batch(SimConfig(n_points=4, n_lines=4, noise_sigmas=sigmas, trials=500, seed=SEED))
    lq = [np.percentile(_rot(batch.for_sigma(s)), 25) for s in sigmas]
    drops = [(b - a) / a for a, b in zip(lq, lq[1:]) if b < a]
    mono = len(drops) == 0 or (len(drops) == 1 and -drops[0] <= 0.05)
    med4 = np.median(_rot(batch.for_sigma(1.0)))
    big = run_batch(SimConfig(n_points=8, n_lines=8, noise_sigmas=(1.0,), trials=500, seed=SEED))
    med8 = np.median(_rot(big.records))
    lq_txt = " ".join(f"{x:.3g}" for x in lq)
    report(capsys, 3, mono and med8 <= med4,
           f"lower quartiles {lq_txt} deg ({len(drops)} inversions); "
           f"median at sigma 1: 8+8 {med8:.3g} deg vs 4+4 {med4:.3g} deg")


# 4 -------------------------------------------------------------------------

def test_runtime(capsys):
    counts = (8, 12, 16, 24, 32, 48, 64, 90)
    run_trial(SimConfig(), 0, 0)                     # warm-up
    prof = runtime_profile(counts, trials=100, seed=SEED)
    n, ms = np.array(prof).T
    slope = np.polyfit(np.log(n), np.log(ms), 1)[0]
    mean8 = ms[0]
    ok = mean8 <= 370 and 0.7 <= slope <= 1.4
    curve = " ".join(f"{int(a)}:{b:.1f}" for a, b in prof)
    report(capsys, 4, ok, f"4+4 mean {mean8:.1f} ms (need <= 370); log-log slope {slope:.2f} "
                          f"over 8-90 features (need 0.7-1.4); ms by count {curve}")


# 5 -------------------------------------------------------------------------

def test_constraint_spectrum(capsys):
    worst_min, worst_gap, worst_res = 0.0, np.inf, 0.0
    cfg = SimConfig(n_points=4, n_lines=4)
    for i in range(200):
        sc = generate_scene(cfg, trial_seed(SEED + 5, i))
        lines = sc.observed.line_triplets(sc.intrinsics)
        pts = sc.observed.point_triplets(sc.intrinsics)
        C = assemble(lines, pts, sc.pose2).C
        assert C.shape[0] >= 12
        s = np.linalg.svd(C, compute_uv=False)
        v = sc.pose3.v / np.linalg.norm(sc.pose3.v)
        worst_min = max(worst_min, s[-1] / s[0])
        worst_gap = min(worst_gap, s[-2] / s[0])
        worst_res = max(worst_res, np.linalg.norm(C @ v))
    ok = worst_min < 1e-9 and worst_gap > 1e-6 and worst_res < 1e-9
    report(capsys, 5, ok, f"200 scenes: max s_min/s_max {worst_min:.1e} (< 1e-9), "
                          f"min s_2/s_max {worst_gap:.1e} (> 1e-6), max |C v| {worst_res:.1e} (< 1e-9)")


# 6 -------------------------------------------------------------------------

def _basis_containing(rng, v):
    Q, _ = np.linalg.qr(np.column_stack([v, rng.normal(size=(12, 3))]))
    Q = Q @ np.linalg.qr(rng.normal(size=(4, 4)))[0]
    return NullBasis(Q, np.ones(12))


def test_case4_machinery(capsys):
    from triview_pose.geometry import random_rotation
    rng = np.random.default_rng(SEED + 6)
    worst_dir, worst_stat = 0.0, 0.0
    for _ in range(100):
        R, t = random_rotation(rng), rng.normal(size=3) * 5
        v = np.concatenate([R.ravel(order="F"), t])
        v /= np.linalg.norm(v)
        basis = _basis_containing(rng, v)
        errs = []
        for s in solve_case4(basis):
            w = basis.V @ s.betas
            w /= np.linalg.norm(w)
            errs.append(min(np.linalg.norm(w - v), np.linalg.norm(w + v)))
        worst_dir = max(worst_dir, min(errs) if errs else np.inf)
        for order in PIVOT_ORDERS:
            sysm = case4_system(basis, order)
            bound = 1e-6 * (1 + np.max(np.abs(sysm.dF)))
            for b3, _ in case4_roots(sysm):
                worst_stat = max(worst_stat, abs(P.polyval(b3, sysm.dF)) / bound)
    worst_root = 0.0
    done = 0
    while done < 50:
        roots = np.sort(rng.uniform(-3, 3, 11))
        if np.min(np.diff(roots)) < 0.05:        # keep the roots resolvable
            continue
        lead = rng.choice([-1, 1]) * rng.uniform(0.5, 10)
        got = real_roots(from_roots(roots, lead))
        worst_root = max(worst_root, np.max(np.abs(got - roots)) if len(got) == 11 else np.inf)
        done += 1
    ok = worst_dir < 1e-5 and worst_stat < 1 and worst_root < 1e-8
    report(capsys, 6, ok, f"100 bases: worst best-root direction error {worst_dir:.1e} (< 1e-5); "
                          f"worst |F'(b3)| / bound {worst_stat:.2g} (< 1); "
                          f"50 degree-11 polynomials: worst root error {worst_root:.1e} (< 1e-8)")


# 7 -------------------------------------------------------------------------

def test_translation_solver(capsys):
    rng = np.random.default_rng(SEED + 7)
    cfg = SimConfig(n_points=4, n_lines=4)
    worst_orth = 0.0
    for i in range(200):
        sc = generate_scene(cfg, trial_seed(SEED + 7, i), sigma=1.0, noise_seed=i)
        C = assemble(sc.observed.line_triplets(sc.intrinsics),
                     sc.observed.point_triplets(sc.intrinsics), sc.pose2).C
        R = sc.pose3.R
        t = solve_translation(C, R)
        s = split_system(C)
        resid = s.A_r @ R.ravel(order="F") + s.B_t @ t
        worst_orth = max(worst_orth, np.linalg.norm(s.B_t.T @ resid) / np.linalg.norm(C))
    worst_exact = 0.0
    for _ in range(200):
        A, B = rng.normal(size=(16, 9)), rng.normal(size=(16, 3))
        r, t0 = rng.normal(size=9), rng.normal(size=3)
        A = A - np.outer(A @ r + B @ t0, r) / (r @ r)
        t = solve_translation(np.hstack([A, B]), r.reshape(3, 3, order="F"))
        worst_exact = max(worst_exact, np.linalg.norm(t - t0) / max(1.0, np.linalg.norm(t0)))
    ok = worst_orth < 1e-8 and worst_exact < 1e-10
    report(capsys, 7, ok, f"200 noisy systems: worst |B^T(Ar+Bt)|/|C| {worst_orth:.1e} (< 1e-8); "
                          f"200 consistent systems: worst error {worst_exact:.1e} (< 1e-10)")


# 8 -------------------------------------------------------------------------

def test_ransac_robustness(capsys):
    cfg = SimConfig(n_points=20, n_lines=20)
    recall, precision, rot = [], [], []
    for i in range(100):
        ts = trial_seed(SEED + 8, i)
        sc = generate_scene(cfg, ts, sigma=0.5, noise_seed=0)
        corr, truth = add_outliers(sc.observed, 0.3, np.random.default_rng([ts, 1]))
        res = estimate(corr, sc.pose2, sc.intrinsics, RansacConfig(seed=i))
        m = res.inlier_mask
        recall.append((m & truth).sum() / truth.sum())
        precision.append((m & truth).sum() / max(m.sum(), 1))
        rot.append(rotation_error_deg(res.pose.R, sc.pose3.R))
    r, p, med = np.mean(recall), np.mean(precision), np.median(rot)
    report(capsys, 8, r >= 0.95 and p >= 0.95 and med < 1.0,
           f"30% outliers, 20+20, sigma 0.5, 100 trials: recall {r:.3f}, precision {p:.4f} "
           f"(need >= 0.95), median rotation error {med:.3g} deg (need < 1)")


# 9 -------------------------------------------------------------------------

def _evaluate_all(name, seq):
    res = evaluate(EvalConfig(name, views=(0, 1, 2), combos=DEFAULT_COMBOS, runs=100, seed=SEED),
                   seq=seq)
    ran = all(len(res.errors(f"{a}L+{b}P")) > 0 for a, b in DEFAULT_COMBOS)
    return ran, float(np.median(res.errors("10L+10P")))


def _round_trip_exact(a, b):
    same = [np.array_equal(x, y) for x, y in zip(a.cameras, b.cameras)]
    same += [np.array_equal(x, y) for x, y in zip(a.points_2d, b.points_2d)]
    same += [np.array_equal(x, y) for x, y in zip(a.lines_2d, b.lines_2d)]
    same += [np.array_equal(a.point_tracks, b.point_tracks),
             np.array_equal(a.line_tracks, b.line_tracks)]
    return all(same)


def test_dataset_path(capsys):
    import tempfile
    root = os.environ.get("TRIVIEW_VGG_DIR")
    if root:
        results = [(d.name, *_evaluate_all(d.name, load_sequence(d)))
                   for d in sorted(Path(root).iterdir()) if d.is_dir()]
        ok = bool(results) and any(ran and med <= 2.0 for _, ran, med in results)
        detail = "; ".join(f"{n}: combos ran {ran}, 10L+10P median {m:.3g} deg" for n, ran, m in results)
        report(capsys, 9, ok, f"[real data] {detail} (need <= 2 deg on one sequence)")
        return
    # no real data: exercise the dataset path through a written fixture
    seq = synthetic_sequence(n_views=4, n_points=80, n_lines=80, sigma=1.0, seed=SEED)
    with tempfile.TemporaryDirectory() as tmp:
        write_sequence(tmp, seq)
        back = load_sequence(tmp)
    exact = _round_trip_exact(seq, back)
    ran, med = _evaluate_all("fixture", back)
    report(capsys, 9, exact and ran,
           f"[fixture, TRIVIEW_VGG_DIR unset] round trip exact {exact}, all 8 combos ran {ran}; "
           f"10L+10P median on the synthetic fixture {med:.3g} deg "
           f"(2 deg threshold applies to real outdoor data only, not evaluated)")


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            t0 = time.perf_counter()
            try:
                fn(None)
            except AssertionError:
                failed += 1
            print(f"    ({time.perf_counter() - t0:.1f} s)")
    sys.exit(1 if failed else 0)
