"""
Evaluating on a multiview sequence
==================================

Write a sequence directory in the dataset layout, read it back, and run
repeated solves on random feature subsets.  Pass a directory on the command
line to evaluate a real sequence instead.
"""

import sys
import tempfile

import numpy as np

from triview_pose.dataset import (EvalConfig, evaluate, load_sequence, synthetic_sequence,
                                  write_sequence)

if len(sys.argv) > 1:
    seq = load_sequence(sys.argv[1])
else:
    tmp = tempfile.mkdtemp()
    write_sequence(tmp, synthetic_sequence(sigma=1.0, seed=4))
    seq = load_sequence(tmp)
    print("wrote a synthetic sequence to", tmp)

print(f"{seq.n_views} views; {len(seq.point_tracks)} point tracks, {len(seq.line_tracks)} line tracks")
corr = seq.correspondences((0, 1, 2))
print(f"seen in views 0, 1, 2: {corr.n_points} points, {corr.n_lines} lines")

res = evaluate(EvalConfig("demo", combos=((3, 3), (6, 6), (10, 10)), runs=50), seq=seq)
for row in res.stats():
    print(f"{row[0]:>8}: rotation error median {row[2]:.3f} deg  (q1 {row[1]:.3f}, q3 {row[3]:.3f})")
