"""Least-squares translation for a fixed rotation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TranslationDegenerate

MAX_COND = 1e12


@dataclass(frozen=True)
class SplitSystem:
    A_r: np.ndarray
    B_t: np.ndarray


def split_system(system) -> SplitSystem:
    C = getattr(system, "C", system)
    C = np.asarray(C, dtype=float)
    return SplitSystem(C[:, :9], C[:, 9:])


def solve_translation(system, R) -> np.ndarray:
    """``t`` minimizing ``|A r + B t|`` with ``r`` the column-stacked ``R``.

    Solved by SVD-based least squares instead of the normal equations.

    Raises:
        TranslationDegenerate: ``B`` is rank deficient (condition > 1e12).
    """
    split = split_system(system)
    r = np.asarray(R, dtype=float).ravel(order="F")
    t, _, rank, s = np.linalg.lstsq(split.B_t, -split.A_r @ r, rcond=None)
    if rank < 3 or s[0] == 0.0 or s[0] / s[-1] > MAX_COND:
        raise TranslationDegenerate("translation block is rank deficient")
    return t
