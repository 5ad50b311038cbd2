"""Small univariate polynomial toolkit.

Coefficient arrays are in ascending order: ``c[0] + c[1] x + c[2] x^2 + ...``,
matching :mod:`numpy.polynomial.polynomial`.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

REAL_TOL = 1e-8


def trim(c, rel_tol: float = 1e-14) -> np.ndarray:
    """Drop leading coefficients that are negligible relative to the largest one."""
    c = np.asarray(c, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    n = len(c)
    while n > 1 and abs(c[n - 1]) <= rel_tol * scale:
        n -= 1
    return c[:n]


def companion_matrix(c) -> np.ndarray:
    """Frobenius companion matrix of the polynomial ``c`` (leading coefficient nonzero)."""
    c = np.asarray(c, dtype=float)
    n = len(c) - 1
    if n < 1:
        raise ValueError("companion matrix needs degree >= 1")
    C = np.zeros((n, n))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C


def companion_roots(c) -> np.ndarray:
    """All complex roots as eigenvalues of the companion matrix."""
    c = trim(c)
    if len(c) < 2:
        return np.zeros(0, dtype=complex)
    return np.linalg.eigvals(companion_matrix(c))


def polish(c, x: float, steps: int = 3) -> float:
    """A few Newton steps on a real root; keeps the input if a step makes things worse."""
    dc = P.polyder(c)
    fx = abs(P.polyval(x, c))
    for _ in range(steps):
        d = P.polyval(x, dc)
        if d == 0.0:
            break
        x_new = x - P.polyval(x, c) / d
        f_new = abs(P.polyval(x_new, c))
        if not np.isfinite(x_new) or f_new > fx:
            break
        x, fx = x_new, f_new
    return float(x)


def real_roots(c, tol: float = REAL_TOL) -> np.ndarray:
    """Real roots: eigenvalues with ``|imag| < tol (1 + |real|)``, Newton-polished, sorted."""
    c = trim(c)
    z = companion_roots(c)
    keep = np.abs(z.imag) < tol * (1.0 + np.abs(z.real))
    roots = [polish(c, r) for r in z.real[keep]]
    return np.sort(np.asarray(roots, dtype=float))


def from_roots(roots, leading: float = 1.0) -> np.ndarray:
    return leading * P.polyfromroots(roots)


def interpolate_on_circle(fn, degree: int, radius: float = 1.0) -> np.ndarray:
    """Coefficients of a polynomial of known maximum degree from samples on a circle.

    ``fn`` is evaluated (vectorized, complex input) at ``degree + 1`` or more
    equally spaced points of radius ``radius``; an inverse DFT returns the
    coefficients.  This is well conditioned for any degree.
    """
    n = 1
    while n <= degree:
        n *= 2
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = fn(z)
    coeffs = np.fft.fft(vals, axis=0) / n
    scale = radius ** -np.arange(n)
    coeffs = coeffs * scale.reshape((-1,) + (1,) * (coeffs.ndim - 1))
    return coeffs[: degree + 1].real
