import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from triview_pose.polynomial import (
    companion_matrix, companion_roots, from_roots, interpolate_on_circle, real_roots, trim,
)


def test_two_roots():
    assert np.allclose(real_roots(from_roots([1.0, 2.0])), [1.0, 2.0], atol=1e-12)


def test_degree_eleven_integer_roots():
    roots = np.arange(-5.0, 6.0)
    assert np.max(np.abs(real_roots(from_roots(roots)) - roots)) < 1e-8


def test_complex_roots_are_dropped():
    c = P.polymul(from_roots([0.5]), [1.0, 0.0, 1.0])      # (x - 0.5)(x^2 + 1)
    assert np.allclose(real_roots(c), [0.5])
    assert len(companion_roots(c)) == 3


def test_companion_eigenvalues():
    c = from_roots([1.0, -2.0, 3.0], leading=4.0)
    assert np.allclose(np.sort(np.linalg.eigvals(companion_matrix(c)).real), [-2, 1, 3])


def test_trim_drops_negligible_leading():
    assert len(trim([1.0, 2.0, 1e-20])) == 2
    assert len(companion_roots([5.0])) == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=11, max_size=11),
       st.floats(0.5, 10) | st.floats(-10, -0.5))
def test_factored_degree_eleven(roots, lead):
    roots = np.sort(np.asarray(roots))
    if np.min(np.diff(roots)) < 0.05:
        return
    got = real_roots(from_roots(roots, lead))
    assert len(got) == 11
    assert np.max(np.abs(got - roots)) < 1e-8 * (1 + np.abs(roots).max())


def test_interpolation_recovers_coefficients(rng):
    c = rng.normal(size=7)
    got = interpolate_on_circle(lambda z: P.polyval(z, c), 6)
    assert np.allclose(got[:7].real if np.iscomplexobj(got) else got[:7], c, atol=1e-12)
