import numpy as np
import pytest
from hypothesis import given, strategies as st

from poleshift.contour import (
    PoleContour,
    SpectralBounds,
    build_contour,
    eval_scalar_expansion,
    required_poles,
    scalar_error_sup,
    scalar_error_sup_many,
)


def test_example_contour_shape():
    c = build_contour(SpectralBounds(1, 100), 30)
    assert c.nodes.shape == (30,) and c.weights.shape == (30,)
    assert np.all(np.abs(c.nodes.imag) > 1e-8)  # nothing on the interval
    np.testing.assert_allclose(np.sort_complex(c.nodes), np.sort_complex(c.nodes.conj()))
    np.testing.assert_array_equal(c.nodes[15:], c.nodes[:15].conj())
    assert c.distance_to_interval() > 0
    # encircles [1, 100]
    assert c.nodes.real.min() < 1 and c.nodes.real.max() > 100


@pytest.mark.parametrize("P", [0, 1, 7, -2, 2.5])
def test_bad_pole_counts(P):
    with pytest.raises(ValueError):
        build_contour(SpectralBounds(1, 10), P)


@pytest.mark.parametrize("m,M", [(0, 1), (-1, 1), (2, 2), (3, 1)])
def test_bad_bounds(m, M):
    with pytest.raises(ValueError):
        SpectralBounds(m, M)


def test_arrays_are_read_only():
    c = build_contour(SpectralBounds(1, 10), 10)
    with pytest.raises(ValueError):
        c.nodes[0] = 0


def test_json_roundtrip(tmp_path):
    c = build_contour(SpectralBounds(0.5, 300), 24)
    c.save(tmp_path / "c.json")
    d = PoleContour.load(tmp_path / "c.json")
    assert d.P == 24 and d.bounds == c.bounds
    np.testing.assert_array_equal(d.nodes, c.nodes)
    np.testing.assert_array_equal(d.weights, c.weights)


def test_reproduces_inverse_at_zero_shift():
    c = build_contour(SpectralBounds(1, 1000), 60)
    x = np.linspace(1, 1000, 2000)
    np.testing.assert_allclose(eval_scalar_expansion(c, x, 0.0), 1 / x, rtol=1e-7)


@given(st.floats(min_value=-200, max_value=0), st.floats(min_value=-200, max_value=200))
def test_uniform_accuracy_in_left_half_plane(re, im):
    c = build_contour(SpectralBounds(1, 1000), 60)
    err = scalar_error_sup(c, (1, 1000), complex(re, im), 2000)
    assert err <= 1e-6


@given(st.floats(min_value=-20, max_value=0), st.floats(min_value=-20, max_value=20))
def test_conjugate_symmetry(re, im):
    c = build_contour(SpectralBounds(2, 50), 20)
    x = np.linspace(2, 50, 50)
    z = complex(re, im)
    np.testing.assert_allclose(eval_scalar_expansion(c, x, z.conjugate()),
                               np.conj(eval_scalar_expansion(c, x, z)), rtol=1e-12, atol=1e-15)


def test_error_many_matches_single():
    c = build_contour(SpectralBounds(1, 100), 20)
    zs = np.array([0, 1j, -3 + 2j, -10 - 5j])
    many = scalar_error_sup_many(c, (1, 100), zs, 500, chunk=3)
    single = [scalar_error_sup(c, (1, 100), z, 500) for z in zs]
    np.testing.assert_allclose(many, single, rtol=1e-12)


def test_required_poles_is_minimal():
    b = SpectralBounds(0.01, 10)
    P = required_poles(b, 1j, 1e-8, 2000)
    assert P % 2 == 0
    assert scalar_error_sup(build_contour(b, P), (0.01, 10), 1j, 2000) <= 1e-8
    assert scalar_error_sup(build_contour(b, P - 2), (0.01, 10), 1j, 2000) > 1e-8


def test_required_poles_monotone_in_condition():
    Ps = [required_poles(SpectralBounds(s, 10), 1j, 1e-8, 2000) for s in (1e-3, 1e-2, 1e-1)]
    assert Ps[0] >= Ps[1] >= Ps[2]


def test_wide_interval_remains_finite():
    c = build_contour(SpectralBounds(1e-5, 1e5), 80)
    assert np.all(np.isfinite(c.nodes)) and np.all(np.isfinite(c.weights))


def test_two_pole_contour():
    c = build_contour(SpectralBounds(1, 4), 2)
    assert c.nodes[1] == np.conj(c.nodes[0]) and c.weights[1] == np.conj(c.weights[0])


def test_simple_value():
    c = build_contour(SpectralBounds(1, 10), 40)
    assert abs(eval_scalar_expansion(c, 1.0, -1.0) - 0.5) <= scalar_error_sup(c, (1, 10), -1.0)


def test_loose_tolerance_needs_two_poles():
    assert required_poles(SpectralBounds(1, 10), 1j, 10.0) == 2


@pytest.mark.parametrize("m,M", [(1, 10), (0.5, 800), (3, 30)])
def test_doubling_reduces_error(m, M):
    z = 0.5j * (m + M)
    errs = [scalar_error_sup(build_contour(SpectralBounds(m, M), P), (m, M), z, 1000)
            for P in (4, 8, 16, 32)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_edge_point_off_axis_shift():
    c = build_contour(SpectralBounds(3, 30), 50)
    z = -2 + 5j
    err = abs(eval_scalar_expansion(c, 3.0, z) - 1 / (3 - z))
    assert err <= max(scalar_error_sup(c, (3, 30), z), 1e-14)  # both sit at the roundoff floor
