import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from consboltz.scenarios import maxwellian
from consboltz.velocity_grid import build_grid, forward_transform, inverse_transform

SQRT_2PI = np.sqrt(2 * np.pi)


def direct_forward(grid, f):
    # separable O(N^4) evaluation of the defining sum, no FFT involved
    c = grid.quad_coeffs
    E = c[None, :] * np.exp(-1j * np.outer(grid.zeta_nodes, grid.v_nodes))
    out = np.einsum("am,bn,cp,mnp->abc", E, E, E, f.astype(complex))
    return (grid.dv / SQRT_2PI) ** 3 * out


def test_n16_spacings():
    g = build_grid(16, 5.0)
    assert g.dv == 0.625
    assert g.v_nodes[8] == 0.0
    assert g.dzeta == pytest.approx(np.pi / 5, rel=1e-15)


def test_n4_nodes():
    g = build_grid(4, 1.0)
    np.testing.assert_array_equal(g.v_nodes, [-1.0, -0.5, 0.0, 0.5])


def test_lattices_are_fft_compatible():
    g = build_grid(24, 5.0)
    assert g.dv * g.dzeta == pytest.approx(2 * np.pi / 24, rel=1e-15)
    assert g.v_nodes[0] == -5.0 and g.v_nodes[-1] == pytest.approx(5.0 - g.dv)


@pytest.mark.parametrize("N, L", [(7, 1.0), (2, 1.0), (0, 1.0), (8, 0.0), (8, -1.0)])
def test_invalid_grids_rejected(N, L):
    with pytest.raises(ValueError):
        build_grid(N, L)


def test_weights_are_product_of_axis_coefficients():
    g = build_grid(8, 3.0, endpoint="trapezoid")
    c = g.quad_coeffs
    assert c[0] == 0.5 and c[-1] == 0.5 and np.all(c[1:-1] == 1.0)
    w = g.weights
    assert w[0, 3, 3] == pytest.approx(0.5 * g.dv**3)
    assert w[0, 0, 7] == pytest.approx(0.125 * g.dv**3)


def test_zero_transforms_to_zero(grid8):
    np.testing.assert_array_equal(forward_transform(grid8, np.zeros(grid8.shape)), 0)
    np.testing.assert_array_equal(inverse_transform(grid8, np.zeros(grid8.shape, complex)), 0)


def test_forward_matches_direct_sum_for_maxwellian():
    g = build_grid(16, 5.0)
    f = maxwellian(g, 1.0, (0, 0, 0), 1.0)
    fhat = forward_transform(g, f)
    ref = direct_forward(g, f)
    assert np.abs(fhat - ref).max() / np.abs(ref).max() < 1e-12
    # zero mode is the discrete mass over (2 pi)^{3/2}
    mass = (f * g.weights).sum()
    assert fhat[8, 8, 8].real == pytest.approx(mass * (2 * np.pi) ** -1.5, rel=1e-13)
    assert mass == pytest.approx(1.0, rel=1e-5)


@pytest.mark.parametrize("endpoint", ["periodic", "trapezoid"])
def test_forward_matches_direct_sum_random(rng, endpoint):
    g = build_grid(8, 4.0, endpoint)
    f = rng.random(g.shape)
    ref = direct_forward(g, f)
    assert np.abs(forward_transform(g, f) - ref).max() / np.abs(ref).max() < 1e-12


def test_round_trip_n8(grid8, rng):
    f = rng.random(grid8.shape)
    back = inverse_transform(grid8, forward_transform(grid8, f))
    assert np.abs(back - f).max() / np.abs(f).max() < 1e-10


def test_inverse_of_origin_delta_is_constant(grid8):
    g = np.zeros(grid8.shape, complex)
    g[4, 4, 4] = 1.0
    out = inverse_transform(grid8, g)
    np.testing.assert_allclose(out, (grid8.dzeta / SQRT_2PI) ** 3, rtol=1e-14)


def test_symmetric_input_has_negligible_imaginary_residue(grid16):
    f = maxwellian(grid16, 1.0, (0, 0, 0), 1.0)
    fhat = forward_transform(grid16, f)
    assert np.abs(fhat.imag).max() < 1e-10 * np.abs(fhat).max()
    back, residue = inverse_transform(grid16, fhat, return_residual=True)
    assert residue < 1e-12 * f.max()


def test_shape_mismatch_rejected(grid8):
    with pytest.raises(ValueError):
        forward_transform(grid8, np.zeros((4, 4, 4)))


field8 = arrays(np.float64, (8, 8, 8), elements=st.floats(-1, 1, allow_nan=False))


@settings(max_examples=25, deadline=None)
@given(field8, field8, st.floats(-3, 3), st.floats(-3, 3))
def test_forward_is_linear(f, h, a, b):
    grid = build_grid(8, 5.0)
    lhs = forward_transform(grid, a * f + b * h)
    rhs = a * forward_transform(grid, f) + b * forward_transform(grid, h)
    scale = max(1.0, np.abs(rhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-13 * scale


@settings(max_examples=25, deadline=None)
@given(field8)
def test_round_trip_property(f):
    grid = build_grid(8, 5.0)
    back = inverse_transform(grid, forward_transform(grid, f))
    assert np.abs(back - f).max() <= 1e-10 * max(1e-300, np.abs(f).max()) + 1e-300
