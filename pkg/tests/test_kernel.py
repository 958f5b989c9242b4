import numpy as np
import pytest
from scipy.integrate import quad

from blobflow.grid import Density, make_grid
from blobflow.kernel import (
    BoundaryCondition,
    ConvolutionMode,
    cell_integral,
    convolve,
    kernel_matrix,
    noflux_row_sums,
    velocity_field,
)

NOFLUX = BoundaryCondition.NOFLUX
PERIODIC = BoundaryCondition.PERIODIC


def quad_cell_integral(i, j, grid, eps):
    """Independent quadrature oracle for the kernel cell integral."""
    xi = grid.centers[i]
    lo, hi = grid.interfaces[j], grid.interfaces[j + 1]
    val, err = quad(
        lambda y: np.exp(-abs(xi - y) / eps) / (2.0 * eps),
        lo,
        hi,
        points=[xi] if lo <= xi <= hi else None,
        epsabs=1e-14,
        epsrel=1e-13,
    )
    assert err < 1e-12
    return val


def test_diagonal_integral_value():
    # dx = 0.1, eps = 0.05 -> 1 - e^{-1}
    g = make_grid(0.0, 0.8, 8)
    got = cell_integral(3, 3, g, 0.05)
    assert got == pytest.approx(1.0 - np.exp(-1.0), abs=1e-15)
    assert got == pytest.approx(quad_cell_integral(3, 3, g, 0.05), abs=1e-12)


def test_offdiagonal_against_quadrature(rng):
    g = make_grid(-1.0, 1.0, 16)
    for eps in (0.02, 0.13, 1.7):
        for _ in range(10):
            i, j = rng.integers(0, 16, size=2)
            got = cell_integral(int(i), int(j), g, eps)
            assert got == pytest.approx(quad_cell_integral(int(i), int(j), g, eps), abs=1e-12)
            assert 0.0 < got < 1.0


def test_diagonal_shrinks_with_dx():
    eps = 0.05
    vals = []
    for n in (8, 16, 32, 64):
        g = make_grid(0.0, 1.0, n)
        vals.append(cell_integral(n // 2, n // 2, g, eps))
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0 - np.exp(-(1.0 / 64) / (2 * eps)), rel=1e-13)


def test_far_cell_negligible():
    # distance / eps = 30
    g = make_grid(0.0, 4.0, 40)  # dx = 0.1
    eps = 0.1
    assert cell_integral(0, 30, g, eps) < 1e-12


def test_symmetry_of_cell_integrals():
    g = make_grid(-2.0, 3.0, 24)
    for eps in (0.05, 0.9):
        mat = kernel_matrix(g, eps, NOFLUX)
        np.testing.assert_allclose(mat, mat.T, rtol=1e-13, atol=1e-300)
        assert cell_integral(3, 17, g, eps) == pytest.approx(cell_integral(17, 3, g, eps), rel=1e-13)


def test_noflux_row_sums_closed_form():
    g = make_grid(-3.0, 3.0, 128)
    for eps in (0.01, 0.3, 5.0):
        rows = kernel_matrix(g, eps, NOFLUX).sum(axis=1)
        np.testing.assert_allclose(rows, noflux_row_sums(g, eps), atol=1e-13)
        assert np.all(rows <= 1.0 + 1e-13)


def test_periodic_row_sums_are_unit():
    g = make_grid(-3.0, 3.0, 128)
    for eps in (0.01, 0.3, 5.0):
        rows = kernel_matrix(g, eps, PERIODIC).sum(axis=1)
        np.testing.assert_allclose(rows, 1.0, atol=1e-12)


def test_dense_fast_agree(rng):
    for n in (8, 64, 257, 1024):
        g = make_grid(-1.0, 1.0, n)
        u = rng.random(n)
        rho = Density(g, u)
        for ratio in (0.1, 1.0, 31.0, 100.0):
            eps = ratio * g.dx
            for bc in (NOFLUX, PERIODIC):
                dense = convolve(rho, eps, bc, ConvolutionMode.DENSE)
                fast = convolve(rho, eps, bc, ConvolutionMode.FAST)
                rel = np.max(np.abs(dense - fast)) / np.max(np.abs(dense))
                assert rel <= 1e-12, (n, ratio, bc)


def test_convolve_constant_periodic_is_identity():
    g = make_grid(-3.0, 3.0, 64)
    rho = Density(g, np.full(64, 2.5))
    for eps in (0.05, 1.0):
        np.testing.assert_allclose(convolve(rho, eps, PERIODIC), 2.5, rtol=1e-14)


def test_convolve_single_cell_is_matrix_column():
    g = make_grid(0.0, 1.0, 32)
    u = np.zeros(32)
    u[11] = 3.0
    got = convolve(Density(g, u), 0.07, NOFLUX, ConvolutionMode.FAST)
    col = kernel_matrix(g, 0.07, NOFLUX)[:, 11] * 3.0
    np.testing.assert_allclose(got, col, rtol=1e-12, atol=1e-300)


def test_convolve_tends_to_identity_as_eps_shrinks(rng):
    g = make_grid(-1.0, 1.0, 64)
    rho = Density(g, rng.random(64))
    gaps = []
    for ratio in (2.0, 0.5, 0.1, 0.02):
        c = convolve(rho, ratio * g.dx, NOFLUX)
        gaps.append(np.max(np.abs(c - rho.values)))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-9


def test_dense_matrix_size_guard():
    g = make_grid(0.0, 1.0, 8192)
    with pytest.raises(ValueError):
        kernel_matrix(g, 0.1, NOFLUX)


def test_eps_validation():
    g = make_grid(0.0, 1.0, 8)
    rho = Density(g, np.ones(8))
    for bad in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(ValueError):
            convolve(rho, bad, NOFLUX)


def test_velocity_symmetric_density_zero_at_center():
    g = make_grid(-4.0, 4.0, 64)
    u = np.exp(-g.centers**2)
    v = velocity_field(Density(g, u), 0.3, NOFLUX)
    assert abs(v[32]) < 1e-12


def test_velocity_constant_periodic_zero():
    g = make_grid(-1.0, 1.0, 16)
    v = velocity_field(Density(g, np.full(16, 1.3)), 0.2, PERIODIC)
    assert np.all(v == 0.0)


def test_velocity_two_cell_local():
    g = make_grid(0.0, 1.0, 2)
    a, b = 0.2, 0.9
    v = velocity_field(Density(g, np.array([a, b])), None, NOFLUX)
    assert v[1] == pytest.approx((b - a) / g.dx, rel=1e-15)
    assert v[0] == 0.0 and v[2] == 0.0
