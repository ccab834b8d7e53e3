import numpy as np
import pytest

from cscdyn import (
    DomainSpec,
    build_grid,
    integrate_field,
    laplacian_matrix,
    neumann_eigenvalues,
    neumann_laplacian_apply,
)


def weighted_laplacian_spectrum(grid):
    """Dense spectrum of the discrete operator, via the symmetrized form."""
    lap = laplacian_matrix(grid)
    sqrt_w = np.sqrt(grid.weights)
    sym = sqrt_w[:, None] * lap / sqrt_w[None, :]
    sym = 0.5 * (sym + sym.T)
    return np.linalg.eigvalsh(sym)


def test_build_grid_1d():
    grid = build_grid(DomainSpec((1.0,), (11,)))
    assert grid.spacing[0] == pytest.approx(0.1)
    assert grid.weights.sum() == pytest.approx(1.0, rel=1e-14)
    assert np.all(grid.weights > 0)


def test_build_grid_2d_weight_sum():
    grid = build_grid(DomainSpec((np.pi, np.pi), (33, 33)))
    assert grid.weights.sum() == pytest.approx(np.pi**2, rel=1e-12)


def test_domain_validation():
    with pytest.raises(ValueError):
        DomainSpec((1.0,), (2,))
    with pytest.raises(ValueError):
        DomainSpec((0.0,), (11,))
    with pytest.raises(ValueError):
        DomainSpec((1.0, 1.0, 1.0), (5, 5, 5))
    with pytest.raises(ValueError):
        DomainSpec((1.0, 1.0), (5,))


def test_integrate_constant_and_linear():
    grid = build_grid(DomainSpec((1.0,), (101,)))
    assert integrate_field(grid, np.ones(101)) == pytest.approx(1.0, abs=1e-12)
    x = grid.axes[0]
    assert integrate_field(grid, x) == pytest.approx(0.5, abs=1e-12)


def test_integrate_quadratic_second_order():
    errors = []
    for n in (51, 101, 201):
        grid = build_grid(DomainSpec((1.0,), (n,)))
        x = grid.axes[0]
        errors.append(abs(integrate_field(grid, x**2) - 1.0 / 3.0))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)
    assert errors[1] / errors[2] == pytest.approx(4.0, rel=0.05)


def test_integrate_size_mismatch():
    grid = build_grid(DomainSpec((1.0,), (11,)))
    with pytest.raises(ValueError):
        integrate_field(grid, np.ones(10))
    with pytest.raises(ValueError):
        neumann_laplacian_apply(grid, np.ones(12))


def test_laplacian_annihilates_constants(unit_grid_33):
    out = neumann_laplacian_apply(unit_grid_33, np.full(33, 3.7))
    assert np.abs(out).max() == 0.0


def test_laplacian_cosine_eigenvectors(unit_grid_33):
    grid = unit_grid_33
    h = grid.spacing[0]
    x = grid.axes[0]
    for j in (1, 2, 5):
        phi = np.cos(j * np.pi * x)
        mu_h = (2.0 / h**2) * (1.0 - np.cos(j * np.pi * h))
        resid = neumann_laplacian_apply(grid, phi) + mu_h * phi
        assert np.abs(resid).max() < 1e-10
        # oracle: the dense spectrum contains this eigenvalue
        spectrum = weighted_laplacian_spectrum(grid)
        assert np.min(np.abs(spectrum + mu_h)) < 1e-10


@pytest.mark.parametrize("domain", [DomainSpec((1.0,), (33,)),
                                    DomainSpec((1.5, 0.8), (17, 13))])
def test_laplacian_symmetry_and_conservation(domain, rng):
    grid = build_grid(domain)
    n = grid.n_nodes
    for _ in range(5):
        f = rng.standard_normal(n)
        g = rng.standard_normal(n)
        lf = neumann_laplacian_apply(grid, f)
        lg = neumann_laplacian_apply(grid, g)
        a = float(grid.weights @ (lf * g))
        b = float(grid.weights @ (f * lg))
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
        # negative semidefinite, zero only on constants
        assert grid.weights @ (lf * f) <= 1e-12
        # exact discrete zero-flux conservation
        assert abs(integrate_field(grid, lf)) <= 1e-11


def test_spectral_convergence_order_two():
    errors = {}
    for n in (33, 65):
        grid = build_grid(DomainSpec((1.0,), (n,)))
        spectrum = np.sort(-weighted_laplacian_spectrum(grid))
        errors[n] = [abs(spectrum[j] - (j * np.pi) ** 2) for j in (1, 2, 3)]
    for j in range(3):
        ratio = errors[33][j] / errors[65][j]
        assert 3.6 <= ratio <= 4.4


def test_neumann_eigenvalues_analytic():
    assert neumann_eigenvalues(DomainSpec((np.pi,), (9,)), 2)[1] == pytest.approx(1.0, abs=1e-14)
    assert neumann_eigenvalues(DomainSpec((1.0,), (9,)), 2)[1] == pytest.approx(np.pi**2, rel=1e-14)
    first_four = neumann_eigenvalues(DomainSpec((np.pi, np.pi), (9, 9)), 4)
    assert first_four == pytest.approx([0.0, 1.0, 1.0, 2.0], abs=1e-12)
    with pytest.raises(ValueError):
        neumann_eigenvalues(DomainSpec((1.0,), (9,)), 0)


def test_laplacian_matrix_matches_apply(rng):
    for domain in (DomainSpec((2.0,), (21,)), DomainSpec((1.0, 2.0), (9, 11))):
        grid = build_grid(domain)
        lap = laplacian_matrix(grid)
        f = rng.standard_normal(grid.n_nodes)
        assert np.abs(lap @ f - neumann_laplacian_apply(grid, f)).max() < 1e-10
