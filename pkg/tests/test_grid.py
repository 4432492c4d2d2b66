import numpy as np
import pytest
from scipy.special import erf
from scipy import integrate

from shrinkerlab import GridError, build_grid, inner_product, radial_profile
from shrinkerlab.fields import (
    Field,
    constant_scalar,
    radial_bump,
    scalar_field,
    translation,
    zero_field,
)


def test_mass_gaussian_1d_close_to_full_line(gaussian1):
    _, measure = build_grid(gaussian1, 256, 8.0)
    # int exp(-x^2/4) over |x|<8 = 2 sqrt(pi) erf(4)
    oracle = 2.0 * np.sqrt(np.pi) * erf(4.0)
    assert measure.total_mass == pytest.approx(oracle, abs=1e-6)
    assert abs(measure.total_mass - 2.0 * np.sqrt(np.pi)) < 1e-6


def test_mass_gaussian_2d_ball(gaussian2):
    _, measure = build_grid(gaussian2, 64, 6.0)
    oracle = 4.0 * np.pi * (1.0 - np.exp(-9.0))
    assert measure.total_mass == pytest.approx(oracle, abs=1e-3)
    assert measure.tail_fraction == pytest.approx(np.exp(-9.0), rel=1e-10)


def test_mass_cylinder_with_cap_report(cylinder32):
    grid, measure = build_grid(cylinder32, 48, 8.0)
    T = np.sqrt(8.0**2 - 4.0)
    full = 8.0 * np.pi * np.exp(-1.0) * 2.0 * np.sqrt(np.pi) * erf(T / 2.0)
    capped = full * (1.0 - measure.cap_fraction)
    assert measure.total_mass == pytest.approx(capped, rel=5e-3)
    assert 0 < measure.cap_fraction < 0.1


def test_resolution_minimum_rejected(gaussian2):
    with pytest.raises(GridError, match="resolution below minimum"):
        build_grid(gaussian2, 8, 8.0)


def test_stencil_order_validated(gaussian2):
    with pytest.raises(GridError, match="stencil_order"):
        build_grid(gaussian2, 32, 8.0, stencil_order=3)


def test_truncation_radius_minimum(gaussian2):
    with pytest.raises(GridError):
        build_grid(gaussian2, 32, 2.0)


def test_node_cap_guard(gaussian2):
    with pytest.raises(GridError, match="cap"):
        build_grid(gaussian2, 64, 8.0, node_cap=100)


def test_all_nodes_inside_truncation(grid2_64):
    grid, measure = grid2_64
    assert np.all(grid.b < grid.truncation_radius)
    assert np.all(measure.node_weights > 0)


def test_quadrature_refinement_order(gaussian2):
    # C^2 bump integrand supported inside the ball: the midpoint error has a
    # genuine algebraic order >= 2 and a closed 1-d radial oracle
    from shrinkerlab.fields import smoothstep

    def bump_sq(r):
        return smoothstep((4.0 - r) / 2.0) ** 2

    oracle, err = integrate.quad(
        lambda r: 2.0 * np.pi * r * bump_sq(r) * np.exp(-(r**2) / 4.0),
        0.0,
        4.0,
        epsabs=1e-13,
        limit=200,
    )
    errs = []
    for res in (24, 48):
        grid, measure = build_grid(gaussian2, res, 6.0)
        val = float(np.sum(measure.node_weights * bump_sq(grid.b)))
        errs.append(abs(val - oracle))
    assert errs[1] < errs[0] / 3.0


def test_inner_product_constant_mass(grid1_256):
    grid, measure = grid1_256
    one = constant_scalar(grid)
    assert inner_product(one, one, measure) == pytest.approx(2.0 * np.sqrt(np.pi), abs=1e-6)


def test_inner_product_vector_norm(grid2_64):
    grid, measure = grid2_64
    d1 = translation(grid, 0)
    assert inner_product(d1, d1, measure) == pytest.approx(4.0 * np.pi, rel=1e-4)


def test_inner_product_gram_schmidt_exact(grid2_64, rng):
    grid, measure = grid2_64
    a = scalar_field(grid, lambda c: np.sin(c[:, 0]))
    b = scalar_field(grid, lambda c: np.cos(c[:, 1]) + 0.3 * np.sin(c[:, 0]))
    proj = inner_product(a, b, measure) / inner_product(a, a, measure)
    b_orth = b - a * proj
    val = inner_product(a, b_orth, measure)
    assert abs(val) <= 1e-12 * a.norm(measure) * b_orth.norm(measure)


def test_inner_product_rank_mismatch(grid2_64):
    grid, measure = grid2_64
    with pytest.raises(GridError, match="rank"):
        inner_product(constant_scalar(grid), translation(grid, 0), measure)


def test_inner_product_positive_definite(grid2_small, rng):
    grid, measure = grid2_small
    for _ in range(5):
        f = Field(grid, "vector", rng.standard_normal((grid.n_nodes, 2)))
        assert inner_product(f, f, measure) > 0
    z = zero_field(grid, "vector")
    assert inner_product(z, z, measure) == 0.0


def test_radial_profile_constant_scalar(grid2_64):
    grid, _ = grid2_64
    prof = radial_profile(constant_scalar(grid), np.linspace(2.0, 6.0, 7))
    np.testing.assert_allclose(prof.values, 2.0 * np.pi, rtol=0.08)


def test_radial_profile_coordinate_squared(grid2_64):
    grid, _ = grid2_64
    w = scalar_field(grid, lambda c: c[:, 0])
    radii = np.linspace(2.0, 6.0, 5)
    prof = radial_profile(w, radii)
    np.testing.assert_allclose(prof.values, np.pi * radii**2, rtol=0.08)


def test_radial_profile_zero_field(grid2_64):
    grid, _ = grid2_64
    prof = radial_profile(zero_field(grid, "scalar"), [2.0, 3.0, 4.0])
    np.testing.assert_allclose(prof.values, 0.0)


def test_radial_profile_empty_shell_names_radius(grid2_64):
    grid, _ = grid2_64
    with pytest.raises(GridError, match="radius ladder|truncation"):
        radial_profile(constant_scalar(grid), [0.05, 3.0])


def test_radial_profile_shell_thickness_floor(grid2_64):
    grid, _ = grid2_64
    with pytest.raises(GridError, match="shell thickness"):
        radial_profile(constant_scalar(grid), [2.0, 3.0], shell_thickness=0.5 * grid.max_spacing)


def test_radial_profile_localized_support_vanishes_outside(grid2_64):
    grid, _ = grid2_64
    w = Field(grid, "scalar", radial_bump(grid, 1.0, 2.0))
    prof = radial_profile(w, np.linspace(3.0, 6.0, 4))
    np.testing.assert_allclose(prof.values, 0.0, atol=1e-14)


def test_profile_requires_ascending_radii(grid2_64):
    grid, _ = grid2_64
    with pytest.raises(GridError):
        radial_profile(constant_scalar(grid), [3.0, 2.0])
