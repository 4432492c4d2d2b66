import numpy as np
import pytest

from shrinkerlab import build_grid
from shrinkerlab.fields import (
    Field,
    bump_vector,
    constant_scalar,
    dilation,
    euclidean_rotation,
    radial_bump,
    scalar_field,
    translation,
    zero_field,
)
from shrinkerlab.models import sym_pairs
from shrinkerlab.operators import OperatorKind, identity_residuals


def stencil_tol(grid, factor=10.0):
    return factor * grid.max_spacing**grid.stencil_order


# ---- adjointness and operator structure -----------------------------------


def test_divfstar_divftensor_adjoint_to_machine_precision(grid2_small, rng):
    grid, _ = grid2_small
    ops = grid.ops()
    D, Dt = ops.div_f_star, ops.div_f_tensor
    gs, gv = ops.gram_sym2, ops.gram_vector
    for _ in range(20):
        v = rng.standard_normal(D.shape[1])
        h = rng.standard_normal(D.shape[0])
        left = float(np.sum(gs * (D @ v) * h))
        right = float(np.sum(gv * v * (Dt @ h)))
        assert abs(left - right) <= 1e-12 * max(abs(left), abs(right), 1e-30)


def test_gradient_divergence_adjoint(grid2_small, rng):
    grid, _ = grid2_small
    ops = grid.ops()
    G = ops.gradient
    for _ in range(10):
        u = rng.standard_normal(grid.n_nodes)
        y = rng.standard_normal(G.shape[0])
        left = float(np.sum(ops.gram_vector * (G @ u) * y))
        right = float(np.sum(ops.gram_scalar * u * (-(ops.div_f_vec @ y))))
        assert abs(left - right) <= 1e-12 * max(abs(left), abs(right), 1e-30)


def test_p_positive_semidefinite(grid2_small, rng):
    grid, _ = grid2_small
    ops = grid.ops()
    for _ in range(20):
        Y = Field(grid, "vector", rng.standard_normal((grid.n_nodes, 2)))
        assert ops.rayleigh_p(Y) >= -1e-8


def test_drift_laplacian_weighted_symmetry_all_ranks(grid2_small, rng):
    grid, _ = grid2_small
    ops = grid.ops()
    for rank, mat, gram in (
        ("scalar", ops.lap_scalar, ops.gram_scalar),
        ("vector", ops.lap_vector, ops.gram_vector),
        ("sym2tensor", ops.lap_sym2, ops.gram_sym2),
    ):
        for _ in range(5):
            u = rng.standard_normal(mat.shape[1])
            v = rng.standard_normal(mat.shape[1])
            left = float(np.sum(gram * (mat @ u) * v))
            right = float(np.sum(gram * u * (mat @ v)))
            assert abs(left - right) <= 1e-12 * max(abs(left), abs(right), 1e-30)


def test_drift_laplacian_negative_semidefinite(grid2_small, rng):
    grid, _ = grid2_small
    ops = grid.ops()
    for _ in range(10):
        u = Field(grid, "scalar", rng.standard_normal(grid.n_nodes))
        lu = ops.lap(u)
        assert u.inner(lu) <= 1e-10


# ---- closed-form checks -----------------------------------------------------


def test_div_f_star_annihilates_killing_fields_to_stencil_order(grid2_64):
    grid, _ = grid2_64
    ops = grid.ops()
    for Y in (translation(grid, 0), translation(grid, 1), euclidean_rotation(grid)):
        assert ops.div_star(Y).norm() / Y.norm() <= stencil_tol(grid)


def test_div_f_star_dilation_is_minus_metric(grid1_256):
    grid, _ = grid1_256
    ops = grid.ops()
    ds = ops.div_star(dilation(grid))
    core = grid.b <= 4.0
    np.testing.assert_allclose(ds.values[core, 0], -1.0, atol=5e-3)


def test_div_f_tensor_on_minus_metric(grid1_256):
    # h = -g maps to the gradient of the potential, x/2
    grid, _ = grid1_256
    ops = grid.ops()
    h = Field(grid, "sym2tensor", -np.ones((grid.n_nodes, 1)))
    out = ops.div(h)
    core = grid.b <= 4.0
    x = grid.coords[core, 0]
    np.testing.assert_allclose(out.values[core, 0], x / 2.0, atol=5e-3)


def test_div_f_tensor_matches_reference_formula(gaussian2):
    # dual route: adjoint-defined divergence vs direct discretization
    errs = []
    for res in (32, 64):
        grid, _ = build_grid(gaussian2, res, 6.0)
        ops = grid.ops()
        bump = radial_bump(grid, 2.0, 4.0)
        vals = np.stack([bump * np.sin(grid.coords[:, 1]), bump * grid.coords[:, 0]], axis=1)
        h = ops.div_star(Field(grid, "vector", vals))
        adjoint_route = ops.div(h)
        direct = Field.from_flat(grid, "vector", ops.div_f_tensor_reference @ h.flat())
        errs.append((adjoint_route - direct).norm() / max(direct.norm(), 1e-30))
    assert errs[1] <= errs[0] / 2.5
    assert errs[1] <= 0.02


def test_div_f_vec_translation(grid2_64):
    grid, _ = grid2_64
    ops = grid.ops()
    v = ops.div(translation(grid, 0))
    target = Field(grid, "scalar", -grid.coords[:, 0] / 2.0)
    rel = (v - target).norm_where(grid.interior_mask()) / target.norm()
    assert rel <= 1e-2


def test_drift_laplacian_sign_convention(grid1_256):
    # L x = -x/2 pins the drift sign; (L + 1/2) x = 0
    grid, _ = grid1_256
    ops = grid.ops()
    u = scalar_field(grid, lambda c: c[:, 0])
    lu = ops.lap(u)
    core = grid.b <= 4.0
    err = lu.values[core] + 0.5 * u.values[core]
    assert np.max(np.abs(err)) <= 2.0 * grid.max_spacing**2


def test_drift_laplacian_constant(grid2_64):
    grid, _ = grid2_64
    ops = grid.ops()
    lu = ops.lap(constant_scalar(grid))
    assert lu.norm_where(grid.interior_mask()) <= stencil_tol(grid)


def test_op_p_dilation_eigenfield(grid1_256):
    grid, _ = grid1_256
    ops = grid.ops()
    Y = dilation(grid)
    assert ops.rayleigh_p(Y) == pytest.approx(0.5, abs=2e-3)
    py = ops.p_apply(Y)
    core = grid.b <= 4.0
    err = py.values[core, 0] - 0.5 * Y.values[core, 0]
    assert np.max(np.abs(err)) <= 1e-2


def test_op_p_rayleigh_converges_to_half(gaussian1):
    errs = []
    for res, R in ((128, 8.0), (256, 10.0)):
        grid, _ = build_grid(gaussian1, res, R)
        errs.append(abs(grid.ops().rayleigh_p(dilation(grid)) - 0.5))
    assert errs[1] < errs[0]


def test_op_p_kernel_on_cylinder_translation(cyl_grid):
    grid, _ = cyl_grid
    ops = grid.ops()
    Y = translation(grid, 0)
    assert ops.p_apply(Y).norm() / Y.norm() <= stencil_tol(grid)


def test_op_l_equals_drift_laplacian_on_gaussian(grid2_small):
    grid, _ = grid2_small
    ops = grid.ops()
    assert (ops.op_l - ops.lap_sym2).nnz == 0


def test_op_l_fixes_sphere_metric(cylinder32):
    # L(g_sph) = g_sph: the rough Laplacian kills the parallel tensor and the
    # curvature action contributes the tensor back
    errs = []
    for res in (48, 96):
        grid, _ = build_grid(cylinder32, res, 8.0)
        ops = grid.ops()
        pairs = sym_pairs(3)
        vals = np.zeros((grid.n_nodes, len(pairs)))
        for slot, (i, j) in enumerate(pairs):
            if i == j and i >= 1:
                vals[:, slot] = grid.metric_diag[:, i]
        h = Field(grid, "sym2tensor", vals)
        # the polar caps carry the chart-degeneracy penalty; measure away
        theta = grid.coords[:, 1]
        away = (theta > 0.5) & (theta < np.pi - 0.5)
        diff = ops.l_apply(h) - h
        errs.append(diff.norm_where(away) / h.norm_where(away))
    assert errs[1] <= errs[0] / 2.0
    assert errs[1] <= 0.2


def test_op_l_zero(grid2_small):
    grid, _ = grid2_small
    ops = grid.ops()
    out = ops.l_apply(zero_field(grid, "sym2tensor"))
    assert out.norm() == 0.0


def test_lie_derivative_alias(grid2_small):
    grid, _ = grid2_small
    ops = grid.ops()
    Y = dilation(grid)
    np.testing.assert_allclose(
        ops.lie_derivative_metric(Y).values, -2.0 * ops.div_star(Y).values
    )


def test_hessian_of_quadratic(gaussian2):
    grid, _ = build_grid(gaussian2, 128, 8.0)
    ops = grid.ops()
    u = scalar_field(grid, lambda c: c[:, 0] * c[:, 1])
    hess = ops.hess(u)
    core = grid.b <= 4.0
    np.testing.assert_allclose(hess.values[core, 0], 0.0, atol=2e-2)
    np.testing.assert_allclose(hess.values[core, 1], 1.0, atol=2e-2)
    np.testing.assert_allclose(hess.values[core, 2], 0.0, atol=2e-2)


# ---- rank/grid guards -------------------------------------------------------


def test_apply_rejects_wrong_rank(grid2_small):
    grid, _ = grid2_small
    ops = grid.ops()
    with pytest.raises(Exception, match="expects"):
        ops.handle(OperatorKind.DIV_F_STAR).apply(constant_scalar(grid))


def test_apply_rejects_wrong_grid(grid2_small, grid2_64):
    ga, _ = grid2_small
    gb, _ = grid2_64
    with pytest.raises(Exception):
        ga.ops().handle(OperatorKind.OP_P).apply(translation(gb, 0))


# ---- commutation identities -------------------------------------------------


def test_identity_residuals_zero_field(grid2_small):
    grid, _ = grid2_small
    rep = identity_residuals(zero_field(grid, "vector"))
    assert all(v == 0.0 for v in rep.residuals.values())


def test_identity_residuals_converge_at_stencil_order(gaussian2):
    reports = {}
    for res in (32, 64):
        grid, _ = build_grid(gaussian2, res, 4.0)
        reports[res] = identity_residuals(bump_vector(grid, 0, 1.8, 2.9))
        assert not reports[res].boundary_warning
    for name, coarse in reports[32].residuals.items():
        fine = reports[64].residuals[name]
        order = np.log2(coarse / fine)
        assert order >= 1.5, (name, coarse, fine)


def test_identity_residuals_killing_times_bump(gaussian2):
    grid, _ = build_grid(gaussian2, 64, 4.0)
    Y = euclidean_rotation(grid).scale_by(radial_bump(grid, 1.8, 2.9))
    rep = identity_residuals(Y)
    assert max(rep.residuals.values()) <= 0.05


def test_identity_residuals_boundary_warning(grid2_small):
    grid, _ = grid2_small
    rep = identity_residuals(translation(grid, 0))
    assert rep.boundary_warning


def test_identity_report_rows(grid2_small):
    grid, _ = grid2_small
    rep = identity_residuals(zero_field(grid, "vector"))
    rows = rep.to_rows()
    assert len(rows) == 4
    assert {"identity_name", "residual", "resolution", "stencil_order"} <= set(rows[0])
