"""Standalone checks: Killing dichotomy, harmonicity, Bochner, interpolation,
and the distance/volume growth constants.

Vanishing verdicts use the tolerance 10 * h^order, separating identities that
hold exactly on the continuum from plain discretization error; every check is
a pure function of sampled fields and closed-form geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .fields import Field, FieldError, SCALAR
from .grid import Grid
from .models import ModelShrinker

PRESERVES_F = "PreservesF"
SPLITS_LINE = "SplitsLine"
NOT_KILLING = "NotKilling"


@dataclass(frozen=True)
class DichotomyVerdict:
    """Killing-field classification with the measured evidence attached."""

    verdict: str
    evidence: dict
    tolerance: float

    @property
    def consistent(self) -> bool:
        # a line-splitting verdict requires the parallel-gradient evidence
        if self.verdict != SPLITS_LINE:
            return True
        return self.evidence["hess_divf_norm"] <= self.tolerance


def classify_killing(Y: Field, tol_factor: float = 10.0) -> DichotomyVerdict:
    """Classify a sampled field: not Killing, f-preserving, or line-splitting.

    Evidence (on the unit-normalized field): the Killing defect |div_f^* Y|,
    the pairing |<grad f, Y>|, and |Hess(div_f Y)| whose vanishing witnesses a
    parallel gradient field. The verdict is scale-invariant.
    """
    grid = Y.grid
    ops = grid.ops()
    nrm = Y.norm()
    if nrm <= 0.0:
        raise FieldError("cannot classify the zero field")
    Yn = Y * (1.0 / nrm)
    tol = tol_factor * grid.max_spacing**grid.stencil_order
    interior = grid.interior_mask(applications=3)

    killing_residual = ops.div_star(Yn).norm_where(interior)
    df = grid.model.dpotential(grid.coords)
    pairing = Field(grid, SCALAR, np.sum(df * Yn.values, axis=1))
    df_pairing_norm = pairing.norm_where(interior)
    v = ops.div(Yn)
    hess_divf_norm = ops.hess(v).norm_where(interior)

    if killing_residual > tol:
        verdict = NOT_KILLING
    elif df_pairing_norm <= tol:
        verdict = PRESERVES_F
    else:
        verdict = SPLITS_LINE
    return DichotomyVerdict(
        verdict=verdict,
        evidence={
            "killing_residual": killing_residual,
            "df_pairing_norm": df_pairing_norm,
            "hess_divf_norm": hess_divf_norm,
        },
        tolerance=tol,
    )


@dataclass(frozen=True)
class HarmonicityReport:
    residual: float
    divf_norm: float
    passed: bool


def harmonicity_check(Y: Field, tol_factor: float = 10.0) -> HarmonicityReport:
    """For a Killing field, div_f Y is harmonic for the unweighted Laplacian."""
    verdict = classify_killing(Y)
    if verdict.verdict == NOT_KILLING:
        raise FieldError("harmonicity check requires a Killing field")
    grid = Y.grid
    ops = grid.ops()
    Yn = Y * (1.0 / Y.norm())
    v = ops.div(Yn)
    grad_v = ops.grad(v)
    df = grid.model.dpotential(grid.coords)
    drift = Field(grid, SCALAR, np.sum(df * grad_v.values, axis=1))
    lap_plain = ops.lap(v) + drift
    interior = grid.interior_mask(applications=3)
    residual = lap_plain.norm_where(interior) / max(v.norm(), 1.0)
    tol = tol_factor * grid.max_spacing**grid.stencil_order
    return HarmonicityReport(residual=residual, divf_norm=v.norm(), passed=residual <= tol)


@dataclass(frozen=True)
class BochnerReport:
    residual: float
    eigen_residual: float
    warned: bool
    lhs_norm: float = 0.0
    rhs_norm: float = 0.0


def drift_bochner_residual(v: Field, mu: float, warn_tol: float = 0.1) -> BochnerReport:
    """Residual of (1/2) L |grad v|^2 = |Hess v|^2 + (1/2 - mu) |grad v|^2.

    Expects an approximate drift eigenfunction with L v = -mu v; warns when
    that fails, since the identity is then not expected to hold.
    """
    grid = v.grid
    ops = grid.ops()
    vn = v.norm()
    if vn <= 0.0:
        raise FieldError("zero field")
    eig_resid = (ops.lap(v) + v * mu).norm_where(grid.interior_mask(2)) / ((abs(mu) + 0.5) * vn)
    warned = eig_resid > warn_tol

    gv = ops.grad(v)
    q = Field(grid, SCALAR, gv.pointwise_norm_sq())
    hv = ops.hess(v)
    hsq = Field(grid, SCALAR, hv.pointwise_norm_sq())
    lhs = ops.lap(q) * 0.5
    rhs = hsq + q * (0.5 - mu)
    interior = grid.interior_mask(applications=3)
    lhs_norm = lhs.norm_where(interior)
    rhs_norm = rhs.norm_where(interior)
    den = max(lhs_norm, rhs_norm, q.norm(), 1e-300)
    return BochnerReport(
        residual=(lhs - rhs).norm_where(interior) / den,
        eigen_residual=eig_resid,
        warned=warned,
        lhs_norm=lhs_norm,
        rhs_norm=rhs_norm,
    )


@dataclass(frozen=True)
class InterpReport:
    lhs: float
    rhs: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def interp_inequality_check(Y: Field, tolerance: float = 1e-9) -> InterpReport:
    """Check |grad Y|^2 + |div_f Y|^2 <= 2 |Y| |(2P + 1/2) Y| by quadrature."""
    grid = Y.grid
    ops = grid.ops()
    flat = ops._cov_vector @ Y.flat()
    grad_sq = float(np.sum(ops._gram_cov_vector * flat * flat))
    lhs = grad_sq + ops.div(Y).norm() ** 2
    rhs_field = ops.p_apply(Y) * 2.0 + Y * grid.model.kappa
    rhs = 2.0 * Y.norm() * rhs_field.norm()
    return InterpReport(lhs=lhs, rhs=rhs, passed=lhs <= rhs * (1.0 + tolerance) + 1e-14)


@dataclass(frozen=True)
class CaoZhouReport:
    c1: float
    c2: float
    c3: float
    radii: np.ndarray
    volumes: np.ndarray
    insufficient: bool


def cao_zhou_check(model: ModelShrinker, grid: Grid, radii=None) -> CaoZhouReport:
    """Fit the smallest constants in the distance and volume growth bounds.

    c1, c2 make (r - c1)^2/4 <= f <= (r + c2)^2/4 hold over the grid; c3 is
    the largest Vol(B_r)/r^n over the radius ladder. The basepoint sits at the
    analytic minimum of f.
    """
    if grid.n_nodes < 10:
        return CaoZhouReport(0.0, 0.0, 0.0, np.array([]), np.array([]), True)
    if model.kind == "gaussian":
        base = np.zeros(model.n)
        r_cover = grid.truncation_radius
    else:
        base = np.zeros(model.n)
        base[model.n_euclidean : model.n - 1] = np.pi / 2.0
        base[model.n - 1] = np.pi
        t_axis = grid.axes[0]
        r_cover = float(np.max(np.abs(t_axis.coords))) + t_axis.h / 2.0
    dist = model.distance(grid.coords, base)
    b = grid.b
    c1 = float(np.max(np.maximum(dist - b, 0.0)))
    c2 = float(np.max(np.maximum(b - dist, 0.0)))

    if radii is None:
        radii = np.linspace(max(2.0, 0.25 * r_cover), 0.9 * r_cover, 8)
    radii = np.asarray(radii, dtype=float)
    vols = np.array(
        [float(np.sum(grid.unweighted_volumes[dist <= r])) for r in radii]
    )
    c3 = float(np.max(vols / radii**model.n))
    return CaoZhouReport(c1=c1, c2=c2, c3=c3, radii=radii, volumes=vols, insufficient=False)
