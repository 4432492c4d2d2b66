"""Closed-form model shrinkers: flat Gaussian space and round cylinders.

Both families are gradient shrinking solitons normalized to kappa = 1/2,

    Ric + Hess_f = g / 2,      |grad f|^2 + S = f,      Lap f + S = n / 2,

with every geometric quantity available in closed form:

* Gaussian: flat R^n in Cartesian coordinates, f(x) = |x|^2 / 4, S = 0.
* Cylinder: R^(n-k) x S^k(r) with r = sqrt(2(k-1)), in coordinates
  (t_1..t_{n-k}, a_1..a_k) where the a_j are chained spherical angles
  (latitude-type a_1..a_{k-1} in (0, pi), longitude a_k in [0, 2*pi)),
  f(t, a) = |t|^2 / 4 + k/2, S = k/2.

Vector fields are handled in chart components (contravariant); symmetric
two-tensors are stored covariant and packed over the upper triangle, see
:func:`sym_pairs`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

GAUSSIAN = "gaussian"
CYLINDER = "cylinder"

SOLITON_TOL = 1e-10


class ModelError(ValueError):
    """Invalid model parameters or points outside the chart."""


def sym_pairs(n: int) -> list[tuple[int, int]]:
    """Upper-triangle index pairs (i <= j) used for packed symmetric tensors."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def pair_multiplicity(n: int) -> np.ndarray:
    """Contraction multiplicity per packed slot: 1 on the diagonal, 2 off it."""
    return np.array([1.0 if i == j else 2.0 for i, j in sym_pairs(n)])


@dataclass(frozen=True)
class ModelShrinker:
    """Immutable closed-form model; all evaluators are pure and vectorized."""

    kind: str
    n: int
    k: Optional[int] = None
    kappa: float = 0.5
    sphere_radius: Optional[float] = None
    f_offset: float = 0.0

    # ---- chart layout -------------------------------------------------

    @property
    def n_euclidean(self) -> int:
        return self.n if self.kind == GAUSSIAN else self.n - self.k

    @property
    def angle_axes(self) -> range:
        return range(self.n_euclidean, self.n)

    def _pts(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        squeeze = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.n:
            raise ModelError(f"expected points with {self.n} coordinates, got {pts.shape[-1]}")
        return pts, squeeze

    def validate_points(self, points) -> None:
        pts, _ = self._pts(points)
        if not np.all(np.isfinite(pts)):
            raise ModelError("non-finite point coordinates")
        if self.kind == CYLINDER:
            ang = pts[:, self.n_euclidean : self.n - 1]
            if ang.size and (np.any(ang <= 0.0) or np.any(ang >= np.pi)):
                raise ModelError("latitude angle outside (0, pi): point is in a polar cap")

    # ---- potential ----------------------------------------------------

    def potential(self, points) -> np.ndarray:
        pts, squeeze = self._pts(points)
        t = pts[:, : self.n_euclidean]
        f = np.sum(t * t, axis=1) / 4.0 + self.f_offset
        return f[0] if squeeze else f

    def dpotential(self, points) -> np.ndarray:
        """Covariant differential of f (equals d f / d coordinate)."""
        pts, squeeze = self._pts(points)
        out = np.zeros_like(pts)
        out[:, : self.n_euclidean] = pts[:, : self.n_euclidean] / 2.0
        return out[0] if squeeze else out

    def grad_potential_norm_sq(self, points) -> np.ndarray:
        pts, squeeze = self._pts(points)
        df = np.atleast_2d(self.dpotential(pts))
        ginv = np.atleast_2d(self.inv_metric_diag(pts))
        val = np.sum(ginv * df * df, axis=1)
        return val[0] if squeeze else val

    def hess_potential_packed(self, points) -> np.ndarray:
        """Hess f in packed covariant components; (1/2) delta on the flat block."""
        pts, squeeze = self._pts(points)
        pairs = sym_pairs(self.n)
        out = np.zeros((pts.shape[0], len(pairs)))
        for slot, (i, j) in enumerate(pairs):
            if i == j and i < self.n_euclidean:
                out[:, slot] = 0.5
        return out[0] if squeeze else out

    # ---- metric -------------------------------------------------------

    def metric_diag(self, points) -> np.ndarray:
        pts, squeeze = self._pts(points)
        g = np.ones_like(pts)
        if self.kind == CYLINDER:
            r2 = self.sphere_radius**2
            running = np.full(pts.shape[0], r2)
            for axis in self.angle_axes:
                g[:, axis] = running
                running = running * np.sin(pts[:, axis]) ** 2
        return g[0] if squeeze else g

    def inv_metric_diag(self, points) -> np.ndarray:
        pts, squeeze = self._pts(points)
        g = np.atleast_2d(self.metric_diag(pts))
        return (1.0 / g)[0] if squeeze else 1.0 / g

    def volume_element(self, points) -> np.ndarray:
        pts, squeeze = self._pts(points)
        g = np.atleast_2d(self.metric_diag(pts))
        vol = np.sqrt(np.prod(g, axis=1))
        return vol[0] if squeeze else vol

    def christoffels(self, points) -> dict[tuple[int, int, int], np.ndarray]:
        """Nonzero Christoffel symbols {(l, i, j): Gamma^l_ij} with i <= j."""
        pts, _ = self._pts(points)
        out: dict[tuple[int, int, int], np.ndarray] = {}
        if self.kind == GAUSSIAN:
            return out
        angles = list(self.angle_axes)
        r2 = self.sphere_radius**2
        s = {}
        running = np.full(pts.shape[0], r2)
        for axis in angles:
            s[axis] = running.copy()
            running = running * np.sin(pts[:, axis]) ** 2
        for ip, p in enumerate(angles):
            cot_p = np.cos(pts[:, p]) / np.sin(pts[:, p])
            for q in angles[ip + 1 :]:
                out[(p, q, q)] = -(s[q] / s[p]) * cot_p
                out[(q, p, q)] = cot_p
        return out

    # ---- curvature ----------------------------------------------------

    def scalar_curvature(self, points) -> np.ndarray:
        pts, squeeze = self._pts(points)
        if self.kind == GAUSSIAN:
            val = np.zeros(pts.shape[0])
        else:
            val = np.full(pts.shape[0], self.k * (self.k - 1) / self.sphere_radius**2)
        return val[0] if squeeze else val

    def ricci_packed(self, points) -> np.ndarray:
        """Ric in packed covariant components; (k-1)/r^2 times the sphere metric."""
        pts, squeeze = self._pts(points)
        pairs = sym_pairs(self.n)
        out = np.zeros((pts.shape[0], len(pairs)))
        if self.kind == CYLINDER:
            g = np.atleast_2d(self.metric_diag(pts))
            coeff = (self.k - 1) / self.sphere_radius**2
            for slot, (i, j) in enumerate(pairs):
                if i == j and i >= self.n_euclidean:
                    out[:, slot] = coeff * g[:, i]
        return out[0] if squeeze else out

    def riemann_action_matrix(self, point) -> np.ndarray:
        """Dense packed matrix of h -> R(h) at one point.

        On the constant-curvature sphere factor R(h) = K (g_sph tr_sph(h) - h_sph)
        with K = 1/r^2; the action vanishes on components with a flat index.
        """
        pts, _ = self._pts(point)
        pairs = sym_pairs(self.n)
        mat = np.zeros((len(pairs), len(pairs)))
        if self.kind == GAUSSIAN:
            return mat
        K = 1.0 / self.sphere_radius**2
        g = np.atleast_2d(self.metric_diag(pts))[0]
        sphere = set(self.angle_axes)
        slot_of = {p: s for s, p in enumerate(pairs)}
        for slot, (i, j) in enumerate(pairs):
            if i not in sphere or j not in sphere:
                continue
            mat[slot, slot] -= K
            if i == j:
                for a in sphere:
                    mat[slot, slot_of[(a, a)]] += K * g[i] / g[a]
        return mat

    # ---- distance-like quantities --------------------------------------

    def b_value(self, points) -> np.ndarray:
        f = self.potential(points)
        return 2.0 * np.sqrt(np.maximum(f, 0.0))

    def grad_b_norm(self, points) -> np.ndarray:
        """|grad b| = |grad f| / sqrt(f); equals 1 on the Gaussian away from 0."""
        f = self.potential(points)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sqrt(self.grad_potential_norm_sq(points) / f)
        return val

    def sphere_embedding(self, points) -> np.ndarray:
        """Unit vectors in R^(k+1) for the sphere factor (cylinder only)."""
        pts, _ = self._pts(points)
        ang = pts[:, self.n_euclidean :]
        k = self.k
        u = np.ones((pts.shape[0], k + 1))
        for j in range(k):
            u[:, j] *= np.cos(ang[:, j])
            u[:, j + 1 :] *= np.sin(ang[:, j])[:, None]
        return u

    def distance(self, points, base) -> np.ndarray:
        """Geodesic distance to a base point, in closed form."""
        pts, squeeze = self._pts(points)
        basep = np.atleast_2d(np.asarray(base, dtype=float))
        if self.kind == GAUSSIAN:
            d = np.linalg.norm(pts - basep, axis=1)
        else:
            m = self.n_euclidean
            dt = np.linalg.norm(pts[:, :m] - basep[:, :m], axis=1)
            u = self.sphere_embedding(pts)
            u0 = self.sphere_embedding(basep)
            cosang = np.clip(u @ u0[0], -1.0, 1.0)
            arc = self.sphere_radius * np.arccos(cosang)
            d = np.hypot(dt, arc)
        return d[0] if squeeze else d

    def describe(self) -> dict:
        """Plain-data description used by the JSON report schema."""
        return {
            "kind": self.kind,
            "n": self.n,
            "k": self.k,
            "sphere_radius": self.sphere_radius,
            "f_offset": self.f_offset,
        }


@dataclass(frozen=True)
class CurvaturePack:
    """Pointwise curvature data: Ric, S, and the action h -> R(h)."""

    ric: np.ndarray
    scalar: float
    riemann_action: np.ndarray
    metric: np.ndarray

    def apply_riemann(self, h_packed: np.ndarray) -> np.ndarray:
        return self.riemann_action @ h_packed


def make_model(kind: str, n: int, k: Optional[int] = None) -> ModelShrinker:
    """Construct a model shrinker, validating the parameter ranges."""
    if kind not in (GAUSSIAN, CYLINDER):
        raise ModelError(f"unknown model kind {kind!r}")
    if int(n) != n or n < 1:
        raise ModelError("total dimension n must be an integer >= 1")
    n = int(n)
    if kind == GAUSSIAN:
        if k is not None:
            raise ModelError("Gaussian model takes no sphere dimension k")
        return ModelShrinker(kind=GAUSSIAN, n=n)
    if k is None or int(k) != k:
        raise ModelError("cylinder model requires an integer sphere dimension k")
    k = int(k)
    if k == 1:
        raise ModelError("k = 1 rejected: a circle factor is flat, not a shrinker factor")
    if k < 2:
        raise ModelError("sphere dimension k must be >= 2")
    if k >= n:
        raise ModelError("k must be <= n - 1: the cylinder needs a Euclidean factor")
    radius = np.sqrt(2.0 * (k - 1))
    return ModelShrinker(kind=CYLINDER, n=n, k=k, sphere_radius=radius, f_offset=k / 2.0)


def potential_data(model: ModelShrinker, point) -> dict:
    """Potential, its first two derivatives, and the distance-like b = 2 sqrt(f).

    grad_f and grad_b are covariant components; grad_b is None at f = 0 where
    b is not differentiable.
    """
    model.validate_points(point)
    f = float(model.potential(point))
    grad_f = np.asarray(model.dpotential(point))
    hess_f = np.asarray(model.hess_potential_packed(point))
    b = 2.0 * np.sqrt(max(f, 0.0))
    if f <= 0.0:
        grad_b = None
        grad_b_norm = None
    else:
        grad_b = grad_f / np.sqrt(f)
        grad_b_norm = float(model.grad_b_norm(point))
    return {
        "f": f,
        "grad_f": grad_f,
        "hess_f": hess_f,
        "b": b,
        "grad_b": grad_b,
        "grad_b_norm": grad_b_norm,
    }


def curvature(model: ModelShrinker, point) -> CurvaturePack:
    """Curvature data at a point; the Riemann action is a packed dense matrix."""
    model.validate_points(point)
    return CurvaturePack(
        ric=np.asarray(model.ricci_packed(point)),
        scalar=float(model.scalar_curvature(point)),
        riemann_action=model.riemann_action_matrix(point),
        metric=np.asarray(model.metric_diag(point)),
    )


def random_points(model: ModelShrinker, count: int, rng, spread: float = 5.0) -> np.ndarray:
    """Seeded sample of chart points away from the polar caps."""
    m = model.n_euclidean
    pts = np.zeros((count, model.n))
    pts[:, :m] = rng.uniform(-spread, spread, size=(count, m))
    if model.kind == CYLINDER:
        for j, axis in enumerate(model.angle_axes):
            if j < model.k - 1:
                pts[:, axis] = rng.uniform(0.15, np.pi - 0.15, size=count)
            else:
                pts[:, axis] = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return pts


@dataclass(frozen=True)
class ResidualReport:
    """Max-norm residuals of the defining identities over a point sample."""

    soliton_residual: float
    trace_residual: float
    potential_residual: float
    gradb_excess: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            max(
                self.soliton_residual,
                self.trace_residual,
                self.potential_residual,
                self.gradb_excess,
            )
            <= self.tolerance
        )

    def failures(self) -> list[str]:
        out = []
        if self.soliton_residual > self.tolerance:
            out.append("Ric + Hess_f - g/2")
        if self.trace_residual > self.tolerance:
            out.append("Lap f + S - n/2")
        if self.potential_residual > self.tolerance:
            out.append("|grad f|^2 + S - f")
        if self.gradb_excess > self.tolerance:
            out.append("|grad b| <= 1")
        return out


def check_soliton_identities(
    model: ModelShrinker, sample_points, tolerance: float = SOLITON_TOL
) -> ResidualReport:
    """Evaluate the soliton, trace and potential identities at sample points.

    Residuals above tolerance indicate a model-construction bug (or an
    intentionally perturbed model in tests).
    """
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if pts.shape[0] == 0:
        raise ModelError("empty sample set")
    model.validate_points(pts)

    g = model.metric_diag(pts)
    ginv = 1.0 / g
    hess = model.hess_potential_packed(pts)
    ric = model.ricci_packed(pts)
    S = model.scalar_curvature(pts)
    f = model.potential(pts)

    pairs = sym_pairs(model.n)
    mult = pair_multiplicity(model.n)
    half_g = np.zeros_like(hess)
    for slot, (i, j) in enumerate(pairs):
        if i == j:
            half_g[:, slot] = 0.5 * g[:, i]
    resid = ric + hess - half_g
    # pointwise tensor norm with metric contraction
    ginv_i = np.stack([ginv[:, i] for i, _ in pairs], axis=1)
    ginv_j = np.stack([ginv[:, j] for _, j in pairs], axis=1)
    soliton = np.sqrt(np.sum(mult * ginv_i * ginv_j * resid**2, axis=1))

    diag_slots = np.array([1.0 if i == j else 0.0 for i, j in pairs])
    lap_f = np.sum(ginv_i * hess * diag_slots, axis=1)
    trace = np.abs(lap_f + S - model.n / 2.0)

    potential = np.abs(model.grad_potential_norm_sq(pts) + S - f)

    with np.errstate(divide="ignore", invalid="ignore"):
        gb = model.grad_b_norm(pts)
    gb = np.where(f > 0, gb, 0.0)
    gradb_excess = np.maximum(gb - 1.0, 0.0)

    return ResidualReport(
        soliton_residual=float(np.max(soliton)),
        trace_residual=float(np.max(trace)),
        potential_residual=float(np.max(potential)),
        gradb_excess=float(np.max(gradb_excess)),
        tolerance=tolerance,
    )
