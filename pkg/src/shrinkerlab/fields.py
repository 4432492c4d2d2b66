"""Sampled fields on grids: scalars, vectors, and packed symmetric two-tensors.

Vector components are contravariant chart components; symmetric two-tensors
are covariant and packed over the upper triangle (see models.sym_pairs).
Pointwise contractions insert the model metric explicitly, so one storage
convention serves both the flat Gaussian chart and the cylinder chart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .models import CYLINDER, pair_multiplicity, sym_pairs

SCALAR = "scalar"
VECTOR = "vector"
SYM2 = "sym2tensor"

RANKS = (SCALAR, VECTOR, SYM2)


class FieldError(ValueError):
    """Malformed field data or mismatched field operations."""


def components_for(rank: str, n: int) -> int:
    if rank == SCALAR:
        return 1
    if rank == VECTOR:
        return n
    if rank == SYM2:
        return n * (n + 1) // 2
    raise FieldError(f"unknown rank {rank!r}")


@dataclass
class Field:
    """Values sampled at grid nodes, shaped (N,) or (N, components)."""

    grid: Grid
    rank: str
    values: np.ndarray

    def __post_init__(self):
        if self.rank not in RANKS:
            raise FieldError(f"unknown rank {self.rank!r}")
        vals = np.asarray(self.values, dtype=float)
        n = self.grid.n
        want = components_for(self.rank, n)
        if self.rank == SCALAR:
            if vals.shape != (self.grid.n_nodes,):
                raise FieldError(f"scalar field needs shape ({self.grid.n_nodes},)")
        elif vals.shape != (self.grid.n_nodes, want):
            raise FieldError(
                f"{self.rank} field needs shape ({self.grid.n_nodes}, {want}), got {vals.shape}"
            )
        self.values = vals

    # flat component-major vector used by the sparse operators
    def flat(self) -> np.ndarray:
        if self.rank == SCALAR:
            return self.values.copy()
        return self.values.T.ravel()

    @classmethod
    def from_flat(cls, grid: Grid, rank: str, flat: np.ndarray) -> "Field":
        ncomp = components_for(rank, grid.n)
        if rank == SCALAR:
            return cls(grid, rank, flat.copy())
        return cls(grid, rank, flat.reshape(ncomp, grid.n_nodes).T.copy())

    def contract(self, other: "Field") -> np.ndarray:
        """Pointwise metric contraction <self, other>_g at every node."""
        if other.grid is not self.grid or other.rank != self.rank:
            raise FieldError("contract requires matching rank and grid")
        g = self.grid.metric_diag
        if self.rank == SCALAR:
            return self.values * other.values
        if self.rank == VECTOR:
            return np.sum(g * self.values * other.values, axis=1)
        ginv = self.grid.inv_metric_diag
        pairs = sym_pairs(self.grid.n)
        mult = pair_multiplicity(self.grid.n)
        gi = np.stack([ginv[:, i] for i, _ in pairs], axis=1)
        gj = np.stack([ginv[:, j] for _, j in pairs], axis=1)
        return np.sum(mult * gi * gj * self.values * other.values, axis=1)

    def pointwise_norm_sq(self) -> np.ndarray:
        return self.contract(self)

    def norm(self, measure=None) -> float:
        w = (measure.node_weights if measure is not None else self.grid.weights)
        return float(np.sqrt(np.sum(w * self.pointwise_norm_sq())))

    def norm_where(self, mask: np.ndarray, measure=None) -> float:
        """Weighted norm restricted to a node mask (e.g. away from the collar)."""
        w = (measure.node_weights if measure is not None else self.grid.weights)
        return float(np.sqrt(np.sum((w * self.pointwise_norm_sq())[mask])))

    def inner(self, other: "Field", measure=None) -> float:
        w = (measure.node_weights if measure is not None else self.grid.weights)
        return float(np.sum(w * self.contract(other)))

    def __add__(self, other: "Field") -> "Field":
        if other.grid is not self.grid or other.rank != self.rank:
            raise FieldError("field addition requires matching rank and grid")
        return Field(self.grid, self.rank, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        if other.grid is not self.grid or other.rank != self.rank:
            raise FieldError("field subtraction requires matching rank and grid")
        return Field(self.grid, self.rank, self.values - other.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, self.rank, self.values * float(c))

    __rmul__ = __mul__

    def scale_by(self, scalar_values: np.ndarray) -> "Field":
        """Multiply by a per-node scalar (cutoffs, bumps)."""
        s = np.asarray(scalar_values, dtype=float)
        if self.rank == SCALAR:
            return Field(self.grid, self.rank, self.values * s)
        return Field(self.grid, self.rank, self.values * s[:, None])

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values) <= tol))


def zero_field(grid: Grid, rank: str) -> Field:
    ncomp = components_for(rank, grid.n)
    shape = (grid.n_nodes,) if rank == SCALAR else (grid.n_nodes, ncomp)
    return Field(grid, rank, np.zeros(shape))


def scalar_field(grid: Grid, fn) -> Field:
    """Sample fn(coords) -> (N,) as a scalar field."""
    return Field(grid, SCALAR, np.asarray(fn(grid.coords), dtype=float))


def vector_field(grid: Grid, fn) -> Field:
    """Sample fn(coords) -> (N, n) contravariant components."""
    return Field(grid, VECTOR, np.asarray(fn(grid.coords), dtype=float))


def sym2_field(grid: Grid, fn) -> Field:
    return Field(grid, SYM2, np.asarray(fn(grid.coords), dtype=float))


def constant_scalar(grid: Grid, value: float = 1.0) -> Field:
    return Field(grid, SCALAR, np.full(grid.n_nodes, float(value)))


def translation(grid: Grid, axis: int = 0) -> Field:
    """Coordinate translation field along a flat axis (a Killing field)."""
    if axis >= grid.model.n_euclidean:
        raise FieldError("translation axis must be a Euclidean axis")
    vals = np.zeros((grid.n_nodes, grid.n))
    vals[:, axis] = 1.0
    return Field(grid, VECTOR, vals)


def euclidean_rotation(grid: Grid, a: int = 0, b: int = 1) -> Field:
    """Rotation x_a d_b - x_b d_a in a flat coordinate plane (a Killing field)."""
    m = grid.model.n_euclidean
    if a >= m or b >= m or a == b:
        raise FieldError("rotation needs two distinct Euclidean axes")
    vals = np.zeros((grid.n_nodes, grid.n))
    vals[:, b] = grid.coords[:, a]
    vals[:, a] = -grid.coords[:, b]
    return Field(grid, VECTOR, vals)


def angular_rotation(grid: Grid) -> Field:
    """Rotation about the polar axis of the cylinder's sphere factor."""
    if grid.model.kind != CYLINDER:
        raise FieldError("angular rotation requires a cylinder grid")
    vals = np.zeros((grid.n_nodes, grid.n))
    vals[:, grid.n - 1] = 1.0
    return Field(grid, VECTOR, vals)


def dilation(grid: Grid) -> Field:
    """Radial field x^i d_i on the flat factor (not Killing; eigenfield at 1/2)."""
    vals = np.zeros((grid.n_nodes, grid.n))
    m = grid.model.n_euclidean
    vals[:, :m] = grid.coords[:, :m]
    return Field(grid, VECTOR, vals)


def smoothstep(u: np.ndarray) -> np.ndarray:
    """Quintic C^2 step: 0 at u<=0 rising to 1 at u>=1."""
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


def radial_bump(grid: Grid, inner: float, outer: float) -> np.ndarray:
    """C^2 plateau in b: equals 1 on {b <= inner}, 0 on {b >= outer}."""
    if not 0 < inner < outer:
        raise FieldError("need 0 < inner < outer")
    u = (outer - grid.b) / (outer - inner)
    return smoothstep(u)


def bump_vector(grid: Grid, axis: int = 0, inner: float = 2.0, outer: float = 3.0) -> Field:
    """Interior-supported smooth test field: bump(b) times a coordinate direction."""
    return translation(grid, axis).scale_by(radial_bump(grid, inner, outer))


def perturbed_rotation(grid: Grid, eps: float, inner: float = 2.0, outer: float = 3.5) -> Field:
    """Rotation plus eps * (x_1^2 d_1 bump): the deterministic defect test field."""
    pert = np.zeros((grid.n_nodes, grid.n))
    pert[:, 0] = grid.coords[:, 0] ** 2
    bump = radial_bump(grid, inner, outer)
    return euclidean_rotation(grid, 0, 1) + Field(grid, VECTOR, pert * bump[:, None]) * eps
