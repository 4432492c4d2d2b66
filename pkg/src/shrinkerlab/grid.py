"""Grids over truncated model domains, weighted quadrature, and radial averages.

Grids are cell-centered tensor products in chart coordinates, truncated to
{b < R_max} and equipped with midpoint quadrature weights

    w_node = (volume element) * exp(-f) * prod(cell spacings).

Fields beyond the truncation radius are treated as zero; the quadrature error
this introduces is bounded by the Gaussian tail of the weight and reported on
the measure (`tail_fraction`). On cylinders a polar cap of one grid cell is
excluded around each pole of the latitude chart; the omitted cap measure is
reported as well (`cap_fraction`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from .models import GAUSSIAN, ModelShrinker

MIN_RESOLUTION = 16
MIN_TRUNCATION = 4.0
DEFAULT_NODE_CAP = 4_000_000

DIRICHLET = "dirichlet"
ONESIDED = "onesided"


class GridError(ValueError):
    """Invalid grid parameters or mismatched grid operations."""


@dataclass(frozen=True)
class Axis:
    coords: np.ndarray
    h: float
    periodic: bool = False
    boundary: str = DIRICHLET

    @property
    def size(self) -> int:
        return len(self.coords)


@dataclass
class Grid:
    """Masked tensor-product grid; immutable after construction by convention."""

    model: ModelShrinker
    axes: list[Axis]
    truncation_radius: float
    stencil_order: int
    mask: np.ndarray = field(repr=False)
    coords: np.ndarray = field(repr=False)
    node_index: np.ndarray = field(repr=False)
    node_multi: np.ndarray = field(repr=False)

    def __post_init__(self):
        self._cache: dict = {}

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def shape(self) -> tuple:
        return tuple(ax.size for ax in self.axes)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([ax.h for ax in self.axes])

    @property
    def max_spacing(self) -> float:
        return float(np.max(self.spacing))

    def _cached(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    # geometry arrays over nodes
    @property
    def f(self) -> np.ndarray:
        return self._cached("f", lambda: self.model.potential(self.coords))

    @property
    def b(self) -> np.ndarray:
        return self._cached("b", lambda: self.model.b_value(self.coords))

    @property
    def metric_diag(self) -> np.ndarray:
        return self._cached("g", lambda: self.model.metric_diag(self.coords))

    @property
    def inv_metric_diag(self) -> np.ndarray:
        return self._cached("ginv", lambda: 1.0 / self.metric_diag)

    @property
    def volume_element(self) -> np.ndarray:
        return self._cached("vol", lambda: self.model.volume_element(self.coords))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def unweighted_volumes(self) -> np.ndarray:
        return self._cached("uvol", lambda: self.volume_element * self.cell_volume)

    @property
    def weights(self) -> np.ndarray:
        return self._cached("w", lambda: self.unweighted_volumes * np.exp(-self.f))

    @property
    def christoffels(self) -> dict:
        return self._cached("gamma", lambda: self.model.christoffels(self.coords))

    @property
    def grad_b_norm_sq(self) -> np.ndarray:
        def build():
            with np.errstate(divide="ignore", invalid="ignore"):
                val = self.model.grad_potential_norm_sq(self.coords) / self.f
            return np.where(self.f > 0, val, 0.0)

        return self._cached("gb2", build)

    def b_spacing(self) -> float:
        """Grid spacing as seen by the radial coordinate b (Euclidean axes only)."""
        return max(self.axes[a].h for a in range(self.model.n_euclidean))

    def interior_mask(self, applications: int = 4) -> np.ndarray:
        """Nodes outside the truncation collar of composed-stencil reach.

        Zero-extension makes the outermost rows of a composed operator pure
        extension artifacts; residual checks on globally supported fields are
        measured away from that collar (`applications` chained derivatives).
        """
        reach = 2 if self.stencil_order == 2 else 3
        collar = (applications * reach + 1) * self.b_spacing()
        return self.b < self.truncation_radius - collar

    def neighbors(self, axis: int, offset: int) -> np.ndarray:
        """Node id of the neighbor shifted by `offset` along `axis` (-1 if absent)."""

        def build():
            mi = self.node_multi.copy()
            m = self.axes[axis].size
            col = mi[:, axis] + offset
            if self.axes[axis].periodic:
                col = np.mod(col, m)
                mi[:, axis] = col
                return self.node_index[tuple(mi.T)]
            ok = (col >= 0) & (col < m)
            out = np.full(self.n_nodes, -1, dtype=np.int64)
            mi_ok = mi[ok]
            mi_ok[:, axis] = col[ok]
            out[ok] = self.node_index[tuple(mi_ok.T)]
            return out

        return self._cached(("nbr", axis, offset), build)

    def ops(self):
        """Cached operator factory for this grid (see shrinkerlab.operators)."""
        from .operators import Operators

        return self._cached("ops", lambda: Operators(self))


@dataclass(frozen=True)
class WeightedMeasure:
    """Per-node quadrature weights for the e^{-f}-weighted inner product."""

    node_weights: np.ndarray
    total_mass: float
    tail_fraction: float
    cap_fraction: float = 0.0

    def __post_init__(self):
        if np.any(self.node_weights <= 0):
            raise GridError("quadrature weights must be positive")


def _gaussian_tail_fraction(n: int, radius: float) -> float:
    # fraction of the full-space weighted mass outside {|x| < R}
    return float(gammaincc(n / 2.0, radius**2 / 4.0))


def build_grid(
    model: ModelShrinker,
    resolution: int,
    truncation_radius: float = 8.0,
    stencil_order: int = 2,
    node_cap: int = DEFAULT_NODE_CAP,
) -> tuple[Grid, WeightedMeasure]:
    """Build the truncated grid and its weighted quadrature measure.

    `resolution` is the node count along each Euclidean axis; on cylinders the
    angular resolutions are derived so metric spacings are comparable.
    """
    if stencil_order not in (2, 4):
        raise GridError("stencil_order must be 2 or 4")
    if resolution < MIN_RESOLUTION:
        raise GridError(f"resolution below minimum ({MIN_RESOLUTION})")
    if truncation_radius < MIN_TRUNCATION:
        raise GridError(f"truncation_radius must be >= {MIN_TRUNCATION}")

    R = float(truncation_radius)
    if model.kind == GAUSSIAN:
        h = 2.0 * R / resolution
        coords1d = -R + (np.arange(resolution) + 0.5) * h
        axes = [Axis(coords=coords1d, h=h, boundary=DIRICHLET) for _ in range(model.n)]
        cap_fraction = 0.0
    else:
        if model.k != 2:
            raise GridError("cylinder grids support k = 2 (latitude-longitude chart)")
        span = R**2 - 4.0 * model.f_offset
        if span <= 0:
            raise GridError("truncation_radius too small for the cylinder potential offset")
        T = np.sqrt(span)
        h_t = 2.0 * T / resolution
        t_coords = -T + (np.arange(resolution) + 0.5) * h_t
        axes = [
            Axis(coords=t_coords, h=h_t, boundary=DIRICHLET)
            for _ in range(model.n_euclidean)
        ]
        r_sph = model.sphere_radius
        m_theta = max(MIN_RESOLUTION, int(np.ceil(np.pi * r_sph / h_t)))
        h_theta = np.pi / m_theta
        theta = (np.arange(m_theta) + 0.5) * h_theta
        # polar caps of one grid cell are excluded: drop nodes with theta < h
        keep = (theta > h_theta) & (theta < np.pi - h_theta)
        axes.append(Axis(coords=theta[keep], h=h_theta, boundary=ONESIDED))
        m_phi = max(MIN_RESOLUTION, int(np.ceil(2.0 * np.pi * r_sph / h_t)))
        h_phi = 2.0 * np.pi / m_phi
        phi = (np.arange(m_phi) + 0.5) * h_phi
        axes.append(Axis(coords=phi, h=h_phi, periodic=True))
        cap_fraction = 1.0 - np.cos(h_theta)  # omitted sphere-area fraction, both caps

    shape = tuple(ax.size for ax in axes)
    total = int(np.prod(shape))
    if total > node_cap:
        raise GridError(f"grid would allocate {total} nodes, above the cap {node_cap}")

    mesh = np.meshgrid(*[ax.coords for ax in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    b = model.b_value(pts)
    mask_flat = b < R
    mask = mask_flat.reshape(shape)

    node_index = -np.ones(shape, dtype=np.int64)
    node_index[mask] = np.arange(int(mask.sum()))
    node_multi = np.argwhere(mask)
    coords = pts[mask_flat]

    grid = Grid(
        model=model,
        axes=axes,
        truncation_radius=R,
        stencil_order=stencil_order,
        mask=mask,
        coords=coords,
        node_index=node_index,
        node_multi=node_multi,
    )
    if model.kind == GAUSSIAN:
        tail = _gaussian_tail_fraction(model.n, R)
    else:
        tail = _gaussian_tail_fraction(model.n_euclidean, np.sqrt(span))
    measure = WeightedMeasure(
        node_weights=grid.weights,
        total_mass=float(np.sum(grid.weights)),
        tail_fraction=tail,
        cap_fraction=cap_fraction,
    )
    grid._cache["measure"] = measure
    return grid, measure


def inner_product(a, b, measure: WeightedMeasure) -> float:
    """Weighted L2 pairing; pointwise contraction uses the model metric."""
    from .fields import Field

    if not isinstance(a, Field) or not isinstance(b, Field):
        raise GridError("inner_product expects Field operands")
    if a.grid is not b.grid:
        raise GridError("fields live on different grids")
    if a.rank != b.rank:
        raise GridError(f"rank mismatch: {a.rank} vs {b.rank}")
    return float(np.sum(measure.node_weights * a.contract(b)))


@dataclass(frozen=True)
class RadialProfile:
    """The weighted spherical average I_w sampled on a ladder of b-radii."""

    radii: np.ndarray
    values: np.ndarray
    w_label: str

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if len(r) == 0 or np.any(np.diff(r) <= 0):
            raise GridError("profile radii must be strictly ascending")
        if np.any(np.asarray(self.values) < -1e-14):
            raise GridError("profile values must be nonnegative")

    def to_rows(self):
        return [
            {"radius": float(r), "value": float(v), "w_label": self.w_label}
            for r, v in zip(self.radii, self.values)
        ]


def radial_profile(w, radii, shell_thickness: Optional[float] = None, label: str = "w") -> RadialProfile:
    """Shell-binned estimate of I_w(r) = r^(1-n) * integral_{b=r} |w|^2 |grad b|.

    Co-area binning over {|b - r| < dr/2} with the unweighted volume element:

        I_w(r) ~ r^(1-n) dr^(-1) * sum_shell |w|^2 |grad b|^2 vol,

    consistent with the level-set integral as dr -> 0.
    """
    grid = w.grid
    radii = np.asarray(radii, dtype=float)
    if len(radii) == 0 or np.any(np.diff(radii) <= 0):
        raise GridError("radii must be a nonempty strictly ascending ladder")
    dr = shell_thickness if shell_thickness is not None else 3.0 * grid.max_spacing
    if dr < 2.0 * grid.max_spacing:
        raise GridError("shell thickness must be at least 2 grid spacings")
    if radii[0] - dr / 2 <= 0 or radii[-1] >= grid.truncation_radius:
        raise GridError("radii must lie within (0, truncation_radius)")

    density = w.contract(w) * grid.grad_b_norm_sq * grid.unweighted_volumes
    b = grid.b
    n = grid.model.n
    values = np.empty_like(radii)
    for i, r in enumerate(radii):
        in_shell = np.abs(b - r) < dr / 2
        if not np.any(in_shell):
            raise GridError(f"empty shell at radius {r:g}: radius ladder too fine")
        values[i] = r ** (1 - n) / dr * float(np.sum(density[in_shell]))
    return RadialProfile(radii=radii, values=values, w_label=label)
