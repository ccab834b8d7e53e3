"""Uniform grids on interval/box domains with Neumann-consistent operators.

Provides trapezoid quadrature weights, a ghost-point (reflected) discrete
Laplacian that is symmetric in the quadrature inner product and conserves
mass exactly, and the analytic Neumann-Laplacian eigenvalues used by the
linear stability analysis.  Two-dimensional fields are stored row-major:
node (i, j) of a grid with shape (n0, n1) lives at flat index i * n1 + j,
at coordinates (axes[0][i], axes[1][j]).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainSpec",
    "Grid",
    "build_grid",
    "neumann_laplacian_apply",
    "laplacian_matrix",
    "integrate_field",
    "neumann_eigenvalues",
    "field_gradient",
]


@dataclass(frozen=True)
class DomainSpec:
    """Axis-aligned box domain: per-axis extents and node counts."""

    lengths: tuple[float, ...] = (1.0,)
    resolution: tuple[int, ...] = (101,)

    def __post_init__(self):
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        resolution = tuple(int(n) for n in np.atleast_1d(self.resolution))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "resolution", resolution)
        if len(lengths) not in (1, 2):
            raise ValueError(f"only 1D and 2D box domains are supported, got {len(lengths)} axes")
        if len(resolution) != len(lengths):
            raise ValueError("lengths and resolution must have the same number of axes")
        if any(not np.isfinite(L) or L <= 0.0 for L in lengths):
            raise ValueError(f"domain lengths must be positive and finite, got {lengths}")
        if any(n < 3 for n in resolution):
            raise ValueError(f"need at least 3 nodes per axis for the stencil, got {resolution}")

    @property
    def dimension(self) -> int:
        return len(self.lengths)

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform tensor grid with trapezoid quadrature weights (flattened, row-major)."""

    domain: DomainSpec
    axes: tuple[np.ndarray, ...]
    spacing: tuple[float, ...]
    weights: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.domain.resolution

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def measure(self) -> float:
        return self.domain.measure


def build_grid(domain: DomainSpec) -> Grid:
    """Uniform node layout on the box with trapezoid-consistent weights."""
    axes = []
    axis_weights = []
    spacing = []
    for L, n in zip(domain.lengths, domain.resolution):
        x = np.linspace(0.0, L, n)
        h = L / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2.0
        axes.append(x)
        axis_weights.append(w)
        spacing.append(h)
    if domain.dimension == 1:
        weights = axis_weights[0]
    else:
        weights = np.multiply.outer(axis_weights[0], axis_weights[1]).ravel()
    return Grid(domain=domain, axes=tuple(axes), spacing=tuple(spacing), weights=weights)


def _as_shaped(grid: Grid, field) -> np.ndarray:
    arr = np.asarray(field, dtype=float)
    if arr.size != grid.n_nodes:
        raise ValueError(f"field has {arr.size} values but the grid has {grid.n_nodes} nodes")
    return arr.reshape(grid.shape)


def _second_difference(shaped: np.ndarray, axis: int, inv_h2: float) -> np.ndarray:
    g = np.moveaxis(shaped, axis, 0)
    out = np.empty_like(g)
    out[1:-1] = g[2:] - 2.0 * g[1:-1] + g[:-2]
    # zero-flux closure: the ghost node mirrors the first interior node
    out[0] = 2.0 * (g[1] - g[0])
    out[-1] = 2.0 * (g[-2] - g[-1])
    out *= inv_h2
    return np.moveaxis(out, 0, axis)


def neumann_laplacian_apply(grid: Grid, field) -> np.ndarray:
    """Apply the zero-flux discrete Laplacian; output has the input's shape."""
    arr = np.asarray(field, dtype=float)
    shaped = _as_shaped(grid, arr)
    acc = np.zeros_like(shaped)
    for axis, h in enumerate(grid.spacing):
        acc += _second_difference(shaped, axis, 1.0 / h**2)
    return acc.reshape(arr.shape)


def _laplacian_matrix_1d(n: int, h: float) -> np.ndarray:
    m = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    m[idx, idx] = -2.0
    m[idx, idx - 1] = 1.0
    m[idx, idx + 1] = 1.0
    m[0, 0] = -2.0
    m[0, 1] = 2.0
    m[-1, -1] = -2.0
    m[-1, -2] = 2.0
    return m / h**2

def laplacian_matrix(grid: Grid) -> np.ndarray:
    """Dense matrix of the discrete Neumann Laplacian (flattened ordering)."""
    blocks = [_laplacian_matrix_1d(n, h) for n, h in zip(grid.shape, grid.spacing)]
    if grid.domain.dimension == 1:
        return blocks[0]
    eye0 = np.eye(grid.shape[0])
    eye1 = np.eye(grid.shape[1])
    return np.kron(blocks[0], eye1) + np.kron(eye0, blocks[1])


def integrate_field(grid: Grid, field) -> float:
    """Quadrature-weighted integral of a nodal field over the domain."""
    arr = np.asarray(field, dtype=float)
    if arr.size != grid.n_nodes:
        raise ValueError(f"field has {arr.size} values but the grid has {grid.n_nodes} nodes")
    return float(grid.weights @ arr.ravel())


def neumann_eigenvalues(domain: DomainSpec, count: int) -> np.ndarray:
    """First `count` eigenvalues of -Laplacian with zero-flux conditions, ascending.

    Boxes admit the closed form: (j*pi/L)**2 per axis, summed across axes
    with multiplicity.  The leading eigenvalue is always 0 (constants).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    per_axis = [
        ((np.arange(count + 1) * np.pi / L) ** 2) for L in domain.lengths
    ]
    if domain.dimension == 1:
        combined = per_axis[0]
    else:
        combined = np.add.outer(per_axis[0], per_axis[1]).ravel()
    combined.sort()
    return combined[:count]


def field_gradient(grid: Grid, field) -> tuple[np.ndarray, ...]:
    """Per-axis discrete gradient: centered interior, one-sided at boundaries."""
    shaped = _as_shaped(grid, field)
    if grid.domain.dimension == 1:
        return (np.gradient(shaped, grid.spacing[0], edge_order=2).ravel(),)
    gx, gy = np.gradient(shaped, *grid.spacing, edge_order=2)
    return (gx.ravel(), gy.ravel())
