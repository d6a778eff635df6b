"""Tensor midpoint quadrature over a square of the complex beta-plane."""
from dataclasses import dataclass, field

import numpy as np

DEFAULT_RADIUS = 8.0
DEFAULT_POINTS = 160


class GridTruncationWarning(UserWarning):
    """The integrand carries non-negligible weight on the grid boundary."""


@dataclass(frozen=True)
class QuadratureGrid:
    """Midpoint rule on [-radius, radius]^2 with ``points`` nodes per axis.

    Nodes are ordered row by row (imaginary part outer, real part inner); every
    reduction over the grid uses this order.
    """

    radius: float = DEFAULT_RADIUS
    points: int = DEFAULT_POINTS
    betas: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("grid radius must be positive")
        if int(self.points) != self.points or self.points < 1:
            raise ValueError("points per axis must be a positive integer")
        axis = self.axis
        betas = (axis[None, :] + 1j * axis[:, None]).ravel()
        weights = np.full(betas.shape, self.spacing**2)
        betas.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "weights", weights)

    @property
    def spacing(self):
        return 2.0 * self.radius / self.points

    @property
    def axis(self):
        return -self.radius + (np.arange(self.points) + 0.5) * self.spacing

    @property
    def size(self):
        return self.points * self.points

    def boundary_mask(self):
        """True for nodes in the outermost ring of cells."""
        idx = np.arange(self.points)
        edge = (idx == 0) | (idx == self.points - 1)
        return (edge[None, :] | edge[:, None]).ravel()

    def cell_of(self, beta):
        """Flat node index of the cell containing each beta, or -1 outside the grid."""
        beta = np.asarray(beta)
        ix = np.floor((beta.real + self.radius) / self.spacing).astype(np.int64)
        iy = np.floor((beta.imag + self.radius) / self.spacing).astype(np.int64)
        inside = (ix >= 0) & (ix < self.points) & (iy >= 0) & (iy < self.points)
        return np.where(inside, iy * self.points + ix, -1)


def default_grid():
    return QuadratureGrid(DEFAULT_RADIUS, DEFAULT_POINTS)


def integrate_plane(f, grid, vectorized=False):
    """Sum of weight * f(beta) over the grid nodes in fixed node order.

    With ``vectorized=True`` f receives the whole node array and must return an
    array whose leading axis runs over nodes. Scalar and array-valued integrands
    are both supported.
    """
    if vectorized:
        values = np.asarray(f(grid.betas))
        if values.shape[:1] != (grid.size,):
            raise ValueError("vectorized integrand must return one value per node")
    else:
        values = np.stack([np.asarray(f(b)) for b in grid.betas])
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values.reshape(grid.size, -1)).all(axis=1))[0])
        raise FloatingPointError(f"integrand not finite at beta={grid.betas[bad]}")
    return np.tensordot(grid.weights, values, axes=(0, 0))[()]
