from __future__ import annotations
from typing import Callable, NamedTuple, Optional, Union

import logging

import numpy as np

from filmlab.util import InvalidExponent, InvalidGrid, NonFiniteIntegrand

logger = logging.getLogger(__name__)


class Grid2D(NamedTuple):
    """
    Rectangle (0, Lx) x (0, Ly) with Nx x Ny interior nodes.

    Node i sits at x_i = Lx * i / (Nx + 1) for i = 0..Nx+1, so both boundary
    nodes are hit exactly. Storage is 0-based: interior node (i, j) lives at
    values[i - 1, j - 1].
    """
    Lx: float
    Ly: float
    Nx: int
    Ny: int

    @property
    def dx(self) -> float:
        return self.Lx / (self.Nx + 1)

    @property
    def dy(self) -> float:
        return self.Ly / (self.Ny + 1)

    @property
    def shape(self):
        return self.Nx, self.Ny

    @property
    def all_nodes_shape(self):
        return self.Nx + 2, self.Ny + 2

    @property
    def area(self) -> float:
        return self.Lx * self.Ly

    @property
    def cell(self) -> float:
        return self.dx * self.dy

    def x_nodes(self) -> np.ndarray:
        return self.Lx * np.arange(self.Nx + 2) / (self.Nx + 1)

    def y_nodes(self) -> np.ndarray:
        return self.Ly * np.arange(self.Ny + 2) / (self.Ny + 1)

    def interior_mesh(self):
        x = self.x_nodes()[1:-1]
        y = self.y_nodes()[1:-1]
        return np.meshgrid(x, y, indexing='ij')

    def all_nodes_mesh(self):
        return np.meshgrid(self.x_nodes(), self.y_nodes(), indexing='ij')


def make_grid(Lx, Ly, Nx, Ny) -> Grid2D:
    if int(Nx) != Nx or int(Ny) != Ny:
        raise InvalidGrid('node counts must be integers, got {} x {}'.format(Nx, Ny))
    if Nx < 2 or Ny < 2:
        raise InvalidGrid('need at least 2 x 2 interior nodes, got {} x {}'.format(Nx, Ny))
    if not (Lx > 0 and Ly > 0) or not np.isfinite([Lx, Ly]).all():
        raise InvalidGrid('domain lengths must be positive, got {} x {}'.format(Lx, Ly))
    return Grid2D(float(Lx), float(Ly), int(Nx), int(Ny))


class Field(NamedTuple):
    """Interior values of a grid function; every ghost node reads as zero."""
    grid: Grid2D
    values: np.ndarray
    diverged: bool = False

    def padded(self, width: int = 1) -> np.ndarray:
        """Values with `width` layers of zero ghost nodes on every side."""
        return np.pad(self.values, width)

    def at(self, i: int, j: int) -> float:
        if 1 <= i <= self.grid.Nx and 1 <= j <= self.grid.Ny:
            return float(self.values[i - 1, j - 1])
        if -1 <= i <= self.grid.Nx + 2 and -1 <= j <= self.grid.Ny + 2:
            return 0.0
        raise IndexError('node ({}, {}) is outside the ghost frame'.format(i, j))

    @property
    def umax(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def is_zero(self) -> bool:
        return not np.any(self.values)


def field_from_array(grid: Grid2D, values, diverged: bool = False) -> Field:
    values = np.array(values, dtype=np.float64)
    if values.shape != grid.shape:
        raise InvalidGrid('field of shape {} does not fit grid {}'.format(values.shape, grid.shape))
    if not diverged and not np.isfinite(values).all():
        diverged = True
    values.setflags(write=False)
    return Field(grid, values, diverged)


def zero_field(grid: Grid2D) -> Field:
    return field_from_array(grid, np.zeros(grid.shape))


def field_from_function(grid: Grid2D, fn: Callable) -> Field:
    x, y = grid.interior_mesh()
    return field_from_array(grid, fn(x, y))


class ExponentField(NamedTuple):
    """p(x, y) on all nodes including the boundary ring."""
    grid: Grid2D
    values: np.ndarray
    p_minus: float
    p_plus: float

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]


def make_exponent(grid: Grid2D, values, strict: bool = True) -> ExponentField:
    """
    Build an ExponentField from an all-node array.

    With strict=False the 2 < p lower bound is not enforced, which only the
    collapse checks (p = 2 gives the plain Laplacian) need.
    """
    values = np.array(np.broadcast_to(values, grid.all_nodes_shape), dtype=np.float64)
    if not np.isfinite(values).all():
        raise InvalidExponent('exponent must be finite everywhere')
    p_minus, p_plus = float(values.min()), float(values.max())
    if strict and not p_minus > 2:
        raise InvalidExponent('exponent must satisfy 2 < p-, got p- = {}'.format(p_minus))
    values.setflags(write=False)
    return ExponentField(grid, values, p_minus, p_plus)


def constant_exponent(grid: Grid2D, q: float, strict: bool = True) -> ExponentField:
    return make_exponent(grid, np.full(grid.all_nodes_shape, float(q)), strict=strict)


def exponent_from_function(grid: Grid2D, fn: Callable, strict: bool = True) -> ExponentField:
    x, y = grid.all_nodes_mesh()
    return make_exponent(grid, fn(x, y), strict=strict)


def gradient_magnitude_sq(u: Field) -> np.ndarray:
    """Central-difference |grad u|^2 at all nodes 0..Nx+1, 0..Ny+1."""
    grid = u.grid
    w = u.padded(2)
    gx = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2 * grid.dx)
    gy = (w[1:-1, 2:] - w[1:-1, :-2]) / (2 * grid.dy)
    return gx * gx + gy * gy


def laplacian_5pt(u: Field) -> np.ndarray:
    """Five-point Laplacian on the interior nodes."""
    grid = u.grid
    w = u.padded(1)
    c = w[1:-1, 1:-1]
    return ((w[2:, 1:-1] - 2 * c + w[:-2, 1:-1]) / grid.dx ** 2
            + (w[1:-1, 2:] - 2 * c + w[1:-1, :-2]) / grid.dy ** 2)


def interior(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Interior block of either an interior or an all-node array."""
    if values.shape == grid.shape:
        return values
    if values.shape == grid.all_nodes_shape:
        return values[1:-1, 1:-1]
    raise InvalidGrid('array of shape {} matches neither {} nor {}'.format(
        values.shape, grid.shape, grid.all_nodes_shape))


def quadrature(f: Union[Field, np.ndarray], grid: Optional[Grid2D] = None) -> float:
    """Interior rectangle rule dx*dy*sum f_ij."""
    if isinstance(f, Field):
        grid, values = f.grid, f.values
    else:
        values = interior(np.asarray(f), grid)
    total = values.sum()
    if not np.isfinite(total):
        raise NonFiniteIntegrand()
    return float(grid.cell * total)
