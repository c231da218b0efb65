"""Builtin initial data, exponents and schedules for the two reference experiments."""
from __future__ import annotations

import logging

import numpy as np

from filmlab.grid import (ExponentField, Field, Grid2D, constant_exponent, exponent_from_function,
                          field_from_array, field_from_function, make_grid, zero_field)
from filmlab.schedule import ArctanRamp, Exponential
from filmlab.spectral import SpectralField, dst_inverse
from filmlab.storage import read_tff
from filmlab.util import LabError

logger = logging.getLogger(__name__)


class UnknownDatum(LabError):
    pass


def example1_grid(n: int = 150) -> Grid2D:
    return make_grid(10.0, 10.0, n, n)


def example1_initial(grid: Grid2D) -> Field:
    def u0(x, y):
        return (x * y * (10 - x) * (10 - y)
                * np.sin(np.pi * x / 10) ** 2 * np.sin(np.pi * y / 10) ** 2 / 400)
    return field_from_function(grid, u0)


def example1_exponent(grid: Grid2D) -> ExponentField:
    return exponent_from_function(grid, lambda x, y: 2 + 5 / ((x - 5) ** 2 + (y - 5) ** 2 + 1.5))


def example1_schedule():
    return Exponential(10.0, 1.0)


EXAMPLE2_CENTERS = ((15.0, 15.0), (35.0, 15.0), (15.0, 35.0), (35.0, 35.0))


def example2_grid(n: int = 500) -> Grid2D:
    return make_grid(50.0, 50.0, n, n)


def example2_initial(grid: Grid2D) -> Field:
    """5 times four compactly supported bumps exp(-64 / (16 - r^2)), r < 4."""
    def u0(x, y):
        total = np.zeros_like(x)
        for cx, cy in EXAMPLE2_CENTERS:
            r2 = (x - cx) ** 2 + (y - cy) ** 2
            inside = r2 < 16
            bump = np.zeros_like(x)
            bump[inside] = np.exp(-64 / (16 - r2[inside]))
            total += bump
        return 5 * total
    return field_from_function(grid, u0)


def example2_exponent(grid: Grid2D) -> ExponentField:
    return exponent_from_function(grid, lambda x, y: 2 + (x / 25 - 1) ** 2 + (y / 25 - 1) ** 2)


def example2_schedule():
    return ArctanRamp(1 / 400)


def single_mode(grid: Grid2D, m: int, l: int, amplitude: float = 1.0) -> Field:
    """amplitude * sin(pi m x / Lx) sin(pi l y / Ly) on the interior nodes."""
    if not (1 <= m <= grid.Nx and 1 <= l <= grid.Ny):
        raise UnknownDatum('mode ({}, {}) is not resolved on a {} x {} grid'.format(m, l, grid.Nx, grid.Ny))
    coefficients = np.zeros(grid.shape)
    coefficients[m - 1, l - 1] = amplitude * (grid.Nx + 1) * (grid.Ny + 1) / 4
    return dst_inverse(SpectralField(grid, coefficients))


def initial_datum(text: str, grid: Grid2D) -> Field:
    """
    Resolve a manifest ``initial`` value: example1, example2, zero,
    mode:m,l[,amplitude] or file:<path.tff> (the file's own grid wins).
    """
    kind, _, rest = text.strip().partition(':')
    if kind == 'example1':
        return example1_initial(grid)
    if kind == 'example2':
        return example2_initial(grid)
    if kind == 'zero':
        return zero_field(grid)
    if kind == 'mode':
        try:
            args = [float(a) for a in rest.split(',')]
            m, l = int(args[0]), int(args[1])
        except (ValueError, IndexError):
            raise UnknownDatum('mode datum is "mode:m,l[,amplitude]", got {!r}'.format(text))
        return single_mode(grid, m, l, args[2] if len(args) > 2 else 1.0)
    if kind == 'file':
        field = read_tff(rest)
        if grid is not None and field.grid != grid:
            logger.warning('snapshot %s carries grid %s; using it instead of %s', rest, field.grid, grid)
        return field_from_array(field.grid, field.values)
    raise UnknownDatum('unknown initial datum {!r}'.format(text))


def exponent_datum(text: str, grid: Grid2D) -> ExponentField:
    """Resolve a manifest ``exponent`` value: example1, example2 or constant:q."""
    kind, _, rest = text.strip().partition(':')
    if kind == 'example1':
        return example1_exponent(grid)
    if kind == 'example2':
        return example2_exponent(grid)
    if kind == 'constant':
        try:
            return constant_exponent(grid, float(rest))
        except ValueError:
            raise UnknownDatum('constant exponent needs a number, got {!r}'.format(text))
    raise UnknownDatum('unknown exponent {!r}'.format(text))
