"""
Sine-basis machinery for the mixed operator A = (-Delta)^2 + alpha (-Delta)^(2s) - Delta.

Coefficients follow the unnormalized convention

    v(m, l) = sum_ij u_ij sin(pi m i / (Nx+1)) sin(pi l j / (Ny+1)),

with mode (m, l), m = 1..Nx, stored at index [m - 1, l - 1]. The inverse
carries the factor 4 / ((Nx+1)(Ny+1)). scipy's DST-I is twice this sum per
axis, hence the division by 4 in dst_forward.
"""
from __future__ import annotations
from functools import lru_cache
from typing import NamedTuple

import logging
import math

import numpy as np
from scipy import fft

from filmlab import monitoring as mon
from filmlab.grid import Field, Grid2D, field_from_array
from filmlab.util import IndefiniteDenominator, InvalidGrid

logger = logging.getLogger(__name__)


class SpectralField(NamedTuple):
    grid: Grid2D
    coefficients: np.ndarray


@lru_cache(maxsize=16)
def mode_lambdas(grid: Grid2D) -> np.ndarray:
    """lambda = w1^2 + w2^2 with w1 = pi m / Lx, w2 = pi l / Ly."""
    w1 = np.pi * np.arange(1, grid.Nx + 1) / grid.Lx
    w2 = np.pi * np.arange(1, grid.Ny + 1) / grid.Ly
    lam = w1[:, None] ** 2 + w2[None, :] ** 2
    lam.setflags(write=False)
    return lam


def principal_eigenvalue(grid: Grid2D) -> float:
    return (math.pi / grid.Lx) ** 2 + (math.pi / grid.Ly) ** 2


def parseval_weight(grid: Grid2D) -> float:
    """quadrature(u^2) == parseval_weight * sum(coefficients^2)."""
    return grid.cell * 4.0 / ((grid.Nx + 1) * (grid.Ny + 1))


@mon.time(mon.TRANSFORM_TIME)
def dst_forward(u: Field) -> SpectralField:
    return SpectralField(u.grid, fft.dstn(u.values, type=1) / 4.0)


@mon.time(mon.TRANSFORM_TIME)
def dst_inverse(v: SpectralField) -> Field:
    g = v.grid
    return field_from_array(g, fft.dstn(v.coefficients, type=1) / ((g.Nx + 1) * (g.Ny + 1)))


@lru_cache(maxsize=4)
def direct_sine_matrices(grid: Grid2D):
    """S[m-1, i-1] = sin(pi m i / (N+1)) for both axes; the defining double sum in matrix form."""
    def matrix(n):
        k = np.arange(1, n + 1)
        return np.sin(np.pi * np.outer(k, k) / (n + 1))
    return matrix(grid.Nx), matrix(grid.Ny)


def dst_forward_direct(u: Field) -> SpectralField:
    sx, sy = direct_sine_matrices(u.grid)
    return SpectralField(u.grid, sx @ u.values @ sy.T)


def dst_inverse_direct(v: SpectralField) -> Field:
    g = v.grid
    sx, sy = direct_sine_matrices(g)
    return field_from_array(g, 4.0 / ((g.Nx + 1) * (g.Ny + 1)) * (sx.T @ v.coefficients @ sy))


def apply_fractional_laplacian(u: Field, r: float) -> Field:
    """(-Delta)^r u through the symbol lambda^r; r = 1 is the spectral -Delta."""
    if r < 0:
        raise ValueError('fractional order must be non-negative, got {}'.format(r))
    if r == 0:
        return u
    v = dst_forward(u)
    return dst_inverse(v._replace(coefficients=mode_lambdas(u.grid) ** r * v.coefficients))


class SymbolTable(NamedTuple):
    grid: Grid2D
    dt: float
    alpha: float
    s: float
    lam: np.ndarray
    lam_sq: np.ndarray
    lam_s: np.ndarray
    lam_2s: np.ndarray
    denominator: np.ndarray
    verbatim_denominator: bool = False
    implicit_source: float = 0.0


def operator_symbol(grid: Grid2D, alpha: float, s: float) -> np.ndarray:
    """lambda^2 + alpha lambda^(2s) + lambda for every mode."""
    lam = mode_lambdas(grid)
    return lam * lam + alpha * lam ** (2 * s) + lam


def build_symbols(grid: Grid2D, dt: float, alpha: float, s: float,
                  verbatim_denominator: bool = False, implicit_source: float = 0.0) -> SymbolTable:
    """
    Denominator D = 1 + dt (lambda^2 + alpha lambda^(2s) + lambda) - dt * implicit_source.

    verbatim_denominator drops alpha from the lambda^(2s) term.
    """
    if not dt > 0:
        raise ValueError('dt must be positive, got {}'.format(dt))
    lam = mode_lambdas(grid)
    lam_sq = lam * lam
    lam_s = lam ** s
    lam_2s = lam ** (2 * s)
    weight = 1.0 if verbatim_denominator else alpha
    denominator = 1.0 + dt * (lam_sq + weight * lam_2s + lam) - dt * implicit_source
    worst = float(denominator.min())
    if not worst > 0:
        raise IndefiniteDenominator(worst)
    for a in (lam_s, lam_2s, lam_sq, denominator):
        a.setflags(write=False)
    return SymbolTable(grid, float(dt), float(alpha), float(s), lam, lam_sq, lam_s, lam_2s,
                       denominator, bool(verbatim_denominator), float(implicit_source))


def solve_semi_implicit(rhs: Field, symbols: SymbolTable) -> Field:
    if rhs.grid != symbols.grid:
        raise InvalidGrid('right-hand side grid {} differs from symbol grid {}'.format(rhs.grid, symbols.grid))
    v = dst_forward(rhs)
    return dst_inverse(v._replace(coefficients=v.coefficients / symbols.denominator))


def b2_sq(grid: Grid2D, alpha: float, s: float) -> float:
    """Smallest Rayleigh quotient ||v||_(alpha)^2 / ||v||_2^2 over discrete fields."""
    return float(operator_symbol(grid, alpha, s).min())


def h2_admissible(grid: Grid2D, alpha: float, s: float) -> bool:
    """Whether alpha lies in one of the ranges that keep ||.||_(alpha) a norm."""
    if alpha >= 0:
        return True
    if not 0 < s < 1:
        return False
    lam1 = principal_eigenvalue(grid)
    if alpha > -lam1 ** (1 - s) * (1 - s) ** (1 - s) * s ** (-s):
        return True
    if 0.5 < s < 1 and alpha > -(2 - 2 * s) ** (2 * s - 2) * (2 * s - 1) ** (1 - 2 * s):
        return True
    return False
