from __future__ import annotations

import logging

import numpy as np

from filmlab.grid import ExponentField, Field, field_from_array, gradient_magnitude_sq
from filmlab.util import DegenerateExponent, DivergedCoefficient

logger = logging.getLogger(__name__)


def coefficient_c(u: Field, p: ExponentField) -> np.ndarray:
    """c = (|grad u|^2)^(p/2 - 1) on all nodes; 0^q = 0 for q > 0, no floor."""
    with np.errstate(over='ignore', invalid='ignore'):
        return np.power(gradient_magnitude_sq(u), p.values / 2 - 1)


def divergence_with_coefficient(u: Field, c: np.ndarray) -> Field:
    """
    div(c grad u) with half-point averages c_{i+1/2} = (c_{i+1} + c_i) / 2.

    *c* is an all-node array; the result lives on the interior nodes.
    """
    if not np.isfinite(c).all():
        raise DivergedCoefficient()
    grid = u.grid
    w = u.padded(1)
    mid = w[1:-1, 1:-1]
    cc = c[1:-1, 1:-1]
    with np.errstate(over='ignore', invalid='ignore'):
        east, west = c[2:, 1:-1], c[:-2, 1:-1]
        x_term = ((east + cc) * w[2:, 1:-1] - (east + 2 * cc + west) * mid
                  + (cc + west) * w[:-2, 1:-1]) / (2 * grid.dx ** 2)
        north, south = c[1:-1, 2:], c[1:-1, :-2]
        y_term = ((north + cc) * w[1:-1, 2:] - (north + 2 * cc + south) * mid
                  + (cc + south) * w[1:-1, :-2]) / (2 * grid.dy ** 2)
    return field_from_array(grid, x_term + y_term)


def nonlinear_divergence(u: Field, p: ExponentField) -> Field:
    """B(u) = div(|grad u|^(p-2) grad u), discretized as above."""
    return divergence_with_coefficient(u, coefficient_c(u, p))


def threshold_map(k_t: float, p: ExponentField) -> np.ndarray:
    """Gradient magnitude k_t^(1/(2-p)) separating forward from backward diffusion."""
    if not k_t > 0:
        raise ValueError('threshold needs k(t) > 0, got {}'.format(k_t))
    if np.any(p.values == 2):
        raise DegenerateExponent()
    with np.errstate(over='ignore'):
        return np.power(k_t, 1.0 / (2.0 - p.values))


def effective_diffusion(u: Field, p: ExponentField, k_t: float) -> np.ndarray:
    """1 - k_t |grad u|^(p-2) on all nodes; negative where diffusion runs backward."""
    with np.errstate(over='ignore', invalid='ignore'):
        return 1.0 - k_t * np.power(gradient_magnitude_sq(u), (p.values - 2) / 2)


def backward_fraction(u: Field, p: ExponentField, k_t: float) -> float:
    return float(np.mean(effective_diffusion(u, p, k_t) < 0))
