"""
Image pipelines on the pixel grid.

A w x h image becomes a Field on a grid with Lx = w + 1, Ly = h + 1 and
Nx = w, Ny = h, so dx = dy = 1 and the zero Dirichlet frame is the ghost
layer around the picture.
"""
from __future__ import annotations
from typing import NamedTuple, Tuple

import logging

import numpy as np

from filmlab import monitoring as mon
from filmlab.evolve import BLEW_UP, SimulationOutcome, make_config, run, symbols_for, write_outcome
from filmlab.grid import (ExponentField, Field, Grid2D, field_from_array, gradient_magnitude_sq,
                          laplacian_5pt, make_exponent, make_grid)
from filmlab.imaging.codec import ImageGray, make_image
from filmlab.nonlinear import backward_fraction
from filmlab.schedule import CoefficientSchedule, PowerOfBase
from filmlab.spectral import dst_forward, dst_inverse, mode_lambdas
from filmlab.util import DegenerateImage, FilterDiverged, SharpeningDiverged

logger = logging.getLogger(__name__)

MIN_SIDE = 4
DIVERGENCE_THRESHOLD = 1e8


class SharpenRecipe(NamedTuple):
    dt: float = 5e-4
    alpha: float = -0.75
    s: float = 0.9
    k: CoefficientSchedule = PowerOfBase(0.1, 5.0, 9.0)
    t_stop: float = 0.025
    p_cap: float = 3.5
    p_base: float = 3.0
    p_gain: float = 0.1
    p_power: float = 0.25
    # the evolution runs on u = intensity_scale * intensity
    intensity_scale: float = 255.0
    blowup_threshold: float = DIVERGENCE_THRESHOLD


def image_to_field(img: ImageGray, scale: float = 1.0) -> Tuple[Field, Grid2D]:
    if img.width < MIN_SIDE or img.height < MIN_SIDE:
        raise DegenerateImage('image must be at least {0}x{0} pixels, got {1}x{2}'.format(
            MIN_SIDE, img.width, img.height))
    grid = make_grid(img.width + 1, img.height + 1, img.width, img.height)
    return field_from_array(grid, scale * img.intensities.T), grid


def field_to_image(u: Field, scale: float = 1.0) -> ImageGray:
    if u.diverged:
        raise DegenerateImage('cannot render a diverged field')
    return make_image(u.values.T / scale, clamp=True)


def build_exponent_from_image(u0: Field, recipe: SharpenRecipe = SharpenRecipe()) -> ExponentField:
    """p = min(cap, base + gain |grad u0|^power) at every node, frozen for the whole evolution."""
    g = np.sqrt(gradient_magnitude_sq(u0))
    p = np.minimum(recipe.p_cap, recipe.p_base + recipe.p_gain * g ** recipe.p_power)
    return make_exponent(u0.grid, p)


class ImageRun(NamedTuple):
    image: ImageGray
    outcome: SimulationOutcome
    exponent: ExponentField
    backward_share: float


def evolve_image(img: ImageGray, recipe: SharpenRecipe, lambda_source: float = 0.0,
                 diagnostics_dir=None) -> ImageRun:
    """Run the thin-film flow on an image and convert the final state back, clamped."""
    if lambda_source < 0:
        raise ValueError('lambda must not be negative, got {}'.format(lambda_source))
    u0, grid = image_to_field(img, recipe.intensity_scale)
    p = build_exponent_from_image(u0, recipe)
    cfg = make_config(grid, p, recipe.k, recipe.alpha, recipe.s, recipe.dt, recipe.t_stop,
                      lambda_source=lambda_source, blowup_threshold=recipe.blowup_threshold)
    symbols_for(cfg)
    share = backward_fraction(u0, p, recipe.k(0.0))
    logger.info('evolving %dx%d image to t=%g (lambda=%g, p in [%.4g, %.4g], %.1f%% nodes backward)',
                img.width, img.height, recipe.t_stop, lambda_source, p.p_minus, p.p_plus, 100 * share)
    outcome = run(u0, cfg)
    if diagnostics_dir is not None:
        write_outcome(outcome, diagnostics_dir)
    if outcome.status == BLEW_UP:
        raise SharpeningDiverged(outcome.blowup_time_estimate)
    return ImageRun(field_to_image(outcome.final, recipe.intensity_scale), outcome, p, share)


def sharpen(img: ImageGray, recipe: SharpenRecipe = SharpenRecipe(), diagnostics_dir=None) -> ImageGray:
    mon.FILTER_RUNS.labels('sharpen').inc()
    return evolve_image(img, recipe, 0.0, diagnostics_dir).image


def enhance_contrast(img: ImageGray, recipe: SharpenRecipe = SharpenRecipe(), lam: float = 10.0,
                     diagnostics_dir=None) -> ImageGray:
    mon.FILTER_RUNS.labels('enhance').inc()
    return evolve_image(img, recipe, lam, diagnostics_dir).image


def _check(u: np.ndarray, name: str, t: float, threshold: float):
    if not np.isfinite(u).all() or np.abs(u).max() > threshold:
        logger.warning('%s diverged at t=%g', name, t)
        raise FilterDiverged(name, t)


def backward_diffusion_factor(lam, epsilon: float, dt: float):
    """Per-step amplification (1 + dt lam) / (1 + dt epsilon lam^2) of one sine mode."""
    return (1 + dt * lam) / (1 + dt * epsilon * lam * lam)


def linear_backward_diffusion_field(u0: Field, epsilon: float = 1e-3, dt: float = 5e-4, t_stop: float = 0.2,
                                    threshold: float = DIVERGENCE_THRESHOLD) -> Field:
    """u_t + epsilon Delta^2 u = -Delta u, fourth-order term implicit, antidiffusion explicit."""
    if not epsilon > 0:
        raise ValueError('epsilon must be positive, got {}'.format(epsilon))
    if not dt > 0:
        raise ValueError('dt must be positive, got {}'.format(dt))
    factor = backward_diffusion_factor(mode_lambdas(u0.grid), epsilon, dt)
    v = dst_forward(u0)
    coefficients = v.coefficients
    u = u0
    for n in range(int(round(t_stop / dt))):
        coefficients = coefficients * factor
        u = dst_inverse(v._replace(coefficients=coefficients))
        _check(u.values, 'linear backward diffusion', (n + 1) * dt, threshold)
    return u


def linear_backward_diffusion(img: ImageGray, epsilon: float = 1e-3, dt: float = 5e-4,
                              t_stop: float = 0.2) -> ImageGray:
    mon.FILTER_RUNS.labels('backward').inc()
    u0, _ = image_to_field(img)
    return field_to_image(linear_backward_diffusion_field(u0, epsilon, dt, t_stop))


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def shock_speed_gradient(u: Field, scheme: str = 'upwind') -> np.ndarray:
    """|grad u| on the interior nodes, by minmod one-sided differences or central differences."""
    w = u.padded(1)
    dx, dy = u.grid.dx, u.grid.dy
    c = w[1:-1, 1:-1]
    if scheme == 'upwind':
        gx = _minmod((w[2:, 1:-1] - c) / dx, (c - w[:-2, 1:-1]) / dx)
        gy = _minmod((w[1:-1, 2:] - c) / dy, (c - w[1:-1, :-2]) / dy)
    elif scheme == 'central':
        gx = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2 * dx)
        gy = (w[1:-1, 2:] - w[1:-1, :-2]) / (2 * dy)
    else:
        raise ValueError('unknown shock scheme {!r}; use upwind or central'.format(scheme))
    return np.sqrt(gx * gx + gy * gy)


def shock_filter_field(u0: Field, dt: float = 0.05, t_stop: float = 0.5, scheme: str = 'upwind',
                       threshold: float = DIVERGENCE_THRESHOLD) -> Field:
    """Explicit Euler for u_t = -(|grad u| / (1 + |Delta u|)) Delta u."""
    if not dt > 0:
        raise ValueError('dt must be positive, got {}'.format(dt))
    if scheme == 'upwind' and dt > 0.5 * min(u0.grid.dx, u0.grid.dy):
        logger.warning('shock filter dt=%g exceeds the upwind stability limit', dt)
    u = u0
    for n in range(int(round(t_stop / dt))):
        lap = laplacian_5pt(u)
        speed = shock_speed_gradient(u, scheme) / (1 + np.abs(lap))
        values = u.values - dt * speed * lap
        _check(values, 'shock filter', (n + 1) * dt, threshold)
        u = field_from_array(u.grid, values)
    return u


def shock_filter(img: ImageGray, dt: float = 0.05, t_stop: float = 0.5, scheme: str = 'upwind',
                 scale: float = 255.0) -> ImageGray:
    mon.FILTER_RUNS.labels('shock').inc()
    u0, _ = image_to_field(img, scale)
    return field_to_image(shock_filter_field(u0, dt, t_stop, scheme), scale)
