"""
Discrete potential-well quantities.

For a field u at time t, with A = ||u||_(alpha)^2 computed in the sine basis:

    J(u; t) = A / 2 - k(t) * int (1/p) |grad u|^p
    I(u; t) = A     - k(t) * int |grad u|^p

All integrals use the interior rectangle rule of filmlab.grid.quadrature;
|grad u| is the central-difference gradient of the time stepper.
"""
from __future__ import annotations
from typing import NamedTuple, Optional, Sequence

import logging
import math

import numpy as np
from scipy import optimize

from filmlab import monitoring as mon
from filmlab.grid import (ExponentField, Field, Grid2D, field_from_array, gradient_magnitude_sq,
                          interior, quadrature)
from filmlab.schedule import CoefficientSchedule
from filmlab.spectral import SpectralField, dst_forward, dst_inverse, mode_lambdas, parseval_weight
from filmlab.util import (EmptyTrialSet, HypothesisNotSatisfied, NehariResidual, NoSignChange, NonFiniteIntegrand,
                          ZeroField)

logger = logging.getLogger(__name__)

MU_BRACKET_SLACK = 1e-6
MU_RESIDUAL = 1e-8
MU_XTOL = 1e-300
MU_RTOL = 4 * np.finfo(float).eps
MU_ROUNDING = 64 * np.finfo(float).eps
LUXEMBURG_RTOL = 1e-12


class FunctionalReport(NamedTuple):
    t: float
    J: float
    I: float
    norm_alpha_sq: float
    F1: float
    modular: float
    weighted_modular: float
    umax: float


REPORT_HEADER = FunctionalReport._fields


def norm_alpha_sq(u: Field, alpha: float, s: float) -> float:
    """||grad u||^2 + ||Delta u||^2 + alpha ||(-Delta)^s u||^2, through Parseval."""
    coefficients = dst_forward(u).coefficients
    lam = mode_lambdas(u.grid)
    weight = lam + lam * lam + alpha * lam ** (2 * s)
    return float(parseval_weight(u.grid) * np.sum(weight * coefficients * coefficients))


def norm_l2_sq(u: Field) -> float:
    return quadrature(u.values * u.values, u.grid)


def modular(g: np.ndarray, p: ExponentField) -> float:
    """rho(g) = int g^p(x) over the interior nodes."""
    return quadrature(np.power(interior(np.asarray(g, dtype=np.float64), p.grid), p.interior), p.grid)


@mon.time(mon.REPORT_TIME)
def report(u: Field, t: float, p: ExponentField, k: CoefficientSchedule, alpha: float, s: float) -> FunctionalReport:
    A = norm_alpha_sq(u, alpha, s)
    powered = np.power(gradient_magnitude_sq(u), p.values / 2)
    plain = quadrature(powered, u.grid)
    weighted = quadrature(powered / p.values, u.grid)
    k_t = k(t)
    return FunctionalReport(t=float(t),
                            J=0.5 * A - k_t * weighted,
                            I=A - k_t * plain,
                            norm_alpha_sq=A,
                            F1=0.5 * norm_l2_sq(u),
                            modular=plain,
                            weighted_modular=weighted,
                            umax=u.umax)


def energy_J(u: Field, t: float, p: ExponentField, k: CoefficientSchedule, alpha: float, s: float) -> float:
    return report(u, t, p, k, alpha, s).J


def nehari_I(u: Field, t: float, p: ExponentField, k: CoefficientSchedule, alpha: float, s: float) -> float:
    return report(u, t, p, k, alpha, s).I


def _bisect(fn, lower, upper, quantity, xtol, rtol=1e-14):
    root, result = optimize.bisect(fn, lower, upper, xtol=xtol, rtol=rtol, maxiter=600, full_output=True)
    mon.BISECTION_ITERATIONS.labels(quantity).observe(result.iterations)
    return root


def luxemburg_norm(g: np.ndarray, p: ExponentField) -> float:
    """inf{lam > 0 : rho(g / lam) <= 1}; the root of rho(g / lam) = 1."""
    grid = p.grid
    g = interior(np.abs(np.asarray(g, dtype=np.float64)), grid)
    if not np.any(g):
        return 0.0
    exponent = p.interior
    lo_p, hi_p = float(exponent.min()), float(exponent.max())

    def excess(lam):
        return quadrature(np.power(g / lam, exponent), grid) - 1.0

    rho = excess(1.0) + 1.0
    # norm-modular chains: the norm lies between rho^(1/p+) and rho^(1/p-)
    candidates = (rho ** (1 / lo_p), rho ** (1 / hi_p))
    lower, upper = min(candidates) * (1 - 1e-6), max(candidates) * (1 + 1e-6)
    while excess(lower) < 0:
        lower /= 2
    while excess(upper) > 0:
        upper *= 2
    return float(_bisect(excess, lower, upper, 'luxemburg', xtol=LUXEMBURG_RTOL * lower))


class NehariScaling(NamedTuple):
    mu_star: float
    mu_hat1: float
    mu_hat2: float


def nehari_scale_mu_star(u: Field, t: float, p: ExponentField, k: CoefficientSchedule,
                         alpha: float, s: float) -> NehariScaling:
    """
    The scaling mu* > 0 with I(mu* u; t) = 0, bracketed by mu_hat1 <= mu* <= mu_hat2.

    h(mu) = I(mu u; t) = mu^2 A - k(t) int mu^p |grad u|^p is positive below
    mu_hat1 and negative above mu_hat2.
    """
    A = norm_alpha_sq(u, alpha, s)
    if u.is_zero() or A == 0:
        raise ZeroField()
    g2 = gradient_magnitude_sq(u)
    powered = interior(np.power(g2, p.values / 2), u.grid)
    exponent = p.interior
    k_t = k(t)

    def h(mu):
        return mu * mu * A - k_t * quadrature(np.power(mu, exponent) * powered, u.grid)

    p_lo, p_hi = float(exponent.min()), float(exponent.max())
    norm = luxemburg_norm(np.sqrt(g2), p)
    with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
        pair = [float(np.power(A / (k_t * norm ** q), 1 / (q - 2))) if k_t > 0 and norm > 0 else math.inf
                for q in (p_lo, p_hi)]
    mu_hat1, mu_hat2 = min(pair), max(pair)

    if all(math.isfinite(m) and m > 0 for m in pair):
        lower, upper = mu_hat1 * (1 - MU_BRACKET_SLACK), mu_hat2 * (1 + MU_BRACKET_SLACK)
        if not (h(lower) >= 0 >= h(upper)):
            raise NoSignChange(lower, upper)
    else:
        logger.warning('closed-form Nehari brackets overflow (p- = %.6g); searching geometrically', p_lo)
        lower, upper = _geometric_bracket(h)

    # the bracket may span tens of decades; rtol alone sets the stopping width
    mu = float(_bisect(h, lower, upper, 'nehari', xtol=MU_XTOL, rtol=MU_RTOL))
    residual = abs(h(mu))
    # h is a difference of two terms of size mu^2 A and cannot be resolved below their rounding
    tolerance = max(MU_RESIDUAL * A, MU_ROUNDING * mu * mu * A)
    if not residual <= tolerance:
        raise NehariResidual(mu, residual, tolerance)
    return NehariScaling(mu, mu_hat1, mu_hat2)


def _geometric_bracket(h, start=1.0, limit=2000):
    lower = upper = start
    for _ in range(limit):
        if h(lower) > 0:
            break
        lower /= 2
    else:
        raise NoSignChange(lower, start)
    for _ in range(limit):
        try:
            value = h(upper)
        except NonFiniteIntegrand:
            value = -math.inf
        if value < 0:
            break
        upper *= 2
    else:
        raise NoSignChange(start, upper)
    return lower, upper


def scale_field(u: Field, factor: float) -> Field:
    return field_from_array(u.grid, factor * u.values)


def well_depth_closed_form(p_minus: float, p_plus: float, k_t: float, S_p: float):
    """Lower and upper bounds for d(t) from the embedding constant S_p, as (lower, upper)."""
    pair = ((k_t * S_p ** p_minus) ** (2 / (2 - p_minus)),
            (k_t * S_p ** p_plus) ** (2 / (2 - p_plus)))
    return ((p_minus - 2) / (2 * p_minus) * min(pair),
            (p_plus - 2) / (2 * p_plus) * max(pair))


class DepthEstimate(NamedTuple):
    trial_bound: float
    closed_form_upper: Optional[float] = None
    closed_form_lower: Optional[float] = None


def well_depth_upper(t: float, trials: Sequence[Field], p: ExponentField, k: CoefficientSchedule,
                     alpha: float, s: float, S_p: Optional[float] = None) -> DepthEstimate:
    """min over trials v of J(mu*(v) v; t), an upper bound on d(t) for the discrete problem."""
    if not trials:
        raise EmptyTrialSet()
    best = math.inf
    for v in trials:
        mu = nehari_scale_mu_star(v, t, p, k, alpha, s).mu_star
        best = min(best, energy_J(scale_field(v, mu), t, p, k, alpha, s))
    if S_p is None:
        return DepthEstimate(best)
    lower, upper = well_depth_closed_form(p.p_minus, p.p_plus, k(t), S_p)
    return DepthEstimate(best, upper, lower)


def unstable_depth_bound(u: Field, t: float, p: ExponentField, k: CoefficientSchedule,
                         alpha: float, s: float) -> float:
    """For I(u; t) < 0: d(t) <= min{(p+ - 2)/(2p+) ||u||_(alpha)^2, k(t) int (p-2)/(2p) |grad u|^p}."""
    rep = report(u, t, p, k, alpha, s)
    if not rep.I < 0:
        raise HypothesisNotSatisfied('unstable depth bound', 'I(u;t) = {:.6g} is not negative'.format(rep.I))
    powered = np.power(gradient_magnitude_sq(u), p.values / 2)
    excess = k(t) * quadrature((p.values - 2) / (2 * p.values) * powered, u.grid)
    return min((p.p_plus - 2) / (2 * p.p_plus) * rep.norm_alpha_sq, excess)


HEURISTIC_LABEL = 'heuristic, not a certified bound'


class EmbeddingSample(NamedTuple):
    S_p: float
    trials: int
    label: str = HEURISTIC_LABEL


def random_smooth_field(grid: Grid2D, rng: np.random.Generator, modes: int = 6) -> Field:
    """Random combination of the lowest sine modes with 1/lambda decay."""
    coefficients = np.zeros(grid.shape)
    m, l = min(modes, grid.Nx), min(modes, grid.Ny)
    lam = mode_lambdas(grid)[:m, :l]
    coefficients[:m, :l] = rng.standard_normal((m, l)) / lam
    return dst_inverse(SpectralField(grid, coefficients))


def sample_embedding_constant(grid: Grid2D, p: ExponentField, alpha: float, s: float,
                              trials: int, rng: np.random.Generator) -> EmbeddingSample:
    """Largest ||grad v||_p(.) / ||v||_(alpha) seen over random smooth fields; a lower bound on S_p."""
    best = 0.0
    for _ in range(trials):
        v = random_smooth_field(grid, rng)
        A = norm_alpha_sq(v, alpha, s)
        if not A > 0:
            continue
        best = max(best, luxemburg_norm(np.sqrt(gradient_magnitude_sq(v)), p) / math.sqrt(A))
    return EmbeddingSample(best, trials)
