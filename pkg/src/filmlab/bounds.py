"""Closed-form lifespan and decay estimates evaluated from scalar constants."""
from __future__ import annotations
from typing import NamedTuple, Optional

import logging
import math

import numpy as np
from scipy import integrate

from filmlab.grid import ExponentField, Grid2D
from filmlab.schedule import CoefficientSchedule
from filmlab.spectral import b2_sq, principal_eigenvalue
from filmlab.util import HypothesisNotSatisfied, LabError, MissingConstant

logger = logging.getLogger(__name__)

TAIL_DOMINANCE = 1e6
TAIL_DECAYS = 60.0


class TheoremConstants(NamedTuple):
    p_minus: float
    p_plus: float
    omega_measure: float
    lambda1: float
    B2_sq: float
    k0: float
    S_p: Optional[float] = None
    C3_tilde: Optional[float] = None
    C4_tilde: Optional[float] = None
    kappa_star: Optional[float] = None


def theorem_constants(grid: Grid2D, p: ExponentField, k: CoefficientSchedule, alpha: float, s: float,
                      **supplied) -> TheoremConstants:
    return TheoremConstants(p_minus=p.p_minus,
                            p_plus=p.p_plus,
                            omega_measure=grid.area,
                            lambda1=principal_eigenvalue(grid),
                            B2_sq=b2_sq(grid, alpha, s),
                            k0=k(0.0),
                            **supplied)


def _require_p_minus(c: TheoremConstants, bound: str):
    if not c.p_minus > 2 or c.p_plus < c.p_minus:
        raise HypothesisNotSatisfied(bound, 'need 2 < p- <= p+, got p- = {}, p+ = {}'.format(c.p_minus, c.p_plus))


class LowEnergyBlowup(NamedTuple):
    T_upper: float
    C0: float
    C1: float
    C2: float
    C3: float


def blowup_upper_bound_T(c: TheoremConstants, J0: float, F10: float, d_lower: Optional[float] = None,
                         consistent_c3: bool = False) -> LowEnergyBlowup:
    """
    Upper bound on the blow-up time when J(u0; 0) lies below the well depth and I(u0; 0) < 0.

    C3 takes the exponent 2/p- as displayed by the proof; consistent_c3 uses p-/2,
    under which F1' >= C3 F1^(p-/2) actually follows.
    """
    bound = 'low-energy blow-up'
    _require_p_minus(c, bound)
    if not F10 > 0:
        raise HypothesisNotSatisfied(bound, 'F1(0) = {} must be positive'.format(F10))
    pm, pp = c.p_minus, c.p_plus
    if d_lower is not None and d_lower < 0:
        raise HypothesisNotSatisfied(bound, 'well depth {} must not be negative'.format(d_lower))
    if d_lower:
        if not J0 < d_lower:
            raise HypothesisNotSatisfied(bound, 'J0 = {} is not below d = {}'.format(J0, d_lower))
        C0 = c.k0 * (pm - 2) / pm * (1 - J0 / d_lower)
    else:
        if not J0 < 0:
            raise HypothesisNotSatisfied(bound, 'J0 = {} is not negative'.format(J0))
        C0 = c.k0 * (pm - 2) / pm
    omega = c.omega_measure
    C1 = c.lambda1 * min(C0 ** (2 / pp) * omega ** ((2 - pp) / pp),
                         C0 ** (2 / pm) * omega ** ((2 - pm) / pm))
    C2 = min((C1 * F10) ** (pp / 2), (C1 * F10) ** (pm / 2))
    exponent = pm / 2 if consistent_c3 else 2 / pm
    C3 = (C1 / (1 + C2 ** (2 / pp - 2 / pm))) ** exponent
    T = 2 / (C3 * (pm - 2)) * F10 ** (1 - pm / 2)
    return LowEnergyBlowup(T, C0, C1, C2, C3)


class HighEnergyBlowup(NamedTuple):
    T_upper: float
    threshold: float
    eta: float
    sigma: float


def high_energy_threshold(c: TheoremConstants, u0_norm2_sq: float) -> float:
    """(p- - 2)/(2p-) B2^2 ||u0||^2: the energy below which large data still blow up."""
    return (c.p_minus - 2) / (2 * c.p_minus) * c.B2_sq * u0_norm2_sq


def blowup_upper_bound_high_energy(c: TheoremConstants, J0: float, u0_norm2_sq: float) -> HighEnergyBlowup:
    bound = 'high-energy blow-up'
    _require_p_minus(c, bound)
    pm = c.p_minus
    threshold = high_energy_threshold(c, u0_norm2_sq)
    if not 0 < J0 < threshold:
        raise HypothesisNotSatisfied(bound, 'need 0 < J0 < {:.6g}, got J0 = {}'.format(threshold, J0))
    eta = pm / (pm - 1) * (threshold - J0)
    sigma = 2 * u0_norm2_sq / ((pm - 2) * eta)
    T = 8 * (pm - 1) * u0_norm2_sq / ((pm - 2) ** 2 * ((pm - 2) * c.B2_sq * u0_norm2_sq - 2 * pm * J0))
    return HighEnergyBlowup(T, threshold, eta, sigma)


class LifespanLowerBound(NamedTuple):
    T_lower: float
    r_plus: float
    r_minus: float
    C4: float
    C5: float
    theta_p_plus: float


def lifespan_exponent(N: int, q: float) -> float:
    return (2 * N - (N - 2) * q) / (2 * N + 8 - (N + 2) * q)


def lifespan_integral_closed_form(a: float, C: float, r: float) -> float:
    """int_a^inf dy / (C y^r) for r > 1."""
    return a ** (1 - r) / (C * (r - 1))


def lifespan_integral(a: float, C4: float, C5: float, r_plus: float, r_minus: float) -> float:
    """
    int_a^inf dy / (C4 y^r+ + C5 y^r-).

    Adaptive quadrature in log y up to the point where C4 y^r+ dominates
    C5 y^r- by TAIL_DOMINANCE, then the antiderivative of the dominant term
    with its first-order correction. When the two powers are too close for
    that point to be reached before the integrand has decayed, the quadrature
    stops where the remainder is negligible.
    """
    if not (a > 0 and C4 > 0 and C5 > 0):
        raise ValueError('lifespan integral needs a, C4, C5 > 0; got {}, {}, {}'.format(a, C4, C5))
    if not r_plus > 1 or r_minus > r_plus:
        raise LabError('internal: lifespan exponents r+ = {}, r- = {} out of range'.format(r_plus, r_minus))

    log_a = math.log(a)
    gap = r_plus - r_minus
    # beyond this log y the integrand is below e^-TAIL_DECAYS of its value at a
    log_negligible = log_a + TAIL_DECAYS / (r_minus - 1)
    if gap > 0:
        log_switch = max(log_a, math.log(TAIL_DOMINANCE * C5 / C4) / gap)
        if log_switch < log_negligible:
            tail = (math.exp((1 - r_plus) * log_switch) / (C4 * (r_plus - 1))
                    - C5 / C4 ** 2 * math.exp((1 + r_minus - 2 * r_plus) * log_switch) / (2 * r_plus - r_minus - 1))
        else:
            log_switch, tail = log_negligible, 0.0
    else:
        log_switch = log_a + math.log(1e3)
        tail = lifespan_integral_closed_form(math.exp(log_switch), C4 + C5, r_plus)

    def integrand(z):
        # y / (C4 y^r+ + C5 y^r-) with y = e^z, written so that large z underflows instead of overflowing
        with np.errstate(over='ignore'):
            return float(np.exp((1 - r_minus) * z) / (C4 * np.exp(gap * z) + C5))

    head = 0.0
    if log_switch > log_a:
        head, error = integrate.quad(integrand, log_a, log_switch, epsabs=0.0, epsrel=1e-11, limit=400)
        logger.debug('lifespan head %.12g (+- %.2g), tail %.12g from log y = %.6g', head, error, tail, log_switch)
    return head + tail


def lifespan_lower_bound(c: TheoremConstants, N_dim: int, F10: float) -> LifespanLowerBound:
    bound = 'lifespan lower bound'
    missing = [name for name in ('C3_tilde', 'C4_tilde', 'kappa_star') if getattr(c, name) is None]
    if missing:
        raise MissingConstant(missing)
    _require_p_minus(c, bound)
    N = int(N_dim)
    ceiling = 2 * (N + 4) / (N + 2)
    if not c.p_plus < ceiling:
        raise HypothesisNotSatisfied(bound, 'need p+ < 2(N+4)/(N+2) = {:.6g}, got {}'.format(ceiling, c.p_plus))
    if not F10 > 0:
        raise HypothesisNotSatisfied(bound, 'F1(0) = {} must be positive'.format(F10))
    pm, pp = c.p_minus, c.p_plus
    C4 = (2 ** (pp / 2) * c.kappa_star * c.C3_tilde) ** (4 / (2 * N + 8 - (N + 2) * pp))
    C5 = (2 ** (pm / 2) * c.kappa_star * c.C4_tilde) ** (4 / (2 * N + 8 - (N + 2) * pm))
    r_plus, r_minus = lifespan_exponent(N, pp), lifespan_exponent(N, pm)
    T = lifespan_integral(F10, C4, C5, r_plus, r_minus)
    return LifespanLowerBound(T, r_plus, r_minus, C4, C5, ((N + 2) * pp - 2 * N) / 4)


class DecayRate(NamedTuple):
    delta0: float
    delta1: float
    envelope: float


def decay_rate_delta1(c: TheoremConstants, J0: float, d_lower: float) -> DecayRate:
    """
    Exponential decay rate for data inside the stable set.

    envelope is (2e p- d / (p- - 2))^(1/2), so that
    ||u(t)||_(alpha) <= envelope * exp(-delta1 t).
    """
    bound = 'decay rate'
    _require_p_minus(c, bound)
    if not 0 < J0 < d_lower:
        raise HypothesisNotSatisfied(bound, 'need 0 < J0 < d, got J0 = {}, d = {}'.format(J0, d_lower))
    pm, pp = c.p_minus, c.p_plus
    delta0 = (J0 / d_lower) ** ((pm - 2) / 2)
    delta1 = c.B2_sq * pp * (pm - 2) * (1 - delta0) / (2 * pm * (pp - 2 * delta0))
    envelope = math.sqrt(2 * math.e * pm * d_lower / (pm - 2))
    return DecayRate(delta0, delta1, envelope)


def decay_envelope(rate: DecayRate, J0: float, t):
    """(norm envelope, energy envelope) at time(s) t; energy follows J(t) <= J0 e^(1 - 2 delta1 t)."""
    t = np.asarray(t, dtype=np.float64)
    return rate.envelope * np.exp(-rate.delta1 * t), J0 * np.exp(1 - 2 * rate.delta1 * t)
