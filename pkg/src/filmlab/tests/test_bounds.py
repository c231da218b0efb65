import math

import numpy as np
import pytest

from filmlab.bounds import (TheoremConstants, blowup_upper_bound_T, blowup_upper_bound_high_energy, decay_envelope,
                            decay_rate_delta1, high_energy_threshold, lifespan_exponent, lifespan_integral,
                            lifespan_lower_bound, theorem_constants)
from filmlab.grid import constant_exponent
from filmlab.schedule import Exponential
from filmlab.spectral import b2_sq
from filmlab.util import HypothesisNotSatisfied, MissingConstant


def constants(p_minus=3.0, p_plus=None, B2_sq=1.0, **extra):
    return TheoremConstants(p_minus=p_minus, p_plus=p_minus if p_plus is None else p_plus, omega_measure=100.0,
                            lambda1=0.2, B2_sq=B2_sq, k0=1.0, **extra)


def test_theorem_constants_from_problem(grid):
    c = theorem_constants(grid, constant_exponent(grid, 3.0), Exponential(10, 1), -0.95, 0.9, S_p=2.0)
    assert c.omega_measure == 100.0
    assert c.k0 == 10.0
    assert c.B2_sq == b2_sq(grid, -0.95, 0.9)
    assert c.S_p == 2.0
    assert c.kappa_star is None


def test_high_energy_arithmetic():
    result = blowup_upper_bound_high_energy(constants(), 0.5, 6.0)
    assert result.threshold == pytest.approx(1.0)
    assert result.T_upper == pytest.approx(32.0)


def test_high_energy_small_energy_limit():
    result = blowup_upper_bound_high_energy(constants(), 1e-12, 6.0)
    # 8 (p- - 1) / ((p- - 2)^3 B2^2)
    assert result.T_upper == pytest.approx(16.0, rel=1e-9)


def test_high_energy_threshold_limit():
    c = constants()
    below = blowup_upper_bound_high_energy(c, 1 - 1e-9, 6.0).T_upper
    assert below > 1e9
    with pytest.raises(HypothesisNotSatisfied, match='blow-up hypothesis not satisfied'):
        blowup_upper_bound_high_energy(c, 1.0, 6.0)
    with pytest.raises(HypothesisNotSatisfied):
        blowup_upper_bound_high_energy(c, -0.1, 6.0)
    assert high_energy_threshold(c, 6.0) == pytest.approx(1.0)


def test_low_energy_negative_data():
    result = blowup_upper_bound_T(constants(), -1.0, 2.0)
    assert result.C0 == pytest.approx(1 / 3)
    assert result.T_upper > 0 and math.isfinite(result.T_upper)
    assert result.T_upper == pytest.approx(2 / (result.C3 * 1.0) * 2.0 ** -0.5)


def test_low_energy_consistent_exponent():
    displayed = blowup_upper_bound_T(constants(p_minus=4.0), -1.0, 2.0)
    consistent = blowup_upper_bound_T(constants(p_minus=4.0), -1.0, 2.0, consistent_c3=True)
    assert displayed.C1 == consistent.C1
    assert consistent.C3 == pytest.approx(displayed.C3 ** 4)


def test_low_energy_depth_limit():
    c = constants()
    near = blowup_upper_bound_T(c, 1 - 1e-6, 2.0, d_lower=1.0)
    far = blowup_upper_bound_T(c, 0.5, 2.0, d_lower=1.0)
    assert near.C0 == pytest.approx(1e-6 / 3)
    assert near.T_upper > far.T_upper
    with pytest.raises(HypothesisNotSatisfied):
        blowup_upper_bound_T(c, 1.5, 2.0, d_lower=1.0)


@pytest.mark.parametrize('kwargs', [
    dict(J0=0.5, F10=2.0),
    dict(J0=-1.0, F10=0.0),
    dict(J0=-1.0, F10=2.0, d_lower=-1.0),
])
def test_low_energy_hypotheses(kwargs):
    with pytest.raises(HypothesisNotSatisfied):
        blowup_upper_bound_T(constants(), **kwargs)


def test_exponent_below_two_rejected():
    with pytest.raises(HypothesisNotSatisfied):
        blowup_upper_bound_T(constants(p_minus=2.0), -1.0, 1.0)


def test_lifespan_needs_constants():
    with pytest.raises(MissingConstant) as e:
        lifespan_lower_bound(constants(p_minus=2.5, C3_tilde=1.0), 2, 1.0)
    assert e.value.names == ('C4_tilde', 'kappa_star')


def test_lifespan_constant_exponent_closed_form():
    c = constants(p_minus=2.5, C3_tilde=1.0, C4_tilde=2.0, kappa_star=0.5)
    result = lifespan_lower_bound(c, 2, 3.0)
    assert result.r_plus == result.r_minus == pytest.approx(2.0)
    assert result.T_lower == pytest.approx(3.0 ** -1 / (result.C4 + result.C5), rel=1e-8)


def test_lifespan_ceiling():
    c = constants(p_minus=2.5, p_plus=3.2, C3_tilde=1.0, C4_tilde=1.0, kappa_star=1.0)
    with pytest.raises(HypothesisNotSatisfied):
        lifespan_lower_bound(c, 2, 1.0)


def test_lifespan_integral_two_powers():
    # int_1^inf dy / (y^3 + y^2) = 1 - ln 2
    assert lifespan_integral(1.0, 1.0, 1.0, 3.0, 2.0) == pytest.approx(1 - math.log(2), rel=1e-8)


def test_lifespan_integral_nearly_equal_powers():
    # the dominance point lies far beyond any float; the integrand has long decayed by then
    assert lifespan_integral(1.0, 1.0, 1.0, 2.0 + 1e-9, 2.0) == pytest.approx(0.5, rel=1e-7)
    assert lifespan_integral(2.0, 1.0, 3.0, 1.5 + 1e-6, 1.5) == pytest.approx(2.0 ** -0.5 / (4 * 0.5), rel=1e-5)


def test_lifespan_integral_rejects_bad_input():
    with pytest.raises(ValueError):
        lifespan_integral(0.0, 1.0, 1.0, 3.0, 2.0)


def test_lifespan_exponent():
    assert lifespan_exponent(2, 2.5) == pytest.approx(2.0)
    assert lifespan_exponent(2, 2.8) > 1


def test_decay_rate_arithmetic():
    rate = decay_rate_delta1(constants(), 1.0, 16.0)
    assert rate.delta0 == pytest.approx(0.25)
    assert rate.delta1 == pytest.approx(0.15)


def test_decay_rate_limits():
    c = constants()
    assert decay_rate_delta1(c, 1e-12, 1.0).delta1 == pytest.approx(1 / 6, rel=1e-5)
    assert decay_rate_delta1(c, 1 - 1e-12, 1.0).delta1 == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(HypothesisNotSatisfied):
        decay_rate_delta1(c, 2.0, 1.0)


def test_decay_envelope():
    rate = decay_rate_delta1(constants(), 1.0, 16.0)
    norm, energy = decay_envelope(rate, 1.0, [0.0, 10.0])
    assert norm[0] == pytest.approx(rate.envelope)
    assert energy[0] == pytest.approx(math.e)
    assert norm[1] == pytest.approx(rate.envelope * np.exp(-1.5))


def random_admissible(case):
    """Scalar inputs for every bound in two space dimensions (p+ < 3)."""
    rng = np.random.default_rng(900 + case)
    p_minus = rng.uniform(2.05, 2.9)
    p_plus = rng.uniform(p_minus, 2.95)
    scale = lambda: 10.0 ** rng.uniform(-1, 1)  # noqa: E731
    c = TheoremConstants(p_minus=p_minus, p_plus=p_plus, omega_measure=scale(), lambda1=scale(), B2_sq=scale(),
                         k0=scale(), C3_tilde=scale(), C4_tilde=scale(), kappa_star=scale())
    return c, rng


@pytest.mark.parametrize('case', range(20))
def test_low_energy_constants_transcribed(case):
    c, rng = random_admissible(case)
    F10, d = 10.0 ** rng.uniform(-1, 1), 10.0 ** rng.uniform(-1, 1)
    J0 = d * rng.uniform(-2, 0.95)
    pm, pp, om = c.p_minus, c.p_plus, c.omega_measure

    C0 = c.k0 * (pm - 2) / pm * (1 - J0 / d)
    C1 = c.lambda1 * min(C0 ** (2 / pp) * om ** ((2 - pp) / pp), C0 ** (2 / pm) * om ** ((2 - pm) / pm))
    norm2_sq = 2 * F10
    C2 = min((C1 / 2 * norm2_sq) ** (pp / 2), (C1 / 2 * norm2_sq) ** (pm / 2))
    C3 = (C1 / (1 + C2 ** (2 / pp - 2 / pm))) ** (2 / pm)
    T = 2 / (C3 * (pm - 2)) * (norm2_sq / 2) ** (1 - pm / 2)

    result = blowup_upper_bound_T(c, J0, F10, d)
    assert tuple(result) == pytest.approx((T, C0, C1, C2, C3), rel=1e-12)


@pytest.mark.parametrize('case', range(20))
def test_high_energy_bound_transcribed(case):
    c, rng = random_admissible(case)
    norm2_sq = 10.0 ** rng.uniform(-1, 1)
    pm, B = c.p_minus, c.B2_sq
    threshold = (pm - 2) / (2 * pm) * B * norm2_sq
    J0 = threshold * rng.uniform(0.01, 0.99)
    T = 8 * (pm - 1) * norm2_sq / ((pm - 2) ** 2 * ((pm - 2) * B * norm2_sq - 2 * pm * J0))

    result = blowup_upper_bound_high_energy(c, J0, norm2_sq)
    assert result.threshold == pytest.approx(threshold, rel=1e-12)
    assert result.T_upper == pytest.approx(T, rel=1e-12)


@pytest.mark.parametrize('case', range(20))
def test_lifespan_constants_transcribed(case):
    c, rng = random_admissible(case)
    N = 2
    expected = {}
    for name, q, gn in (('plus', c.p_plus, c.C3_tilde), ('minus', c.p_minus, c.C4_tilde)):
        theta_q = ((N + 2) * q - 2 * N) / 4
        theta = theta_q / q
        expected['r_' + name] = (1 - theta) * q / (2 - theta_q)
        expected['C_' + name] = (2 ** (q / 2) * c.kappa_star * gn) ** (1 / (2 - theta_q))

    result = lifespan_lower_bound(c, N, 10.0 ** rng.uniform(-1, 1))
    assert result.r_plus == pytest.approx(expected['r_plus'], rel=1e-12)
    assert result.r_minus == pytest.approx(expected['r_minus'], rel=1e-12)
    assert result.C4 == pytest.approx(expected['C_plus'], rel=1e-12)
    assert result.C5 == pytest.approx(expected['C_minus'], rel=1e-12)


@pytest.mark.parametrize('case', range(20))
def test_decay_rate_transcribed(case):
    c, rng = random_admissible(case)
    d = 10.0 ** rng.uniform(-1, 1)
    J0 = d * rng.uniform(0.01, 0.99)
    pm, pp = c.p_minus, c.p_plus
    delta0 = (J0 / d) ** ((pm - 2) / 2)
    delta1 = c.B2_sq * pp * (pm - 2) * (1 - delta0) / (2 * pm * (pp - 2 * delta0))

    result = decay_rate_delta1(c, J0, d)
    assert result.delta0 == pytest.approx(delta0, rel=1e-12)
    assert result.delta1 == pytest.approx(delta1, rel=1e-12)
