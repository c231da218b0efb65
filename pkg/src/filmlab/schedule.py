from __future__ import annotations
from abc import ABC, abstractmethod
from typing import Sequence

import logging
import math

import numpy as np

from filmlab.util import InvalidSchedule

logger = logging.getLogger(__name__)

SAMPLE_POINTS = 257


class CoefficientSchedule(ABC):
    """The time coefficient k(t) of the gradient nonlinearity, with k'(t)."""

    name = 'abstract'

    @abstractmethod
    def k(self, t: float) -> float:
        pass

    @abstractmethod
    def dk(self, t: float) -> float:
        """Derivative k'(t)."""

    @abstractmethod
    def describe(self) -> str:
        """Manifest spelling that parses back into an equal schedule."""

    def __call__(self, t: float) -> float:
        return self.k(t)

    def validate(self, horizon: float = 1.0) -> CoefficientSchedule:
        if not self.k(0.0) > 0:
            raise InvalidSchedule('k(0) must be positive, got {} for {}'.format(self.k(0.0), self.describe()))
        for t in np.linspace(0.0, max(horizon, 0.0) or 1.0, SAMPLE_POINTS):
            slope = self.dk(float(t))
            if not slope >= 0:
                raise InvalidSchedule("k'({:.6g}) = {:.6g} < 0 for {}".format(t, slope, self.describe()))
        return self

    def __repr__(self):
        return '<{} {}>'.format(type(self).__name__, self.describe())


class Constant(CoefficientSchedule):
    name = 'constant'

    def __init__(self, a):
        self.a = float(a)

    def k(self, t):
        return self.a

    def dk(self, t):
        return 0.0

    def describe(self):
        return 'constant:{!r}'.format(self.a)


class Exponential(CoefficientSchedule):
    """a * exp(b t)"""
    name = 'exponential'

    def __init__(self, a, b):
        self.a, self.b = float(a), float(b)

    def k(self, t):
        return self.a * math.exp(self.b * t)

    def dk(self, t):
        return self.a * self.b * math.exp(self.b * t)

    def describe(self):
        return 'exponential:{!r},{!r}'.format(self.a, self.b)


class PowerOfBase(CoefficientSchedule):
    """a * b ** (c t)"""
    name = 'power'

    def __init__(self, a, b, c):
        self.a, self.b, self.c = float(a), float(b), float(c)
        if not self.b > 0:
            raise InvalidSchedule('power schedule needs a positive base, got {}'.format(b))

    def k(self, t):
        return self.a * self.b ** (self.c * t)

    def dk(self, t):
        return self.a * self.c * math.log(self.b) * self.b ** (self.c * t)

    def describe(self):
        return 'power:{!r},{!r},{!r}'.format(self.a, self.b, self.c)


class ArctanRamp(CoefficientSchedule):
    """a * (1 + (2/pi) arctan t)"""
    name = 'arctan'

    def __init__(self, a):
        self.a = float(a)

    def k(self, t):
        return self.a * (1 + 2 / math.pi * math.atan(t))

    def dk(self, t):
        return self.a * 2 / (math.pi * (1 + t * t))

    def describe(self):
        return 'arctan:{!r}'.format(self.a)


class Table(CoefficientSchedule):
    """Linear interpolation through (t, k) knots, constant outside them."""
    name = 'table'

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.times.ndim != 1 or self.times.size < 1 or self.times.shape != self.values.shape:
            raise InvalidSchedule('table needs matching, non-empty time and value lists')
        if np.any(np.diff(self.times) <= 0):
            raise InvalidSchedule('table times must be strictly increasing')

    def k(self, t):
        return float(np.interp(t, self.times, self.values))

    def dk(self, t):
        if self.times.size < 2 or t < self.times[0] or t >= self.times[-1]:
            return 0.0
        n = int(np.searchsorted(self.times, t, side='right')) - 1
        return float((self.values[n + 1] - self.values[n]) / (self.times[n + 1] - self.times[n]))

    def describe(self):
        return 'table:' + ', '.join('{!r} {!r}'.format(float(t), float(v))
                                    for t, v in zip(self.times, self.values))


_ARITY = {
    'constant': (Constant, 1),
    'exponential': (Exponential, 2),
    'power': (PowerOfBase, 3),
    'arctan': (ArctanRamp, 1),
}


def parse_schedule(text: str) -> CoefficientSchedule:
    """
    Parse the manifest spelling of a schedule, e.g. ``exponential:10,1``.

    ``table:0 1.0, 0.5 2.0`` gives knots (0, 1.0) and (0.5, 2.0).
    """
    kind, sep, rest = text.strip().partition(':')
    kind = kind.strip().lower()
    if not sep:
        raise InvalidSchedule('schedule {!r} lacks a "kind:" prefix'.format(text))
    try:
        if kind == 'table':
            knots = [pair.split() for pair in rest.split(',') if pair.strip()]
            if any(len(pair) != 2 for pair in knots):
                raise InvalidSchedule('table knots are "t k" pairs separated by commas')
            return Table([float(t) for t, _ in knots], [float(v) for _, v in knots])
        cls, arity = _ARITY[kind]
    except KeyError:
        raise InvalidSchedule('unknown schedule kind {!r}'.format(kind))
    except ValueError as e:
        raise InvalidSchedule('bad table knot in {!r}: {}'.format(text, e))
    try:
        args = [float(a) for a in rest.split(',')]
    except ValueError as e:
        raise InvalidSchedule('bad parameter in {!r}: {}'.format(text, e))
    if len(args) != arity:
        raise InvalidSchedule('{} takes {} parameter(s), got {}'.format(kind, arity, len(args)))
    return cls(*args)
