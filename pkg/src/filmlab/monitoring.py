from __future__ import annotations
from time import perf_counter

import wrapt
from prometheus_client import Gauge, Histogram, Counter, Summary

SIMULATIONS_IN_PROGRESS = Gauge('filmlab_simulations_in_progress',
                                'Number of simulations that are currently stepping')

STEPS = Counter('filmlab_steps', 'Time steps taken by all simulations')

STEP_TIME = Histogram('filmlab_step_seconds',
                      'Time spent in one semi-implicit step')

TRANSFORM_TIME = Histogram('filmlab_transform_seconds',
                           'Time spent in one two-dimensional sine transform',
                           buckets=(.0001, .0005, .001, .005, .01, .05, .1, .5, 1.0, float('inf')))

REPORT_TIME = Histogram('filmlab_report_seconds',
                        'Time spent evaluating the functionals of one state')

BLOWUPS = Counter('filmlab_blowups', 'Simulations that ended in detected blow-up')

INDEFINITE_DENOMINATORS = Counter('filmlab_indefinite_denominators',
                                  'Simulations refused because a spectral denominator was not positive')

FILTER_RUNS = Counter('filmlab_filter_runs', 'Image filter runs', ['filter'])

BISECTION_ITERATIONS = Summary('filmlab_bisection_iterations',
                               'Iterations used by a bracketing root search', ['quantity'])


def time(metric):
    """Observe the wall time of every call of the decorated function on *metric*."""
    @wrapt.decorator
    def decorator(func, _, args, kw):
        start_time = perf_counter()
        try:
            return func(*args, **kw)
        finally:
            metric.observe(perf_counter() - start_time)

    return decorator
