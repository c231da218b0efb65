from __future__ import annotations
from typing import List, NamedTuple, Optional, Sequence, Tuple

import logging
from pathlib import Path

import numpy as np

from filmlab import monitoring as mon
from filmlab.functionals import REPORT_HEADER, FunctionalReport, report
from filmlab.grid import ExponentField, Field, Grid2D, field_from_array, quadrature
from filmlab.nonlinear import nonlinear_divergence
from filmlab.schedule import CoefficientSchedule
from filmlab.spectral import (SymbolTable, build_symbols, dst_forward_direct, dst_inverse_direct,
                              solve_semi_implicit)
from filmlab.storage import format_real, write_csv, write_tff
from filmlab.util import DivergedCoefficient, IndefiniteDenominator

logger = logging.getLogger(__name__)

COMPLETED = 'completed'
BLEW_UP = 'blew_up'
INDEFINITE_DENOMINATOR = 'indefinite_denominator'


class SimulationConfig(NamedTuple):
    grid: Grid2D
    p: ExponentField
    k: CoefficientSchedule
    alpha: float
    s: float
    dt: float
    t_end: float
    lambda_source: float = 0.0
    blowup_threshold: float = 1e8
    snapshot_times: Tuple[float, ...] = ()
    verbatim_denominator: bool = False
    source_implicit: bool = False
    stride: int = 1

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def make_config(grid, p, k, alpha, s, dt, t_end, **extra) -> SimulationConfig:
    cfg = SimulationConfig(grid, p, k, float(alpha), float(s), float(dt), float(t_end), **extra)
    if not cfg.dt > 0:
        raise ValueError('dt must be positive, got {}'.format(cfg.dt))
    if not cfg.t_end >= 0:
        raise ValueError('t_end must not be negative, got {}'.format(cfg.t_end))
    if not cfg.blowup_threshold > 0:
        raise ValueError('blowup_threshold must be positive, got {}'.format(cfg.blowup_threshold))
    if cfg.stride < 1:
        raise ValueError('stride must be at least 1, got {}'.format(cfg.stride))
    if p.grid != grid:
        raise ValueError('exponent lives on {}, simulation on {}'.format(p.grid, grid))
    k.validate(cfg.t_end)
    return cfg._replace(snapshot_times=tuple(sorted(float(t) for t in cfg.snapshot_times)))


class SimulationOutcome(NamedTuple):
    status: str
    t_final: float
    blowup_time_estimate: Optional[float]
    reports: Tuple[FunctionalReport, ...]
    snapshots: Tuple[Tuple[float, Field], ...]
    conservation_residual_max: float
    nehari_residual_max: float = 0.0
    final: Optional[Field] = None
    steps: int = 0


def symbols_for(cfg: SimulationConfig) -> SymbolTable:
    return build_symbols(cfg.grid, cfg.dt, cfg.alpha, cfg.s,
                         verbatim_denominator=cfg.verbatim_denominator,
                         implicit_source=cfg.lambda_source if cfg.source_implicit else 0.0)


def assemble_rhs(u: Field, t: float, cfg: SimulationConfig) -> np.ndarray:
    """u - dt k(t) B(u) (+ dt lambda u when the source is explicit)."""
    with np.errstate(over='ignore', invalid='ignore'):
        rhs = u.values - cfg.dt * cfg.k(t) * nonlinear_divergence(u, cfg.p).values
        if cfg.lambda_source and not cfg.source_implicit:
            rhs = rhs + cfg.dt * cfg.lambda_source * u.values
    return rhs


def _flag(u: Field, cfg: SimulationConfig) -> Field:
    if u.diverged or not u.umax <= cfg.blowup_threshold:
        return u._replace(diverged=True)
    return u


@mon.time(mon.STEP_TIME)
def step(u: Field, t: float, cfg: SimulationConfig, symbols: Optional[SymbolTable] = None) -> Field:
    """One semi-implicit step from t_n to t_n + dt; the result carries the divergence flag."""
    if u.diverged:
        raise ValueError('cannot step a diverged field')
    if symbols is None:
        symbols = symbols_for(cfg)
    try:
        rhs = assemble_rhs(u, t, cfg)
    except DivergedCoefficient:
        return field_from_array(u.grid, np.full(u.grid.shape, np.inf), diverged=True)
    if not np.isfinite(rhs).all():
        return field_from_array(u.grid, rhs, diverged=True)
    with np.errstate(over='ignore', invalid='ignore'):
        return _flag(solve_semi_implicit(field_from_array(u.grid, rhs), symbols), cfg)


def reference_step(u: Field, t: float, cfg: SimulationConfig) -> Field:
    """step() computed with the direct-sum transforms; for small grids only."""
    symbols = symbols_for(cfg)
    rhs = field_from_array(u.grid, assemble_rhs(u, t, cfg))
    v = dst_forward_direct(rhs)
    return _flag(dst_inverse_direct(v._replace(coefficients=v.coefficients / symbols.denominator)), cfg)


def run(u0: Field, cfg: SimulationConfig, stride: Optional[int] = None) -> SimulationOutcome:
    stride = stride or cfg.stride
    try:
        symbols = symbols_for(cfg)
    except IndefiniteDenominator as e:
        mon.INDEFINITE_DENOMINATORS.inc()
        logger.error('refusing to run: %s', e)
        return SimulationOutcome(INDEFINITE_DENOMINATOR, 0.0, None, (), (), 0.0, final=u0)

    def functionals(u, t):
        return report(u, t, cfg.p, cfg.k, cfg.alpha, cfg.s)

    pending = list(cfg.snapshot_times)
    snapshots = []

    def take_snapshots(u, t):
        while pending and pending[0] <= t + cfg.dt / 2:
            wanted = pending.pop(0)
            if abs(wanted - t) <= cfg.dt / 2:
                snapshots.append((t, u))

    n_steps = cfg.n_steps
    logger.info('running %d steps of dt=%g on %dx%d (alpha=%g, s=%g, k=%s)',
                n_steps, cfg.dt, cfg.grid.Nx, cfg.grid.Ny, cfg.alpha, cfg.s, cfg.k.describe())
    ledger = [functionals(u0, 0.0)]
    reports = [ledger[0]]
    increments = []  # type: List[float]
    take_snapshots(u0, 0.0)

    if u0.is_zero() and not u0.diverged:
        # the zero field is a fixed point of every step
        if n_steps:
            reports.append(ledger[0]._replace(t=n_steps * cfg.dt))
        for t in pending:
            snapshots.append((t, u0))
        return SimulationOutcome(COMPLETED, n_steps * cfg.dt, None, tuple(reports), tuple(snapshots), 0.0,
                                 final=u0, steps=n_steps)

    u, status, blowup = u0, COMPLETED, None
    with mon.SIMULATIONS_IN_PROGRESS.track_inprogress():
        for n in range(n_steps):
            nxt = step(u, n * cfg.dt, cfg, symbols)
            mon.STEPS.inc()
            t_next = (n + 1) * cfg.dt
            if nxt.diverged:
                status, blowup = BLEW_UP, t_next
                mon.BLOWUPS.inc()
                logger.warning('blow-up detected at t=%.6g (max|u| = %.3g before the step)', t_next, u.umax)
                break
            increments.append(quadrature((nxt.values - u.values) ** 2, cfg.grid))
            u = nxt
            rep = functionals(u, t_next)
            ledger.append(rep)
            if (n + 1) % stride == 0:
                reports.append(rep)
                logger.debug('t=%.6g J=%.6g I=%.6g F1=%.6g umax=%.3g', rep.t, rep.J, rep.I, rep.F1, rep.umax)
            take_snapshots(u, t_next)
    if reports[-1] is not ledger[-1]:
        reports.append(ledger[-1])

    outcome = SimulationOutcome(status=status,
                                t_final=ledger[-1].t,
                                blowup_time_estimate=blowup,
                                reports=tuple(reports),
                                snapshots=tuple(snapshots),
                                conservation_residual_max=conservation_residual(ledger, increments, cfg.k, cfg.dt),
                                nehari_residual_max=nehari_identity_residual(ledger, cfg.dt),
                                final=u,
                                steps=len(increments))
    logger.info('finished with status %s at t=%.6g', outcome.status, outcome.t_final)
    return outcome


def conservation_residual(reports: Sequence[FunctionalReport], increments_sq: Sequence[float],
                          k: CoefficientSchedule, dt: float) -> float:
    """
    max_n |J(u^n) + sum_{m<n} (||u^{m+1} - u^m||^2 / dt + dt k'(t_m) int (1/p)|grad u^m|^p) - J(u^0)|,
    relative to max(1, |J(u^0)|).

    *reports* holds one report per step (t_0, t_1, ...); *increments_sq* the
    quadratures of the squared step differences.
    """
    if not reports:
        return 0.0
    J0 = reports[0].J
    accumulated = worst = 0.0
    for n, increment in enumerate(increments_sq):
        accumulated += increment / dt + dt * k.dk(reports[n].t) * reports[n].weighted_modular
        worst = max(worst, abs(reports[n + 1].J + accumulated - J0))
    return worst / max(1.0, abs(J0))


def nehari_identity_residual(reports: Sequence[FunctionalReport], dt: float) -> float:
    """max_n |(F1^{n+1} - F1^n) / dt + I^n|, the discrete form of F1' = -I."""
    worst = 0.0
    for before, after in zip(reports, reports[1:]):
        worst = max(worst, abs((after.F1 - before.F1) / dt + before.I))
    return worst


def snapshot_name(t: float) -> str:
    return 'snapshot_t{:.6f}.tff'.format(t)


def summary_text(outcome: SimulationOutcome) -> str:
    lines = ['status: {}'.format(outcome.status),
             't_final: {}'.format(format_real(outcome.t_final)),
             'steps: {}'.format(outcome.steps)]
    if outcome.blowup_time_estimate is not None:
        lines.append('blowup_time_estimate: {}'.format(format_real(outcome.blowup_time_estimate)))
    lines.append('conservation_residual_max: {}'.format(format_real(outcome.conservation_residual_max)))
    lines.append('nehari_residual_max: {}'.format(format_real(outcome.nehari_residual_max)))
    if outcome.reports:
        first, last = outcome.reports[0], outcome.reports[-1]
        lines.append('F1: {} -> {}'.format(format_real(first.F1), format_real(last.F1)))
        lines.append('J: {} -> {}'.format(format_real(first.J), format_real(last.J)))
    return '\n'.join(lines) + '\n'


def write_outcome(outcome: SimulationOutcome, out_dir) -> Path:
    out_dir = Path(out_dir)
    write_csv(out_dir / 'diagnostics.csv', REPORT_HEADER, outcome.reports)
    for t, field in outcome.snapshots:
        write_tff(out_dir / snapshot_name(t), field)
    summary = out_dir / 'summary.txt'
    summary.write_text(summary_text(outcome))
    return out_dir
