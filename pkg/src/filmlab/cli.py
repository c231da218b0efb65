from __future__ import annotations
from typing import List, Optional, Tuple

import json
import logging
import logging.config
import math
import os
import sys
from asyncio import gather, wrap_future
from pathlib import Path

import numpy as np
from prometheus_client import start_http_server
from tornado import concurrent
from tornado.ioloop import IOLoop
from tornado.options import Error as OptionError, define, options

from filmlab import bounds
from filmlab.evolve import BLEW_UP, INDEFINITE_DENOMINATOR, make_config, run, summary_text, write_outcome
from filmlab.examples import exponent_datum, initial_datum
from filmlab.functionals import (energy_J, nehari_scale_mu_star, random_smooth_field, report,
                                 sample_embedding_constant, scale_field, well_depth_upper)
from filmlab.grid import make_grid
from filmlab.imaging.codec import ImageGray, read_image, write_image
from filmlab.imaging.filters import (SharpenRecipe, evolve_image, linear_backward_diffusion, sharpen,
                                     shock_filter)
from filmlab.imaging.metrics import contrast_mad, edge_gain, flat_variance_ratio, gradient_magnitude, output_range
from filmlab.imaging.synthetic import step_edge_image
from filmlab.manifest import RunManifest, empty_manifest, load_manifest, manifest_help
from filmlab.schedule import parse_schedule
from filmlab.spectral import b2_sq, h2_admissible
from filmlab.storage import atomic_write, format_real, write_csv
from filmlab.util import HypothesisNotSatisfied, LabError, MissingConstant

REPO_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))

define('config', help="Experiment manifest (key = value lines)", type=str)
define('out', help="Output directory", default='out')
define('seed', help="Seed for randomized trials and synthetic images", default=0)
define('stride', help="Emit every n-th functional report", default=1)
define('verbatim_denominator', help="Use the printed spectral denominator without alpha", default=False)
define('logging_config',
       help="Config file for logging, "
            "see https://docs.python.org/3/library/logging.config.html",
       default=os.path.join(REPO_DIR, 'logging.json'))
define('prometheus_port', help="Port to start the prometheus metrics server on", type=int)
define('workers', help="Thread pool size for compare", default=3)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP = 0, 1, 2

BLOWUP_SUFFICIENT = 'BLOWUP_SUFFICIENT'
DECAY_CANDIDATE = 'DECAY_CANDIDATE'
INDETERMINATE = 'INDETERMINATE'


def seed(m: RunManifest) -> int:
    return m.get('seed', options.seed)


def resolve_problem(m: RunManifest):
    """Grid, initial field, exponent and schedule named by a manifest."""
    if str(m.initial).startswith('file:'):
        u0 = initial_datum(m.initial, None)
    else:
        u0 = initial_datum(m.initial, make_grid(m.lx, m.ly, m.nx, m.ny))
    p = exponent_datum(m.exponent, u0.grid)
    return u0.grid, u0, p, parse_schedule(m.k)


def cmd_simulate(m: RunManifest, out: Path) -> int:
    grid, u0, p, k = resolve_problem(m)
    cfg = make_config(grid, p, k, m.alpha, m.s, m.dt, m.t_end,
                      lambda_source=m.lambda_source,
                      blowup_threshold=m.blowup_threshold,
                      snapshot_times=tuple(m.snapshot_times),
                      verbatim_denominator=m.verbatim_denominator or options.verbatim_denominator,
                      source_implicit=m.source_implicit,
                      stride=m.get('stride', options.stride))
    outcome = run(u0, cfg)
    if outcome.status == INDEFINITE_DENOMINATOR:
        print('indefinite denominator: reduce dt', file=sys.stderr)
        return EXIT_ERROR
    write_outcome(outcome, out)
    print(summary_text(outcome), end='')
    if outcome.status == BLEW_UP:
        print('blew_up: estimated blow-up time {:.6g}'.format(outcome.blowup_time_estimate))
        return EXIT_BLOWUP
    return EXIT_OK


def _line(label, value) -> str:
    return '{:<28} {}'.format(label + ':', value if isinstance(value, str) else format_real(value))


def _constants_line(name, result) -> str:
    return '{}: {}'.format(name, ', '.join('{}={:.6g}'.format(k, v) for k, v in result._asdict().items()))


def classify_lines(m: RunManifest) -> Tuple[List[str], str]:
    """Hypothesis checks for the initial datum and the resulting verdict."""
    grid, u0, p, k = resolve_problem(m)
    alpha, s = m.alpha, m.s
    rep = report(u0, 0.0, p, k, alpha, s)
    norm2_sq = 2 * rep.F1
    B2 = b2_sq(grid, alpha, s)
    lines = [_line('J(u0;0)', rep.J), _line('I(u0;0)', rep.I), _line('F1(0)', rep.F1),
             _line('||u0||_(alpha)^2', rep.norm_alpha_sq), _line('B2^2', B2),
             _line('p-, p+', '{:.6g}, {:.6g}'.format(p.p_minus, p.p_plus)),
             _line('alpha admissible (H2)', 'yes' if h2_admissible(grid, alpha, s) else 'no (advisory)')]
    if u0.is_zero():
        lines.append('all checks: SKIPPED (zero datum)')
        return lines, INDETERMINATE

    c = bounds.theorem_constants(grid, p, k, alpha, s, S_p=m.S_p, C3_tilde=m.C3_tilde,
                                 C4_tilde=m.C4_tilde, kappa_star=m.kappa_star)
    d_lower = m.d_lower
    sufficient = False

    if not rep.I < 0:
        lines.append('low-energy blow-up: not applicable (I(u0;0) = {:.6g} is not negative)'.format(rep.I))
    else:
        try:
            low = bounds.blowup_upper_bound_T(c, rep.J, rep.F1, d_lower, consistent_c3=m.consistent_c3)
            lines.append(_constants_line('low-energy blow-up: T* <= {:.6g}'.format(low.T_upper), low))
            sufficient = True
        except HypothesisNotSatisfied as e:
            lines.append('low-energy blow-up: not applicable ({})'.format(e.detail))

    threshold = bounds.high_energy_threshold(c, norm2_sq)
    lines.append(_line('high-energy threshold', threshold))
    try:
        high = bounds.blowup_upper_bound_high_energy(c, rep.J, norm2_sq)
        lines.append(_constants_line('high-energy blow-up: T* <= {:.6g}'.format(high.T_upper), high))
        sufficient = True
    except HypothesisNotSatisfied as e:
        lines.append('high-energy blow-up: not applicable ({})'.format(e.detail))

    try:
        life = bounds.lifespan_lower_bound(c, m.n_dim, rep.F1)
        lines.append(_constants_line('lifespan: T* >= {:.6g}'.format(life.T_lower), life))
    except MissingConstant as e:
        lines.append('lifespan: SKIPPED ({})'.format(e))
    except HypothesisNotSatisfied as e:
        lines.append('lifespan: not applicable ({})'.format(e.detail))

    if d_lower is None:
        lines.append('decay rate: SKIPPED (missing constant(s): d_lower)')
    else:
        try:
            rate = bounds.decay_rate_delta1(c, rep.J, d_lower)
            lines.append(_constants_line('decay rate', rate))
        except HypothesisNotSatisfied as e:
            lines.append('decay rate: not applicable ({})'.format(e.detail))

    if sufficient:
        return lines, BLOWUP_SUFFICIENT
    if not rep.I > 0:
        return lines, INDETERMINATE

    try:
        mu = nehari_scale_mu_star(u0, 0.0, p, k, alpha, s).mu_star
    except LabError as e:
        lines.append('depth estimate: SKIPPED ({})'.format(e))
        return lines, INDETERMINATE
    depth = energy_J(scale_field(u0, mu), 0.0, p, k, alpha, s)
    lines.append(_line('mu*(u0)', mu))
    lines.append(_line('d(0) <= J(mu* u0; 0)', depth))
    if m.depth_trials:
        rng = np.random.default_rng(seed(m))
        trials = [random_smooth_field(grid, rng) for _ in range(m.depth_trials)]
        estimate = well_depth_upper(0.0, trials, p, k, alpha, s, S_p=m.S_p)
        lines.append(_line('d(0) <= trial bound ({} fields)'.format(m.depth_trials), estimate.trial_bound))
        if estimate.closed_form_upper is not None:
            lines.append(_line('d(0) closed form', '[{:.6g}, {:.6g}]'.format(
                estimate.closed_form_lower, estimate.closed_form_upper)))
        sample = sample_embedding_constant(grid, p, alpha, s, m.depth_trials, rng)
        lines.append(_line('S_p sample', '{:.6g} ({})'.format(sample.S_p, sample.label)))
        depth = min(depth, estimate.trial_bound)
    ceiling = min(depth, d_lower if d_lower is not None else math.inf)
    return lines, DECAY_CANDIDATE if rep.J < ceiling else INDETERMINATE


def cmd_classify(m: RunManifest, out: Path) -> int:
    lines, verdict = classify_lines(m)
    lines.append('verdict: {}'.format(verdict))
    text = '\n'.join(lines) + '\n'
    atomic_write(out / 'classify.txt', text.encode())
    print(text, end='')
    return EXIT_OK


BOUND_REQUIREMENTS = {
    'low-energy blow-up': ('p_minus', 'p_plus', 'omega_measure', 'lambda1', 'k0', 'J0', 'F10'),
    'high-energy blow-up': ('p_minus', 'B2_sq', 'J0', 'u0_norm2_sq'),
    'lifespan': ('p_minus', 'p_plus', 'F10', 'C3_tilde', 'C4_tilde', 'kappa_star'),
    'decay rate': ('p_minus', 'p_plus', 'B2_sq', 'J0', 'd_lower'),
}


def bound_constants(m: RunManifest) -> dict:
    """Scalar constants from the manifest; a named datum fills in whatever is not given explicitly."""
    names = ('p_minus', 'p_plus', 'omega_measure', 'lambda1', 'B2_sq', 'k0', 'J0', 'F10', 'u0_norm2_sq')
    values = {name: m.values.get(name) for name in names + ('S_p', 'C3_tilde', 'C4_tilde', 'kappa_star', 'd_lower')}
    if m.values.get('initial') is not None:
        grid, u0, p, k = resolve_problem(m)
        c = bounds.theorem_constants(grid, p, k, m.alpha, m.s)
        rep = report(u0, 0.0, p, k, m.alpha, m.s)
        derived = dict(c._asdict(), J0=rep.J, F10=rep.F1, u0_norm2_sq=2 * rep.F1)
        for name in names:
            if values[name] is None:
                values[name] = derived[name]
    if values['p_plus'] is None:
        values['p_plus'] = values['p_minus']
    return values


def bounds_lines(m: RunManifest) -> Tuple[List[str], int, int]:
    """Report lines plus the number of bounds attempted and computed."""
    v = bound_constants(m)
    c = bounds.TheoremConstants(**{name: v[name] for name in bounds.TheoremConstants._fields})
    lines, attempted, computed = [], 0, 0
    for name, needed in BOUND_REQUIREMENTS.items():
        missing = [key for key in needed if v[key] is None]
        if missing:
            lines.append('{}: SKIPPED (missing constant(s): {})'.format(name, ', '.join(missing)))
            continue
        attempted += 1
        try:
            if name == 'low-energy blow-up':
                result = bounds.blowup_upper_bound_T(c, v['J0'], v['F10'], v['d_lower'], m.consistent_c3)
                head = 'T* <= {:.6g}'.format(result.T_upper)
            elif name == 'high-energy blow-up':
                result = bounds.blowup_upper_bound_high_energy(c, v['J0'], v['u0_norm2_sq'])
                head = 'T* <= {:.6g}'.format(result.T_upper)
            elif name == 'lifespan':
                result = bounds.lifespan_lower_bound(c, m.n_dim, v['F10'])
                head = 'T* >= {:.6g}'.format(result.T_lower)
            else:
                result = bounds.decay_rate_delta1(c, v['J0'], v['d_lower'])
                head = 'delta1 = {:.6g}'.format(result.delta1)
        except HypothesisNotSatisfied as e:
            lines.append('{}: not applicable ({})'.format(name, e.detail))
            continue
        computed += 1
        lines.append(_constants_line('{}: {}'.format(name, head), result))
    if not attempted:
        lines.append('no constants supplied; set p_minus, J0, F10, ... or name an initial datum')
    return lines, attempted, computed


def cmd_bounds(m: RunManifest, out: Path) -> int:
    lines, attempted, computed = bounds_lines(m)
    text = '\n'.join(lines) + '\n'
    atomic_write(out / 'bounds.txt', text.encode())
    print(text, end='')
    return EXIT_ERROR if attempted and not computed else EXIT_OK


def recipe_from(m: RunManifest, t_stop: float) -> SharpenRecipe:
    recipe = SharpenRecipe(t_stop=m.get('t_stop', t_stop),
                           intensity_scale=m.intensity_scale,
                           blowup_threshold=m.blowup_threshold)
    overrides = {name: m.values[name] for name in ('dt', 'alpha', 's') if m.values[name] is not None}
    if m.values['k'] is not None:
        overrides['k'] = parse_schedule(m.k)
    return recipe._replace(**overrides)


def _image_command(m: RunManifest, out: Path, lam: float, t_stop: float, suffix: str) -> int:
    source = Path(m.input)
    img = read_image(source)
    result = evolve_image(img, recipe_from(m, t_stop), lam, diagnostics_dir=out)
    target = Path(m.output) if m.output else out / '{}_{}{}'.format(source.stem, suffix, source.suffix or '.pgm')
    write_image(target, result.image)
    print(summary_text(result.outcome), end='')
    print('backward nodes at t=0: {:.2f}%'.format(100 * result.backward_share))
    print('output: {}'.format(target))
    return EXIT_OK


def cmd_sharpen(m: RunManifest, out: Path) -> int:
    return _image_command(m, out, 0.0, 0.025, 'sharpened')


def cmd_enhance(m: RunManifest, out: Path) -> int:
    return _image_command(m, out, m.get('lambda', 10.0), 0.03, 'enhanced')


class FilterBench:
    """Runs the three comparison filters of one image side by side."""

    def __init__(self, workers: int):
        self._thread_pool = concurrent.futures.ThreadPoolExecutor(workers)

    @concurrent.run_on_executor(executor='_thread_pool')
    def proposed(self, img, recipe):
        return sharpen(img, recipe)

    @concurrent.run_on_executor(executor='_thread_pool')
    def backward(self, img, epsilon, dt, t_stop):
        return linear_backward_diffusion(img, epsilon, dt, t_stop)

    @concurrent.run_on_executor(executor='_thread_pool')
    def shock(self, img, dt, t_stop, scheme):
        return shock_filter(img, dt, t_stop, scheme)

    async def run_all(self, img: ImageGray, m: RunManifest):
        results = await gather(wrap_future(self.proposed(img, recipe_from(m, 0.025))),
                               wrap_future(self.backward(img, m.bwd_epsilon, m.bwd_dt, m.bwd_t)),
                               wrap_future(self.shock(img, m.shock_dt, m.shock_t, m.shock_scheme)))
        return dict(zip(('proposed', 'backward', 'shock'), results))

    def close(self):
        self._thread_pool.shutdown(wait=True)


METRICS_HEADER = ('filter', 'edge_gain', 'flat_variance_ratio', 'range_min', 'range_max', 'contrast_mad')


def compare_rows(img: ImageGray, outputs: dict, edge_region, flat_region) -> list:
    rows = [('input', 1.0, 1.0) + output_range(img) + (contrast_mad(img),)]
    for name, result in outputs.items():
        rows.append((name, edge_gain(img, result, edge_region), flat_variance_ratio(img, result, flat_region))
                    + output_range(result) + (contrast_mad(result),))
    return rows


def cmd_compare(m: RunManifest, out: Path) -> int:
    if m.input:
        img = read_image(m.input)
        edge_region = (slice(None), slice(None))
        flat_region = gradient_magnitude(img) < 0.02
    else:
        synthetic = step_edge_image(m.width, m.height, ramp=m.ramp, noise=m.noise,
                                    rng=np.random.default_rng(seed(m)), taper=m.taper)
        img, edge_region, flat_region = synthetic.image, synthetic.edge_region, synthetic.flat_regions[0]
        write_image(out / 'input.pgm', img)
    bench = FilterBench(options.workers)
    try:
        outputs = IOLoop.current().run_sync(lambda: bench.run_all(img, m))
    finally:
        bench.close()
    for name, result in outputs.items():
        write_image(out / '{}.pgm'.format(name), result)
    rows = compare_rows(img, outputs, edge_region, flat_region)
    write_csv(out / 'metrics.csv', METRICS_HEADER, rows)
    print(' '.join('{:>19}'.format(h) for h in METRICS_HEADER))
    for row in rows:
        print('{:>19} '.format(row[0]) + ' '.join('{:>19.6g}'.format(v) for v in row[1:]))
    return EXIT_OK


def cmd_synth(m: RunManifest, out: Path) -> int:
    synthetic = step_edge_image(m.width, m.height, ramp=m.ramp, noise=m.noise,
                                rng=np.random.default_rng(seed(m)), taper=m.taper)
    target = Path(m.output) if m.output else out / 'step_edge.pgm'
    write_image(target, synthetic.image)
    print('output: {}'.format(target))
    return EXIT_OK


COMMANDS = {
    'simulate': cmd_simulate,
    'classify': cmd_classify,
    'sharpen': cmd_sharpen,
    'enhance': cmd_enhance,
    'compare': cmd_compare,
    'bounds': cmd_bounds,
    'synth': cmd_synth,
}

USAGE = 'usage: run.py [--flags] {} '.format('|'.join(COMMANDS))


def print_usage(file=sys.stdout):
    print(USAGE + '\n', file=file)
    options.print_help(file)
    print(manifest_help(), file=file)


def split_arguments(argv: List[str]) -> Tuple[List[str], List[str]]:
    """Separate --flags from positionals, accepting both --name=value and --name value."""
    flags, positionals = [], []
    args = iter(argv)
    for arg in args:
        if not arg.startswith('-'):
            positionals.append(arg)
            continue
        name = arg.lstrip('-').replace('_', '-')
        option = options._options.get(name)
        if '=' not in arg and option is not None and option.type is not bool:
            value = next(args, None)
            arg = arg if value is None else '{}={}'.format(arg, value)
        flags.append(arg)
    return flags, positionals


def configure_logging():
    file = options.logging_config
    if not file or not os.path.exists(file):
        logging.basicConfig(level=logging.WARNING)
        return
    with open(file, 'r') as conf:
        logging.config.dictConfig(json.load(conf))


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv if argv is None else argv)
    if '--help' in argv[1:] or '-h' in argv[1:]:
        print_usage(sys.stdout)
        return EXIT_OK
    flags, positionals = split_arguments(argv[1:])
    try:
        options.parse_command_line([argv[0]] + flags, final=False)
    except OptionError as e:
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_ERROR
    if not positionals or positionals[0] not in COMMANDS:
        print(USAGE, file=sys.stderr)
        return EXIT_ERROR
    command = positionals[0]
    configure_logging()
    if options.prometheus_port:
        start_http_server(options.prometheus_port)

    try:
        manifest = load_manifest(options.config) if options.config else empty_manifest()
        manifest.require(command)
        out = Path(options.out)
        out.mkdir(parents=True, exist_ok=True)
        logger.info('running %s with %s into %s', command, options.config or 'defaults', out)
        return COMMANDS[command](manifest, out)
    except (LabError, OSError, ValueError) as e:
        logger.error('%s failed: %s', command, e)
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_ERROR
