"""
Experiment manifests: flat ``key = value`` files with ``#`` comments.

Every key is declared on a private tornado OptionParser and each value is
parsed by that option, so types and help texts live in one table.
"""
from __future__ import annotations
from typing import Dict, FrozenSet, NamedTuple, Optional

import io
import logging
from pathlib import Path

from tornado.options import Error as OptionError, OptionParser

from filmlab.util import ManifestError

logger = logging.getLogger(__name__)

# name, type, default, multiple, help
KEYS = (
    ('lx', float, None, False, 'Domain length in x'),
    ('ly', float, None, False, 'Domain length in y'),
    ('nx', int, None, False, 'Interior nodes in x'),
    ('ny', int, None, False, 'Interior nodes in y'),
    ('initial', str, None, False, 'Initial datum: example1, example2, zero, mode:m,l[,amp] or file:<path.tff>'),
    ('exponent', str, None, False, 'Exponent p(x,y): example1, example2 or constant:q'),
    ('k', str, None, False, 'Coefficient k(t): constant:a, exponential:a,b, power:a,b,c, arctan:a or table:t k, ...'),
    ('alpha', float, None, False, 'Weight of the fractional term'),
    ('s', float, None, False, 'Fractional order, 0 < s < 1'),
    ('dt', float, None, False, 'Time step'),
    ('t_end', float, None, False, 'Final time of the simulation'),
    ('lambda_source', float, 0.0, False, 'Linear source coefficient'),
    ('source_implicit', bool, False, False, 'Treat the linear source implicitly'),
    ('blowup_threshold', float, 1e8, False, 'max|u| above which a run counts as blown up'),
    ('snapshot_times', float, [], True, 'Comma-separated times at which TFF1 snapshots are written'),
    ('verbatim_denominator', bool, False, False, 'Use the printed denominator without alpha'),
    ('stride', int, None, False, 'Emit every n-th functional report (overrides --stride)'),
    ('seed', int, None, False, 'Seed for randomized trials (overrides --seed)'),
    ('d_lower', float, None, False, 'Lower estimate of the potential-well depth d'),
    ('S_p', float, None, False, 'Embedding constant of ||grad v||_p(.) <= S_p ||v||_(alpha)'),
    ('C3_tilde', float, None, False, 'Gagliardo-Nirenberg constant for p+'),
    ('C4_tilde', float, None, False, 'Gagliardo-Nirenberg constant for p-'),
    ('kappa_star', float, None, False, 'Upper bound of k(t) on the lifespan interval'),
    ('n_dim', int, 2, False, 'Space dimension used by the lifespan bound'),
    ('p_minus', float, None, False, 'Minimum of p'),
    ('p_plus', float, None, False, 'Maximum of p'),
    ('omega_measure', float, None, False, 'Measure of the domain'),
    ('lambda1', float, None, False, 'Principal Dirichlet eigenvalue'),
    ('B2_sq', float, None, False, 'Smallest ||v||_(alpha)^2 / ||v||_2^2'),
    ('k0', float, None, False, 'k(0)'),
    ('J0', float, None, False, 'J(u0; 0)'),
    ('F10', float, None, False, 'F1(0) = ||u0||_2^2 / 2'),
    ('u0_norm2_sq', float, None, False, '||u0||_2^2'),
    ('consistent_c3', bool, False, False, 'Use the exponent p-/2 in C3'),
    ('depth_trials', int, 0, False, 'Random trial fields for the well-depth upper bound'),
    ('input', str, None, False, 'Input image (PGM or PNG)'),
    ('output', str, None, False, 'Output image path'),
    ('t_stop', float, None, False, 'Stopping time of an image pipeline'),
    ('lambda', float, 10.0, False, 'Source coefficient of the contrast enhancement'),
    ('intensity_scale', float, 255.0, False, 'Evolve u = scale * intensity'),
    ('bwd_epsilon', float, 1e-3, False, 'Fourth-order weight of the linear backward diffusion'),
    ('bwd_t', float, 0.2, False, 'Stopping time of the linear backward diffusion'),
    ('bwd_dt', float, 5e-4, False, 'Time step of the linear backward diffusion'),
    ('shock_t', float, 0.5, False, 'Stopping time of the shock filter'),
    ('shock_dt', float, 0.05, False, 'Time step of the shock filter'),
    ('shock_scheme', str, 'upwind', False, 'Shock filter gradient: upwind or central'),
    ('width', int, 96, False, 'Width of the synthetic step edge'),
    ('height', int, 96, False, 'Height of the synthetic step edge'),
    ('ramp', int, 3, False, 'Ramp width of the synthetic step edge'),
    ('noise', float, 0.01, False, 'Noise level of the synthetic step edge'),
    ('taper', int, 24, False, 'Taper to black at the frame of the synthetic step edge'),
)

PROBLEM_KEYS = ('initial', 'exponent', 'k', 'alpha', 's')
GRID_KEYS = ('lx', 'ly', 'nx', 'ny')

REQUIRED = {
    'simulate': PROBLEM_KEYS + ('dt', 't_end'),
    'classify': PROBLEM_KEYS,
    'sharpen': ('input',),
    'enhance': ('input',),
    'compare': (),
    'bounds': (),
    'synth': (),
}


def manifest_parser() -> OptionParser:
    parser = OptionParser()
    for name, type_, default, multiple, help_ in KEYS:
        parser.define(name, default=default, type=type_, multiple=multiple, help=help_, group='manifest')
    return parser


class RunManifest(NamedTuple):
    values: Dict[str, object]
    explicit: FrozenSet[str] = frozenset()
    path: Optional[Path] = None

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name)

    def get(self, name, default=None):
        value = self.values.get(name)
        return default if value is None else value

    def has(self, name) -> bool:
        return name in self.explicit

    def require(self, command: str):
        wanted = REQUIRED.get(command, ())
        if command in ('simulate', 'classify') and not str(self.values.get('initial') or '').startswith('file:'):
            wanted = wanted + GRID_KEYS
        missing = [name for name in wanted if self.values.get(name) is None]
        if missing:
            raise ManifestError('{} needs key(s): {}'.format(command, ', '.join(missing)), path=self.path)
        return self


def empty_manifest() -> RunManifest:
    return RunManifest(manifest_parser().as_dict())


def parse_manifest(text: str, path=None) -> RunManifest:
    parser = manifest_parser()
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ManifestError('expected "key = value", got {!r}'.format(line), lineno, path)
        key, value = (part.strip() for part in line.split('=', 1))
        name = key.replace('-', '_')
        option = parser._options.get(name.replace('_', '-'))
        if option is None or option.group_name != 'manifest':
            raise ManifestError('unknown key {!r}'.format(key), lineno, path)
        if name in seen:
            raise ManifestError('duplicate key {!r} (first set on line {})'.format(key, seen[name]), lineno, path)
        try:
            option.parse(value)
        except (OptionError, ValueError, TypeError) as e:
            raise ManifestError('bad value {!r} for {}: {}'.format(value, key, e), lineno, path)
        seen[name] = lineno
    logger.debug('manifest %s sets %s', path or '<text>', ', '.join(sorted(seen)))
    return RunManifest(parser.as_dict(), frozenset(seen), Path(path) if path is not None else None)


def load_manifest(path) -> RunManifest:
    path = Path(path)
    return parse_manifest(path.read_text(), path)


def manifest_help() -> str:
    out = io.StringIO()
    manifest_parser().print_help(out)
    out.write('\nRequired manifest keys per subcommand:\n')
    for command, keys in REQUIRED.items():
        extra = ' (+ {} unless initial = file:...)'.format(', '.join(GRID_KEYS)) \
            if command in ('simulate', 'classify') else ''
        out.write('  {:<9} {}{}\n'.format(command, ', '.join(keys) or '-', extra))
    return out.getvalue()
