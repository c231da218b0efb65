from pathlib import Path

from invoke import task

src = Path(__file__).parent / 'src'
configs = Path(__file__).parent / 'configs'


@task(help={
    'slow': 'also run the full-size reference experiments (minutes)',
    'k': 'only run tests matching this expression',
})
def test(ctx, slow=False, k=''):
    """Run the test suite from src/."""
    args = ['--runslow'] if slow else []
    if k:
        args += ['-k', repr(k)]
    with ctx.cd(str(src)):
        ctx.run('python -m pytest ' + ' '.join(args), pty=True)


def run_py(ctx, command, config=None, out='out', flags=''):
    parts = ['python', 'run.py', '--out={}'.format(Path(out).absolute())]
    if config:
        parts.append('--config={}'.format(Path(config).absolute()))
    if flags:
        parts.append(flags)
    parts.append(command)
    with ctx.cd(str(src)):
        return ctx.run(' '.join(parts), pty=True, warn=True)


@task(help={
    'config': 'experiment manifest. Default: configs/example1.cfg',
    'out': 'output directory. Default: out/<manifest name>',
})
def simulate(ctx, config=str(configs / 'example1.cfg'), out=None):
    """Run one thin-film simulation and write diagnostics, snapshots and a summary."""
    out = out or Path('out') / Path(config).stem
    result = run_py(ctx, 'simulate', config, out)
    print('exit code', result.exited)


@task(help={'out': 'output directory. Default: out/examples'})
def examples(ctx, out='out/examples'):
    """Both reference simulations plus the classification of the first datum."""
    for name in ('example1', 'example2', 'classify_example1'):
        command = 'classify' if name.startswith('classify') else 'simulate'
        run_py(ctx, command, configs / (name + '.cfg'), Path(out) / name)


@task(help={'out': 'output directory. Default: out/compare'})
def compare(ctx, out='out/compare'):
    """Proposed flow, linear backward diffusion and shock filter on the synthetic step edge."""
    run_py(ctx, 'compare', configs / 'compare.cfg', out)


@task(help={'out': 'output directory. Default: out'})
def synth(ctx, out='out'):
    """Write the synthetic step-edge test image."""
    run_py(ctx, 'synth', out=out)
