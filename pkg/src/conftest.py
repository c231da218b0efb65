import functools
import os
import tempfile
import traceback

import numpy as np
import pytest
from tornado.options import options

import filmlab.cli  # noqa: F401 (defines the global flags)
from filmlab.grid import field_from_array, field_from_function, make_grid
from filmlab.spectral import dst_forward, dst_forward_direct, dst_inverse, dst_inverse_direct


@pytest.fixture
def grid():
    return make_grid(10.0, 10.0, 31, 31)


@pytest.fixture
def rect_grid():
    return make_grid(3.0, 2.0, 12, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def smooth_field(grid):
    """A smooth bump vanishing on the boundary."""
    return field_from_function(grid, lambda x, y: np.sin(np.pi * x / 10) ** 2 * np.sin(np.pi * y / 10) ** 3)


@pytest.fixture
def random_field(rect_grid, rng):
    return field_from_array(rect_grid, rng.standard_normal(rect_grid.shape))


@pytest.fixture
def transforms(request):
    if request.param == 'fast':
        return dst_forward, dst_inverse
    return dst_forward_direct, dst_inverse_direct


@pytest.fixture()
def cli_options(tmpdir):
    original_settings = dict(options.items())
    options.logging_config = ''
    options.out = str(tmpdir.join('out'))
    options.config = None
    yield options
    for key, value in original_settings.items():
        setattr(options, key, value)


class ScratchFiles:
    """Records the mkstemp() files made by atomic writes and checks none outlive the write."""

    def __init__(self):
        self.created = []

    def record(self, name):
        self.created.append((name, traceback.format_stack(limit=6)))

    def reset(self):
        self.created.clear()

    def leftovers(self):
        return [(name, stack) for name, stack in self.created if os.path.exists(name)]

    def assert_removed(self):
        assert self.created, 'no scratch file was written'
        for name, stack in self.leftovers():
            print(''.join(stack))
            assert not os.path.exists(name)

    def __enter__(self):
        self.reset()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.assert_removed()


@pytest.fixture
def scratch_files(monkeypatch):
    tracker = ScratchFiles()
    mkstemp = tempfile.mkstemp

    @functools.wraps(mkstemp)
    def recording_mkstemp(*args, **kwargs):
        fd, name = mkstemp(*args, **kwargs)
        tracker.record(name)
        return fd, name

    monkeypatch.setattr(tempfile, 'mkstemp', recording_mkstemp)
    return tracker


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size reference runs, enabled with --runslow')


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true",
                     help="also run the full-size reference experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


def pytest_generate_tests(metafunc):
    if 'transforms' in metafunc.fixturenames:
        metafunc.parametrize('transforms', ['fast', 'direct'], indirect=True)
