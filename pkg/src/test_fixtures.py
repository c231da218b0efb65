import os
import tempfile

import pytest

from filmlab.storage import atomic_write, write_tff


def test_scratch_files_reports_leftovers(scratch_files):
    fd, name = tempfile.mkstemp()
    os.close(fd)
    assert [left for left, _ in scratch_files.leftovers()] == [name]
    with pytest.raises(AssertionError):
        scratch_files.assert_removed()
    os.unlink(name)
    assert scratch_files.leftovers() == []


def test_scratch_files_needs_a_write(scratch_files):
    with pytest.raises(AssertionError):
        scratch_files.assert_removed()

    with pytest.raises(AssertionError):
        with scratch_files:
            pass


def test_snapshot_write_leaves_no_scratch(scratch_files, tmpdir, random_field):
    with scratch_files:
        write_tff(str(tmpdir.join('snapshot_t0.0000.tff')), random_field)
        atomic_write(str(tmpdir.join('summary.txt')), b'status = completed\n')
    assert len(scratch_files.created) == 2
    assert tmpdir.join('summary.txt').read_binary() == b'status = completed\n'


def test_cli_options_restored(cli_options):
    cli_options.seed = 12345
    assert cli_options.seed == 12345
    assert cli_options.logging_config == ''
