from __future__ import annotations
from typing import Iterable, Sequence

import csv
import io
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from filmlab.grid import Field, field_from_array, make_grid
from filmlab.util import LabError

logger = logging.getLogger(__name__)

TFF_MAGIC = 'TFF1'


class SnapshotFormatError(LabError):
    pass


def atomic_write(destination, payload: bytes):
    """Write *payload* to a temporary file next to *destination*, then rename(2) it into place."""
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(destination.parent), prefix='.' + destination.name)
    try:
        with open(fd, 'wb') as out:
            out.write(payload)
        os.replace(tmp, str(destination))
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    logger.debug('wrote %s (%d bytes)', destination, len(payload))
    return destination


def encode_tff(field: Field) -> bytes:
    g = field.grid
    header = '{} {} {} {!r} {!r}\n'.format(TFF_MAGIC, g.Nx, g.Ny, g.Lx, g.Ly).encode('ascii')
    # j outer, i inner: the transpose in C order
    return header + np.ascontiguousarray(field.values.T, dtype='<f8').tobytes()


def decode_tff(blob: bytes) -> Field:
    head, sep, payload = blob.partition(b'\n')
    if not sep:
        raise SnapshotFormatError('missing TFF1 header line')
    parts = head.decode('ascii', errors='replace').split()
    if len(parts) != 5 or parts[0] != TFF_MAGIC:
        raise SnapshotFormatError('bad TFF1 header {!r}'.format(head[:80]))
    try:
        nx, ny = int(parts[1]), int(parts[2])
        lx, ly = float(parts[3]), float(parts[4])
    except ValueError:
        raise SnapshotFormatError('bad TFF1 header {!r}'.format(head[:80]))
    grid = make_grid(lx, ly, nx, ny)
    if len(payload) != 8 * nx * ny:
        raise SnapshotFormatError('expected {} payload bytes, found {}'.format(8 * nx * ny, len(payload)))
    values = np.frombuffer(payload, dtype='<f8').reshape(ny, nx).T
    return field_from_array(grid, values)


def write_tff(path, field: Field):
    return atomic_write(path, encode_tff(field))


def read_tff(path) -> Field:
    with open(str(path), 'rb') as f:
        return decode_tff(f.read())


def format_real(value) -> str:
    """Shortest text that reads back as the same double."""
    return repr(float(value))


def encode_csv(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_real(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue().encode('utf-8')


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    return atomic_write(path, encode_csv(header, rows))


def read_csv(path):
    with open(str(path), newline='') as f:
        reader = csv.reader(f)
        header = next(reader)
        return header, [row for row in reader]
