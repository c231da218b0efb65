"""
Grayscale image codec.

PGM (P5, maxval 255) is read and written byte for byte here: v = byte / 255
on read, round(v * 255) clamped to [0, 255] on write. PNG goes through Pillow.
"""
from __future__ import annotations
from typing import NamedTuple

import io
import logging
import re
from pathlib import Path

import numpy as np
from PIL import Image

from filmlab.storage import atomic_write
from filmlab.util import ImageFormatError

logger = logging.getLogger(__name__)

MAXVAL = 255
_TOKEN = re.compile(rb'\s*(?:#[^\n]*\n\s*)*(\S+)')


class ImageGray(NamedTuple):
    """Intensities in [0, 1], indexed [row, column]."""
    intensities: np.ndarray

    @property
    def height(self) -> int:
        return self.intensities.shape[0]

    @property
    def width(self) -> int:
        return self.intensities.shape[1]


def make_image(intensities, clamp: bool = False) -> ImageGray:
    values = np.array(intensities, dtype=np.float64)
    if values.ndim != 2 or 0 in values.shape:
        raise ImageFormatError('image must be a non-empty 2D array, got shape {}'.format(values.shape))
    if not np.isfinite(values).all():
        raise ImageFormatError('image intensities must be finite')
    if clamp:
        values = np.clip(values, 0.0, 1.0)
    elif values.min() < 0 or values.max() > 1:
        raise ImageFormatError('intensities must lie in [0, 1], got [{:.6g}, {:.6g}]'.format(
            values.min(), values.max()))
    values.setflags(write=False)
    return ImageGray(values)


def to_bytes(img: ImageGray) -> np.ndarray:
    return np.clip(np.rint(img.intensities * MAXVAL), 0, MAXVAL).astype(np.uint8)


def encode_pgm(img: ImageGray) -> bytes:
    header = 'P5\n{} {}\n{}\n'.format(img.width, img.height, MAXVAL).encode('ascii')
    return header + to_bytes(img).tobytes()


def decode_pgm(blob: bytes) -> ImageGray:
    fields, pos = [], 0
    for _ in range(4):
        match = _TOKEN.match(blob, pos)
        if match is None:
            raise ImageFormatError('truncated PGM header')
        fields.append(match.group(1))
        pos = match.end()
    if fields[0] != b'P5':
        raise ImageFormatError('not a binary PGM (magic {!r})'.format(fields[0]))
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise ImageFormatError('malformed PGM header {!r}'.format(b' '.join(fields)))
    if not (width > 0 and height > 0 and 0 < maxval <= MAXVAL):
        raise ImageFormatError('unsupported PGM geometry {}x{} maxval {}'.format(width, height, maxval))
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    if len(blob) - pos < width * height:
        raise ImageFormatError('PGM raster holds {} bytes, expected {}'.format(len(blob) - pos, width * height))
    raster = np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=pos)
    if maxval != MAXVAL:
        logger.warning('PGM maxval %d rescaled to [0, 1]', maxval)
    return make_image(raster.reshape(height, width) / maxval, clamp=True)


def read_pgm(path) -> ImageGray:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path, img: ImageGray):
    atomic_write(path, encode_pgm(img))


def read_png(path) -> ImageGray:
    try:
        with Image.open(path) as source:
            raster = np.asarray(source.convert('L'), dtype=np.float64)
    except (OSError, ValueError) as e:
        raise ImageFormatError('cannot read {}: {}'.format(path, e))
    return make_image(raster / MAXVAL)


def write_png(path, img: ImageGray):
    buffer = io.BytesIO()
    Image.fromarray(to_bytes(img), mode='L').save(buffer, format='PNG')
    atomic_write(path, buffer.getvalue())


def read_image(path) -> ImageGray:
    path = Path(path)
    if path.suffix.lower() == '.png':
        return read_png(path)
    if path.suffix.lower() in ('.pgm', '.pnm'):
        return read_pgm(path)
    with open(path, 'rb') as f:
        magic = f.read(2)
    if magic == b'P5':
        return read_pgm(path)
    return read_png(path)


def write_image(path, img: ImageGray):
    if Path(path).suffix.lower() == '.png':
        write_png(path, img)
    else:
        write_pgm(path, img)
    logger.info('wrote %dx%d image to %s', img.width, img.height, path)
