"""Synthetic test pictures standing in for photographs."""
from __future__ import annotations
from typing import NamedTuple, Optional, Tuple

import numpy as np

from filmlab.imaging.codec import ImageGray, make_image
from filmlab.imaging.metrics import Region

MARGIN = 4
EDGE_HALF_WIDTH = 6
FLAT_GAP = 8


class StepEdge(NamedTuple):
    image: ImageGray
    edge_region: Region
    flat_regions: Tuple[Region, Region]
    edge_column: int


def smoothstep(phase: np.ndarray) -> np.ndarray:
    phase = np.clip(phase, 0.0, 1.0)
    return phase * phase * (3 - 2 * phase)


def frame_taper(height: int, width: int, taper: int) -> np.ndarray:
    """Linear ramp from black at the frame to 1 at `taper` pixels inside."""
    if taper <= 0:
        return np.ones((height, width))
    rows = np.minimum(np.arange(height), np.arange(height)[::-1]) + 1
    cols = np.minimum(np.arange(width), np.arange(width)[::-1]) + 1
    return np.clip(np.minimum.outer(rows, cols) / taper, 0.0, 1.0)


def step_edge_image(width: int = 96, height: int = 96, low: float = 0.25, high: float = 0.75, ramp: int = 3,
                    noise: float = 0.0, rng: Optional[np.random.Generator] = None, taper: int = 0,
                    offset: int = 0) -> StepEdge:
    """
    Two half-planes joined along a vertical edge by a `ramp`-pixel smoothstep,
    with optional Gaussian noise in the flat parts and an optional taper to
    black at the frame.
    """
    edge = width // 2 + offset
    columns = np.arange(width)
    profile = low + (high - low) * smoothstep((columns - edge + (ramp + 1) / 2) / (ramp + 1))
    values = np.tile(profile, (height, 1))
    if noise:
        rng = rng if rng is not None else np.random.default_rng(0)
        flat = np.abs(columns - edge) > ramp // 2
        values = values + flat[None, :] * rng.normal(0.0, noise, values.shape)
    values = np.clip(values * frame_taper(height, width, taper), 0.0, 1.0)

    inner = max(taper, 0) + MARGIN
    rows = slice(inner, height - inner)
    edge_region = (rows, slice(edge - EDGE_HALF_WIDTH, edge + EDGE_HALF_WIDTH + 1))
    flat_regions = ((rows, slice(inner, edge - FLAT_GAP)),
                    (rows, slice(edge + FLAT_GAP + 1, width - inner)))
    return StepEdge(make_image(values), edge_region, flat_regions, edge)


def blob_image(width: int = 64, height: int = 64, center: Tuple[float, float] = (32.0, 32.0),
               sigma: float = 4.0, peak: float = 0.8) -> ImageGray:
    """A Gaussian blob on black, centered at (row, column)."""
    rows, cols = np.mgrid[0:height, 0:width]
    r2 = (rows - center[0]) ** 2 + (cols - center[1]) ** 2
    return make_image(peak * np.exp(-r2 / (2 * sigma * sigma)))
