from __future__ import annotations
from typing import Tuple

import numpy as np

from filmlab.imaging.codec import ImageGray

Region = Tuple[slice, slice]


def _values(img) -> np.ndarray:
    return img.intensities if isinstance(img, ImageGray) else np.asarray(img, dtype=np.float64)


def gradient_magnitude(img) -> np.ndarray:
    """Central-difference |grad I| in pixel units (one-sided on the border)."""
    gy, gx = np.gradient(_values(img))
    return np.hypot(gx, gy)


def edge_gain(before, after, region: Region) -> float:
    """max |grad| inside region after the filter over the same maximum before it."""
    return float(gradient_magnitude(after)[region].max() / gradient_magnitude(before)[region].max())


def flat_variance_ratio(before, after, region: Region) -> float:
    return float(_values(after)[region].var() / _values(before)[region].var())


def output_range(values) -> Tuple[float, float]:
    values = _values(values)
    return float(values.min()), float(values.max())


def contrast_mad(img) -> float:
    """Mean absolute deviation from the global mean intensity."""
    values = _values(img)
    return float(np.abs(values - values.mean()).mean())
