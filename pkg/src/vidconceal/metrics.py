"""Luma PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Frame

PSNR_CAP_DB = 100.0


@dataclass(frozen=True)
class PsnrSample:
    frame_index: int
    value: float


def psnr(reconstructed: Frame, pristine: Frame) -> float:
    """10*log10(255^2 / MSE) over the luma plane, capped at 100 dB so that
    identical frames average cleanly."""
    if reconstructed.luma.shape != pristine.luma.shape:
        raise ValueError("frames must have equal dimensions")
    diff = reconstructed.luma.astype(np.float64) - pristine.luma.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(255.0 ** 2 / mse))
