#
# render.py
#
# Frames to 8-bit grayscale pixels and binary PGM (P5) files. A value v maps to
# rint((clip(v, -1, 1) + 1) / 2 * 255), so -1 is black, 0 mid-gray (128) and 1 white.
#

from __future__ import annotations
import os

import numpy as np
from PIL import Image

from models import FrameStats
from .frames import Frame


def frame_to_pixels(frame: Frame) -> np.ndarray:
    scaled = (np.clip(frame.values, -1.0, 1.0) + 1.0) / 2.0 * 255.0
    return np.rint(scaled).astype(np.uint8)

def write_pgm(frame: Frame, path: str):
    """
    Writes a frame as a binary PGM with maxval 255.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    Image.fromarray(frame_to_pixels(frame)).save(path, format="PPM")

def frame_file_name(t: int) -> str:
    return f"frame_{t}.pgm"

def frame_stats(frame: Frame) -> FrameStats:
    magnitudes = np.abs(frame.values)
    if magnitudes.size == 0:
        return FrameStats(t=frame.t)
    return FrameStats(
        t=frame.t,
        mean_abs=float(np.mean(magnitudes)),
        max_abs=float(np.max(magnitudes)),
        rms=float(np.sqrt(np.mean(frame.values * frame.values)))
    )
