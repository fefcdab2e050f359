"""Deterministic 64x64 piecewise-constant test phantom.

The geometry (disks and axis-aligned rectangles) is drawn from the fixed
seed 42, so every build ships the identical image.
"""

import numpy as np

from .core import Rng

PHANTOM_SIZE = 64
PHANTOM_SEED = 42


def make_phantom(size=PHANTOM_SIZE, seed=PHANTOM_SEED):
    rng = Rng(seed)
    img = np.full((size, size), 0.15)
    ii, jj = np.mgrid[0:size, 0:size]
    for _ in range(3):
        h = int(size * (0.15 + 0.25 * rng.uniform()))
        w = int(size * (0.15 + 0.25 * rng.uniform()))
        top = rng.integer(size - h)
        left = rng.integer(size - w)
        level = 0.2 + 0.7 * rng.uniform()
        img[top:top + h, left:left + w] = level
    for _ in range(3):
        radius = size * (0.06 + 0.12 * rng.uniform())
        ci = radius + rng.uniform() * (size - 2 * radius)
        cj = radius + rng.uniform() * (size - 2 * radius)
        level = 0.2 + 0.7 * rng.uniform()
        inside = (ii - ci) ** 2 + (jj - cj) ** 2 <= radius ** 2
        img[inside] = level
    return np.clip(img, 0.0, 1.0)
