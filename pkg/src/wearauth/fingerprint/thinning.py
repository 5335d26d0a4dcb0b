"""Two-subiteration morphological thinning (Zhang-Suen).

Runs to a fixpoint, so the operation is idempotent and only ever removes
pixels.  Known quirk of the algorithm: some 2x2 blobs erode away entirely;
larger components keep a single connected skeleton.
"""

from __future__ import annotations

import numpy as np

from .image import BinaryImage

__all__ = ["thin"]

# Neighbour offsets in ring order N, NE, E, SE, S, SW, W, NW.
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _neighbour_stack(padded: np.ndarray) -> np.ndarray:
    """Stack of the 8 ring neighbours for every interior pixel."""
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    return np.stack([padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] for dy, dx in _RING])


def _thin_pass(img: np.ndarray, subiteration: int) -> np.ndarray:
    padded = np.pad(img, 1)
    nb = _neighbour_stack(padded)
    n, ne, e, se, s, sw, w, nw = nb
    count = nb.sum(axis=0)
    ring = np.concatenate([nb, nb[:1]], axis=0)
    transitions = ((ring[:-1] == 0) & (ring[1:] == 1)).sum(axis=0)
    if subiteration == 0:
        edge = (n * e * s == 0) & (e * s * w == 0)
    else:
        edge = (n * e * w == 0) & (n * s * w == 0)
    removable = (img == 1) & (count >= 2) & (count <= 6) & (transitions == 1) & edge
    return img & ~removable


def thin(binary: BinaryImage) -> BinaryImage:
    """One-pixel-wide 8-connected skeleton of a binary image."""
    img = binary.bits.astype(np.uint8)
    while True:
        before = img
        img = _thin_pass(img, 0)
        img = _thin_pass(img, 1)
        if np.array_equal(img, before):
            break
    return BinaryImage(img.astype(bool))
