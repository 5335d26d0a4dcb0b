"""Crossing-number minutiae detection on thinned skeletons.

A skeleton pixel with exactly one ridge neighbour is an ending and one with
three is a bifurcation; the crossing number (half the sum of absolute
differences around the 8-neighbourhood ring) classifies both in one pass.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .enhance import enhance
from .image import MIN_PIPELINE_SIZE, BinaryImage, GrayImage
from .segmentation import BinarizeMethod, binarize
from .thinning import thin

__all__ = [
    "MinutiaKind",
    "TemplateAlgorithm",
    "Minutia",
    "Template",
    "crossing_number",
    "extract_template",
    "DEFAULT_BORDER_MARGIN",
    "DEFAULT_MIN_DISTANCE",
]

DEFAULT_BORDER_MARGIN = 10   # px; minutiae closer to an edge are discarded
DEFAULT_MIN_DISTANCE = 8.0   # px; both members of any closer pair are discarded
_TRACE_DEPTH = 5             # skeleton pixels followed per branch for the angle


class MinutiaKind(str, enum.Enum):
    ENDING = "ending"
    BIFURCATION = "bifurcation"


class TemplateAlgorithm(str, enum.Enum):
    HIGH_ACCURACY = "high_accuracy"
    LIGHTWEIGHT = "lightweight"


@dataclass(frozen=True)
class Minutia:
    x: int
    y: int
    angle: float          # ridge direction, radians in [0, 2*pi)
    kind: MinutiaKind

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise ValueError("minutia coordinates must be non-negative")
        if not 0.0 <= self.angle < 2.0 * np.pi:
            raise ValueError(f"angle must lie in [0, 2*pi), got {self.angle}")


@dataclass(frozen=True)
class Template:
    """Extracted minutiae set; minutiae are kept sorted by (y, x) so that
    serialization is deterministic."""

    width: int
    height: int
    algorithm: TemplateAlgorithm
    minutiae: tuple[Minutia, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("template dimensions must be positive")
        for m in self.minutiae:
            if m.x >= self.width or m.y >= self.height:
                raise ValueError(f"minutia ({m.x},{m.y}) outside {self.width}x{self.height}")
        ordered = tuple(sorted(self.minutiae, key=lambda m: (m.y, m.x, m.kind.value)))
        object.__setattr__(self, "minutiae", ordered)

    def __len__(self) -> int:
        return len(self.minutiae)


_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def crossing_number(skeleton: BinaryImage, x: int, y: int) -> int:
    """Crossing number of a ridge pixel: 1 ending, 2 continuation, 3 bifurcation."""
    bits = skeleton.bits
    if not (0 < x < skeleton.width - 1 and 0 < y < skeleton.height - 1):
        raise ValueError(f"({x},{y}) is on the image border")
    if not bits[y, x]:
        raise ValueError(f"({x},{y}) is not a ridge pixel")
    ring = [int(bits[y + dy, x + dx]) for dy, dx in _RING]
    ring.append(ring[0])
    return sum(abs(a - b) for a, b in zip(ring[:-1], ring[1:])) // 2


def _crossing_number_map(bits: np.ndarray) -> np.ndarray:
    """Crossing numbers for all interior ridge pixels (0 elsewhere)."""
    padded = np.pad(bits.astype(np.int8), 1)
    h, w = bits.shape
    ring = [padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] for dy, dx in _RING]
    ring.append(ring[0])
    cn = np.zeros((h, w), dtype=np.int8)
    for a, b in zip(ring[:-1], ring[1:]):
        cn += np.abs(a - b)
    cn //= 2
    cn[~bits] = 0
    cn[0, :] = cn[-1, :] = 0
    cn[:, 0] = cn[:, -1] = 0
    return cn


def _trace_branch(bits: np.ndarray, start: tuple[int, int], first: tuple[int, int],
                  depth: int = _TRACE_DEPTH) -> tuple[int, int]:
    """Follow a skeleton branch from ``start`` through ``first``; return the
    endpoint reached within ``depth`` steps."""
    visited = {start, first}
    cur = first
    for _ in range(depth - 1):
        y, x = cur
        nxt = None
        for dy, dx in _RING:
            ny, nx_ = y + dy, x + dx
            if (0 <= ny < bits.shape[0] and 0 <= nx_ < bits.shape[1]
                    and bits[ny, nx_] and (ny, nx_) not in visited):
                if nxt is not None:
                    nxt = None  # branch splits again; stop at the junction
                    break
                nxt = (ny, nx_)
        if nxt is None:
            break
        visited.add(nxt)
        cur = nxt
    return cur


def _minutia_angle(bits: np.ndarray, x: int, y: int) -> float:
    """Ridge direction at a minutia from short branch traces.

    Endings point along their single branch; bifurcations point away from
    the mean of their three branch directions (i.e. along the merged ridge).
    """
    branches = []
    for dy, dx in _RING:
        ny, nx = y + dy, x + dx
        if 0 <= ny < bits.shape[0] and 0 <= nx < bits.shape[1] and bits[ny, nx]:
            branches.append((ny, nx))
    vecs = []
    for b in branches:
        ey, ex = _trace_branch(bits, (y, x), b)
        norm = float(np.hypot(ex - x, ey - y))
        if norm > 0:
            vecs.append(((ex - x) / norm, (ey - y) / norm))
    if not vecs:
        return 0.0
    if len(vecs) == 1:
        vx, vy = vecs[0]
    else:
        vx = -sum(v[0] for v in vecs)
        vy = -sum(v[1] for v in vecs)
        if vx == 0 and vy == 0:
            return 0.0
    return float(np.mod(np.arctan2(vy, vx), 2.0 * np.pi))


def _scan_minutiae(skeleton: BinaryImage) -> list[Minutia]:
    bits = skeleton.bits
    cn = _crossing_number_map(bits)
    minutiae = []
    for kind, value in ((MinutiaKind.ENDING, 1), (MinutiaKind.BIFURCATION, 3)):
        ys, xs = np.nonzero(cn == value)
        for y, x in zip(ys.tolist(), xs.tolist()):
            angle = _minutia_angle(bits, x, y)
            minutiae.append(Minutia(x=x, y=y, angle=angle, kind=kind))
    return minutiae


def _filter_false_minutiae(minutiae: list[Minutia], width: int, height: int,
                           border_margin: int, min_distance: float) -> list[Minutia]:
    kept = [m for m in minutiae
            if border_margin <= m.x < width - border_margin
            and border_margin <= m.y < height - border_margin]
    if len(kept) < 2:
        return kept
    xy = np.array([[m.x, m.y] for m in kept], dtype=np.float64)
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    close = (dist < min_distance).any(axis=1)
    return [m for m, c in zip(kept, close) if not c]


def extract_template(img: GrayImage, algorithm: TemplateAlgorithm,
                     border_margin: int = DEFAULT_BORDER_MARGIN,
                     min_distance: float = DEFAULT_MIN_DISTANCE) -> Template:
    """Extract a minutiae template from a gray image.

    The high-accuracy route enhances, binarizes adaptively, thins, scans and
    then removes border artifacts and close pairs; the lightweight route is
    a bare global-threshold / thin / scan chain with no cleanup.
    """
    if img.width < MIN_PIPELINE_SIZE or img.height < MIN_PIPELINE_SIZE:
        raise ValueError(f"image must be at least {MIN_PIPELINE_SIZE}px on each side")
    if algorithm is TemplateAlgorithm.HIGH_ACCURACY:
        work = enhance(img)
        binary = binarize(work, BinarizeMethod.ADAPTIVE_MEAN)
        skeleton = thin(binary)
        minutiae = _scan_minutiae(skeleton)
        minutiae = _filter_false_minutiae(minutiae, img.width, img.height,
                                          border_margin, min_distance)
    else:
        binary = binarize(img, BinarizeMethod.GLOBAL_OTSU)
        skeleton = thin(binary)
        minutiae = _scan_minutiae(skeleton)
    return Template(width=img.width, height=img.height, algorithm=algorithm,
                    minutiae=tuple(minutiae))
