"""Main-object segmentation, block detection, and center-distance fusion.

Detection is 4-connected component labeling over non-background pixels: the
scene generator guarantees a gap between objects, so components and objects
correspond one to one. Fusion merges detections whose centers are closer
than a threshold, under transitive closure, so the grouping is a partition
independent of pair order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .scene import BACKGROUND

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])

NLL_FLOOR = 1e-12


class NoForeground(Exception):
    """Image is entirely background; nothing to segment."""


class InvalidDistribution(Exception):
    """Probability vector fails validation."""


@dataclass(frozen=True)
class BBox:
    cx: float
    cy: float
    halfw: float
    halfh: float

    def extent(self) -> tuple[int, int, int, int]:
        """Half-open pixel extent (x0, y0, x1, y1)."""
        return (int(round(self.cx - self.halfw)), int(round(self.cy - self.halfh)),
                int(round(self.cx + self.halfw)), int(round(self.cy + self.halfh)))

    @staticmethod
    def from_extent(x0: int, y0: int, x1: int, y1: int) -> "BBox":
        return BBox(cx=(x0 + x1) / 2, cy=(y0 + y1) / 2,
                    halfw=(x1 - x0) / 2, halfh=(y1 - y0) / 2)


@dataclass(frozen=True)
class Block:
    bbox: BBox
    members: tuple[int, ...]  # indices into the detection list
    pixels: np.ndarray  # crop of the union extent


@dataclass(frozen=True)
class MainSlice:
    bbox: BBox
    pixels: np.ndarray  # crop of the tight extent
    mask: np.ndarray  # bool, same height/width as the crop


def foreground_mask(image: np.ndarray) -> np.ndarray:
    return ~np.all(image == BACKGROUND, axis=-1)


def _labeled_components(image: np.ndarray):
    labels, count = ndimage.label(foreground_mask(image), structure=FOUR_CONNECTED)
    return labels, count


def detect_blocks(image: np.ndarray) -> list[BBox]:
    """One tight BBox per 4-connected non-background component, by (cy, cx)."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an (h, w, 3) image")
    labels, count = _labeled_components(image)
    boxes = []
    for sl in ndimage.find_objects(labels):
        y, x = sl
        boxes.append(BBox.from_extent(x.start, y.start, x.stop, y.stop))
    boxes.sort(key=lambda b: (b.cy, b.cx))
    assert len(boxes) == count
    return boxes


def segment_main(image: np.ndarray) -> MainSlice:
    """Cut out the largest-area component as a crop plus per-pixel mask."""
    labels, count = _labeled_components(image)
    if count == 0:
        raise NoForeground("image has no non-background pixels")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
    main_label = int(np.argmax(sizes)) + 1
    sl = ndimage.find_objects(labels, max_label=main_label)[main_label - 1]
    y, x = sl
    return MainSlice(
        bbox=BBox.from_extent(x.start, y.start, x.stop, y.stop),
        pixels=image[sl].copy(),
        mask=labels[sl] == main_label,
    )


def center_distance(a: BBox, b: BBox) -> float:
    """Euclidean distance between box centers."""
    return math.sqrt((a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2)


def fuse_blocks(image: np.ndarray, boxes: list[BBox], epsilon: float) -> list[Block]:
    """Partition boxes into Blocks, merging centers closer than epsilon.

    Two boxes land in the same Block iff they are connected under the
    transitive closure of center_distance(a, b) < epsilon. Each Block crops
    the union extent of its members from the image. Blocks come back sorted
    by (cy, cx) of the union box; members keep input order.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    parent = list(range(len(boxes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if center_distance(boxes[i], boxes[j]) < epsilon:
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(len(boxes)):
        groups.setdefault(find(i), []).append(i)

    blocks = []
    for members in groups.values():
        extents = [boxes[i].extent() for i in members]
        x0 = min(e[0] for e in extents)
        y0 = min(e[1] for e in extents)
        x1 = max(e[2] for e in extents)
        y1 = max(e[3] for e in extents)
        blocks.append(Block(
            bbox=BBox.from_extent(x0, y0, x1, y1),
            members=tuple(members),
            pixels=image[y0:y1, x0:x1].copy(),
        ))
    blocks.sort(key=lambda b: (b.bbox.cy, b.bbox.cx))
    return blocks


def nll_loss(predicted_distribution: np.ndarray, label: int) -> float:
    """Negative log-likelihood of `label`, probability floored at 1e-12."""
    p = np.asarray(predicted_distribution, dtype=float)
    if p.ndim != 1:
        raise InvalidDistribution("distribution must be a vector")
    if np.any(p < 0) or np.any(p > 1):
        raise InvalidDistribution("entries must lie in [0, 1]")
    if abs(p.sum() - 1.0) > 1e-6:
        raise InvalidDistribution(f"entries sum to {p.sum()}, not 1")
    if not 0 <= label < p.size:
        raise InvalidDistribution(f"label {label} out of range for size {p.size}")
    return float(-math.log(max(p[label], NLL_FLOOR)))


def blocks_to_json(blocks: list[Block]) -> str:
    """Debug serialization: geometry and membership, no pixel data."""
    return json.dumps([
        {
            "bbox": {"cx": b.bbox.cx, "cy": b.bbox.cy,
                     "halfw": b.bbox.halfw, "halfh": b.bbox.halfh},
            "members": list(b.members),
        }
        for b in blocks
    ])
