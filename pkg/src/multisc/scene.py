"""Synthetic scenes with exact ground truth.

Images everywhere in this package are numpy arrays of shape
``(height, width, 3)``, dtype uint8, row-major RGB on a white background.
A scene is a symbolic list of colored shapes placed on a 3x3 grid of cell
centers; because placement is grid-quantized and non-main objects share a
fixed half-extent, a scene can be reconstructed exactly from its captions
plus the main-object slice, which is what makes the noiseless end-to-end
identity checkable at the pixel level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

SHAPES = ("circle", "square", "triangle")

PALETTE = {
    "red": (255, 0, 0),
    "green": (0, 255, 0),
    "blue": (0, 0, 255),
    "yellow": (255, 255, 0),
    "black": (0, 0, 0),
}
COLORS = tuple(PALETTE)
BACKGROUND = (255, 255, 255)

DEFAULT_WIDTH = 256
DEFAULT_HEIGHT = 256

# 3x3 position grid, row-major; the middle cell is plain "center".
CELL_NAMES = (
    "top left", "top", "top right",
    "left", "center", "right",
    "bottom left", "bottom", "bottom right",
)

MIN_OBJECT_SIZE = 4
MAX_OBJECTS = 8
MIN_BOX_GAP = 2

# Half-extents. Every non-main object uses SIDE_OBJECT_SIZE (it matches the
# receiver's default glyph size); the main object draws from MAIN_SIZE_RANGE,
# whose lower bound keeps its area strictly above 4 * SIDE_OBJECT_SIZE**2 for
# every shape pairing.
SIDE_OBJECT_SIZE = 16
MAIN_SIZE_RANGE = (23, 28)

PLACEMENT_ATTEMPTS = 1000

# Analytic area = factor * size**2 for a shape of half-extent `size`.
SHAPE_AREA_FACTOR = {"square": 4.0, "circle": math.pi, "triangle": 2.0}


class PlacementFailure(Exception):
    """No non-overlapping placement found within the attempt budget."""


@dataclass(frozen=True)
class SceneObject:
    shape: str
    color: str
    cx: int
    cy: int
    size: int  # half-extent in pixels

    def bounds(self) -> tuple[int, int, int, int]:
        """Bounding box as half-open pixel extents (x0, y0, x1, y1)."""
        return (self.cx - self.size, self.cy - self.size,
                self.cx + self.size, self.cy + self.size)

    def area(self) -> float:
        return SHAPE_AREA_FACTOR[self.shape] * self.size * self.size


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    seed: int
    objects: tuple[SceneObject, ...]

    def main_index(self) -> int:
        areas = [o.area() for o in self.objects]
        return areas.index(max(areas))


def box_gap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    """Axis separation between two half-open boxes.

    Positive means the boxes are disjoint by that many pixels along at least
    one axis; <= 0 means they touch or overlap.
    """
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    hgap = max(bx0 - ax1, ax0 - bx1)
    vgap = max(by0 - ay1, ay0 - by1)
    return max(hgap, vgap)


def validate_scene(spec: SceneSpec) -> None:
    """Raise ValueError unless `spec` satisfies every scene invariant."""
    if not 1 <= len(spec.objects) <= MAX_OBJECTS:
        raise ValueError(f"object count {len(spec.objects)} outside 1..{MAX_OBJECTS}")
    for obj in spec.objects:
        if obj.shape not in SHAPES:
            raise ValueError(f"unknown shape {obj.shape!r}")
        if obj.color not in PALETTE:
            raise ValueError(f"unknown color {obj.color!r}")
        if obj.size < MIN_OBJECT_SIZE:
            raise ValueError(f"size {obj.size} below minimum {MIN_OBJECT_SIZE}")
        x0, y0, x1, y1 = obj.bounds()
        if x0 < 0 or y0 < 0 or x1 > spec.width or y1 > spec.height:
            raise ValueError(f"object at ({obj.cx},{obj.cy}) size {obj.size} exceeds bounds")
    for i in range(len(spec.objects)):
        for j in range(i + 1, len(spec.objects)):
            gap = box_gap(spec.objects[i].bounds(), spec.objects[j].bounds())
            if gap < MIN_BOX_GAP:
                raise ValueError(f"objects {i} and {j} closer than {MIN_BOX_GAP}px (gap={gap})")
    areas = sorted((o.area() for o in spec.objects), reverse=True)
    if len(areas) > 1 and areas[0] <= areas[1]:
        raise ValueError("main object area is not strictly maximal")


def cell_of(cx: float, cy: float, width: int, height: int) -> int:
    """Row-major index of the 3x3 grid cell containing point (cx, cy)."""
    col = min(2, int(3 * cx / width))
    row = min(2, int(3 * cy / height))
    return 3 * row + col


def cell_center(index: int, width: int, height: int) -> tuple[int, int]:
    row, col = divmod(index, 3)
    return (round((col + 0.5) * width / 3), round((row + 0.5) * height / 3))


def generate_scene(seed: int, num_objects: int,
                   width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT) -> SceneSpec:
    """Generate a deterministic scene with `num_objects` disjoint objects.

    Objects sit at distinct grid-cell centers. One object (the main one) gets
    a half-extent from MAIN_SIZE_RANGE and therefore a strictly maximal area;
    the rest use SIDE_OBJECT_SIZE. Raises PlacementFailure when no candidate
    placement passes validation within PLACEMENT_ATTEMPTS tries (possible for
    canvases too small to hold the objects).
    """
    if not 1 <= num_objects <= MAX_OBJECTS:
        raise ValueError(f"num_objects {num_objects} outside 1..{MAX_OBJECTS}")
    rng = np.random.default_rng(seed)
    for _ in range(PLACEMENT_ATTEMPTS):
        cells = rng.permutation(len(CELL_NAMES))[:num_objects]
        main_idx = int(rng.integers(num_objects))
        objects = []
        for i, cell in enumerate(cells):
            if i == main_idx:
                size = int(rng.integers(MAIN_SIZE_RANGE[0], MAIN_SIZE_RANGE[1] + 1))
            else:
                size = SIDE_OBJECT_SIZE
            cx, cy = cell_center(int(cell), width, height)
            objects.append(SceneObject(
                shape=SHAPES[rng.integers(len(SHAPES))],
                color=COLORS[rng.integers(len(COLORS))],
                cx=cx, cy=cy, size=size,
            ))
        spec = SceneSpec(width=width, height=height, seed=seed, objects=tuple(objects))
        try:
            validate_scene(spec)
        except ValueError:
            continue
        return spec
    raise PlacementFailure(
        f"no valid placement for {num_objects} objects on {width}x{height} "
        f"after {PLACEMENT_ATTEMPTS} attempts")


def shape_mask(shape: str, size: int) -> np.ndarray:
    """Boolean coverage mask of a shape, local (2*size, 2*size) coordinates.

    Square: the full box. Circle: strict interior of radius `size` around the
    box center. Triangle: apex up, rows widen linearly so the pixel count is
    exactly 2*size**2 (matching the analytic area).
    """
    n = 2 * size
    if shape == "square":
        return np.ones((n, n), dtype=bool)
    ly, lx = np.mgrid[0:n, 0:n]
    if shape == "circle":
        return (lx - size) ** 2 + (ly - size) ** 2 < size * size
    if shape == "triangle":
        halfw = (ly + 1) // 2
        dx = lx - size
        return (-halfw <= dx) & (dx < halfw)
    raise ValueError(f"unknown shape {shape!r}")


def draw_shape(canvas: np.ndarray, shape: str, color: str, cx: int, cy: int, size: int) -> None:
    """Paint a shape onto `canvas` in place, clipping at the canvas edges."""
    mask = shape_mask(shape, size)
    h, w = canvas.shape[:2]
    x0, y0 = cx - size, cy - size
    x1, y1 = cx + size, cy + size
    sx0, sy0 = max(0, -x0), max(0, -y0)
    x0, y0 = max(0, x0), max(0, y0)
    x1, y1 = min(w, x1), min(h, y1)
    if x1 <= x0 or y1 <= y0:
        return
    sub = mask[sy0:sy0 + (y1 - y0), sx0:sx0 + (x1 - x0)]
    canvas[y0:y1, x0:x1][sub] = PALETTE[color]


def rasterize(spec: SceneSpec) -> np.ndarray:
    """Render the scene: white background, each object in its palette color."""
    canvas = np.full((spec.height, spec.width, 3), 255, dtype=np.uint8)
    for obj in spec.objects:
        draw_shape(canvas, obj.shape, obj.color, obj.cx, obj.cy, obj.size)
    return canvas


def caption_for(obj: SceneObject, width: int, height: int) -> str:
    cell = CELL_NAMES[cell_of(obj.cx, obj.cy, width, height)]
    return f"a {obj.color} {obj.shape} at {cell}"


def ground_truth_captions(spec: SceneSpec) -> list[str]:
    """One caption per object, "a <color> <shape> at <cell>", in spec order."""
    return [caption_for(obj, spec.width, spec.height) for obj in spec.objects]


# ---------------------------------------------------------------------------
# serialization

def scene_to_json(spec: SceneSpec) -> str:
    doc = {
        "width": spec.width,
        "height": spec.height,
        "seed": spec.seed,
        "objects": [
            {"shape": o.shape, "color": o.color, "cx": o.cx, "cy": o.cy, "size": o.size}
            for o in spec.objects
        ],
    }
    return json.dumps(doc)


def scene_from_json(text: str) -> SceneSpec:
    doc = json.loads(text)
    spec = SceneSpec(
        width=int(doc["width"]),
        height=int(doc["height"]),
        seed=int(doc["seed"]),
        objects=tuple(
            SceneObject(shape=o["shape"], color=o["color"],
                        cx=int(o["cx"]), cy=int(o["cy"]), size=int(o["size"]))
            for o in doc["objects"]
        ),
    )
    validate_scene(spec)
    return spec


def write_ppm(image: np.ndarray, path) -> None:
    """Write an image as binary PPM (P6, maxval 255)."""
    h, w = image.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":  # comment line
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError("not a binary PPM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    pos += 1  # single whitespace after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos)
    return raster.reshape(h, w, 3).copy()
