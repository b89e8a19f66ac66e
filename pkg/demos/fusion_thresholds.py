#!/usr/bin/env python3
"""Block fusion under different distance thresholds.

Detects connected components in one scene, then fuses them with a growing
center-distance threshold. Small thresholds keep every object separate;
large ones merge neighbors into multi-object blocks whose captions join
with semicolons.
"""

from multisc.scene import generate_scene, rasterize
from multisc.semantics import stub_caption
from multisc.vision import detect_blocks, fuse_blocks


def main() -> None:
    spec = generate_scene(seed=11, num_objects=5)
    image = rasterize(spec)
    boxes = detect_blocks(image)
    print(f"scene seed=11: {len(boxes)} components detected\n")
    for epsilon in (0.0, 51.0, 100.0, 400.0):
        blocks = fuse_blocks(image, boxes, epsilon)
        print(f"epsilon {epsilon:5.1f}px -> {len(blocks)} block(s)")
        for block in blocks:
            members = ",".join(str(m) for m in block.members)
            print(f"  members [{members}]  caption: {stub_caption(block, spec)}")
        print()


if __name__ == "__main__":
    main()
