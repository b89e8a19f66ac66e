#!/usr/bin/env python3
"""Scene generator gallery.

Builds a handful of random scenes, prints their ground-truth captions, and
saves each raster as a PPM next to this script. Shapes sit on a 3x3 cell
grid; exactly one object per scene is drawn large (the main object), the
rest at glyph size.
"""

from pathlib import Path

from multisc.scene import generate_scene, ground_truth_captions, rasterize, write_ppm

OUT = Path(__file__).parent / "out"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for seed in (1, 2, 3, 4):
        spec = generate_scene(seed=seed, num_objects=3 + seed % 3)
        path = OUT / f"scene_{seed}.ppm"
        write_ppm(rasterize(spec), path)
        main_obj = spec.objects[spec.main_index()]
        print(f"scene seed={seed}: {len(spec.objects)} objects -> {path}")
        print(f"  main object: {main_obj.color} {main_obj.shape} "
              f"(size {main_obj.size})")
        for caption in ground_truth_captions(spec):
            print(f"  {caption}")
        print()


if __name__ == "__main__":
    main()
