import numpy as np
import pytest

from multisc import scene
from multisc.scene import (
    CELL_NAMES,
    PALETTE,
    PlacementFailure,
    SceneObject,
    SceneSpec,
    box_gap,
    cell_center,
    cell_of,
    generate_scene,
    ground_truth_captions,
    rasterize,
    read_ppm,
    scene_from_json,
    scene_to_json,
    shape_mask,
    validate_scene,
    write_ppm,
)


def brute_mask_count(shape, size):
    # independent per-pixel predicate, no vectorization shared with the library
    n = 2 * size
    count = 0
    for y in range(n):
        for x in range(n):
            if shape == "square":
                inside = True
            elif shape == "circle":
                inside = (x - size) ** 2 + (y - size) ** 2 < size * size
            elif shape == "triangle":
                halfw = (y + 1) // 2
                inside = -halfw <= (x - size) < halfw
            count += bool(inside)
    return count


def test_generate_scene_deterministic():
    a = generate_scene(seed=7, num_objects=4)
    b = generate_scene(seed=7, num_objects=4)
    assert scene_to_json(a) == scene_to_json(b)
    c = generate_scene(seed=8, num_objects=4)
    assert scene_to_json(a) != scene_to_json(c)


def test_generated_scenes_satisfy_invariants():
    for seed in range(40):
        for n in (1, 3, 5, 8):
            spec = generate_scene(seed=seed, num_objects=n)
            validate_scene(spec)  # must not raise
            assert len(spec.objects) == n


def test_main_object_strictly_largest():
    for seed in range(20):
        spec = generate_scene(seed=seed, num_objects=5)
        areas = sorted((o.area() for o in spec.objects), reverse=True)
        assert areas[0] > areas[1]


def test_objects_land_on_cell_centers():
    spec = generate_scene(seed=3, num_objects=8)
    centers = {cell_center(i, spec.width, spec.height) for i in range(9)}
    for obj in spec.objects:
        assert (obj.cx, obj.cy) in centers


def test_cell_centers_256():
    # round((col + 0.5) * 256 / 3) for col 0,1,2 -> 43, 128, 213
    assert cell_center(0, 256, 256) == (43, 43)
    assert cell_center(4, 256, 256) == (128, 128)
    assert cell_center(8, 256, 256) == (213, 213)


def test_cell_of_partitions_grid():
    assert cell_of(0, 0, 256, 256) == 0
    assert cell_of(128, 128, 256, 256) == 4
    assert cell_of(255, 255, 256, 256) == 8
    assert cell_of(200, 40, 256, 256) == 2
    for i in range(9):
        cx, cy = cell_center(i, 256, 256)
        assert cell_of(cx, cy, 256, 256) == i


def test_box_gap():
    a = (0, 0, 10, 10)
    assert box_gap(a, (12, 0, 20, 10)) == 2
    assert box_gap(a, (10, 0, 20, 10)) == 0
    assert box_gap(a, (5, 5, 20, 20)) < 0
    assert box_gap(a, (0, 13, 10, 20)) == 3


def test_validate_rejects_overlap():
    objs = (
        SceneObject("square", "red", 40, 40, 16),
        SceneObject("square", "blue", 60, 40, 23),
    )
    with pytest.raises(ValueError):
        validate_scene(SceneSpec(256, 256, 0, objs))


def test_validate_rejects_out_of_bounds():
    objs = (SceneObject("circle", "red", 5, 128, 16),)
    with pytest.raises(ValueError):
        validate_scene(SceneSpec(256, 256, 0, objs))


def test_validate_rejects_tied_main_area():
    objs = (
        SceneObject("square", "red", 43, 43, 16),
        SceneObject("square", "blue", 213, 213, 16),
    )
    with pytest.raises(ValueError):
        validate_scene(SceneSpec(256, 256, 0, objs))


def test_placement_failure_on_tiny_canvas():
    with pytest.raises(PlacementFailure):
        generate_scene(seed=0, num_objects=8, width=48, height=48)


def test_shape_mask_pixel_counts_match_brute_force():
    for shape in scene.SHAPES:
        for size in (4, 8, 16, 23):
            assert shape_mask(shape, size).sum() == brute_mask_count(shape, size)


def test_square_and_triangle_areas_exact():
    # analytic areas: square 4s^2, triangle 2s^2 (circle is ~pi s^2, not exact)
    for size in (4, 8, 16):
        assert shape_mask("square", size).sum() == 4 * size * size
        assert shape_mask("triangle", size).sum() == 2 * size * size


def test_rasterize_red_square_pixel_count():
    objs = (SceneObject("square", "red", 32, 32, 8),)
    img = rasterize(SceneSpec(256, 256, 0, objs))
    red = np.all(img == (255, 0, 0), axis=-1)
    assert red.sum() == 256
    assert img.shape == (256, 256, 3)
    assert img.dtype == np.uint8
    white = np.all(img == 255, axis=-1)
    assert red.sum() + white.sum() == 256 * 256


def test_rasterize_background_is_white():
    spec = generate_scene(seed=11, num_objects=3)
    img = rasterize(spec)
    assert tuple(img[0, 0]) == (255, 255, 255)
    colored = ~np.all(img == 255, axis=-1)
    expected = sum(shape_mask(o.shape, o.size).sum() for o in spec.objects)
    assert colored.sum() == expected


def test_captions_name_color_shape_cell():
    objs = (
        SceneObject("square", "red", 43, 43, 16),
        SceneObject("circle", "blue", 128, 128, 23),
    )
    spec = SceneSpec(256, 256, 0, objs)
    assert ground_truth_captions(spec) == [
        "a red square at top left",
        "a blue circle at center",
    ]


def test_all_cells_have_distinct_names():
    assert len(set(CELL_NAMES)) == 9


def test_json_round_trip():
    spec = generate_scene(seed=21, num_objects=6)
    again = scene_from_json(scene_to_json(spec))
    assert again == spec


def test_json_rejects_invalid_scene():
    objs = (SceneObject("square", "red", 43, 43, 2),)  # size below minimum
    bad = scene_to_json(SceneSpec(256, 256, 0, objs))
    with pytest.raises(ValueError):
        scene_from_json(bad)


def test_ppm_round_trip(tmp_path):
    img = rasterize(generate_scene(seed=5, num_objects=4))
    path = tmp_path / "scene.ppm"
    write_ppm(img, path)
    back = read_ppm(path)
    assert np.array_equal(back, img)
    raw = path.read_bytes()
    assert raw.startswith(b"P6\n256 256\n255\n")


def test_palette_colors_distinct_and_not_white():
    values = list(PALETTE.values())
    assert len(set(values)) == len(values)
    assert (255, 255, 255) not in values
