import itertools
import math

import numpy as np
import pytest

from multisc.scene import CELL_NAMES, COLORS, SHAPES, SceneObject, SceneSpec
from multisc.semantics import (
    QUERY,
    UNK,
    DimensionMismatch,
    TextEmbedding,
    UnmatchedBlock,
    Vocab,
    decode_embedding,
    default_vocab,
    embed_text,
    load_table,
    make_table,
    min_row_distance,
    project_features,
    save_table,
    stub_caption,
)
from multisc.vision import BBox, Block

TABLE = make_table(default_vocab(), seed=0)


def brute_min_distance(vectors):
    best = math.inf
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            d = math.sqrt(sum((float(a) - float(b)) ** 2
                              for a, b in zip(vectors[i], vectors[j])))
            best = min(best, d)
    return best


def all_grammar_captions():
    for color, shape, cell in itertools.product(COLORS, SHAPES, CELL_NAMES):
        yield f"a {color} {shape} at {cell}"


def test_query_constant():
    assert QUERY == "<image>\nRelay a brief, clear account of the picture shown."


def test_vocab_unk_at_zero_and_unique():
    v = default_vocab()
    assert v.tokens[0] == UNK
    assert len(set(v.tokens)) == v.size
    with pytest.raises(ValueError):
        Vocab(("a", UNK))
    with pytest.raises(ValueError):
        Vocab((UNK, "a", "a"))


def test_vocab_covers_caption_grammar():
    v = default_vocab()
    for caption in all_grammar_captions():
        for tok in caption.split():
            assert tok in v.tokens


def test_table_rows_unit_norm_and_distinct():
    norms = np.linalg.norm(TABLE.vectors.astype(np.float64), axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)
    assert min_row_distance(TABLE.vectors) > 0


def test_table_deterministic_in_seed():
    again = make_table(default_vocab(), seed=0)
    assert np.array_equal(again.vectors, TABLE.vectors)
    other = make_table(default_vocab(), seed=1)
    assert not np.array_equal(other.vectors, TABLE.vectors)


def test_embed_text_rows_are_table_rows():
    emb = embed_text("a red square at center", TABLE)
    assert emb.rows.shape == (5, TABLE.dim)
    for row, tok in zip(emb.rows, "a red square at center".split()):
        assert np.array_equal(row, TABLE.vectors[TABLE.vocab.tokens.index(tok)])


def test_embed_text_empty():
    assert embed_text("", TABLE).rows.shape == (0, TABLE.dim)


def test_embed_text_oov_maps_to_unk():
    emb = embed_text("a zzz square", TABLE)
    assert np.array_equal(emb.rows[1], TABLE.vectors[0])


def test_round_trip_all_grammar_captions():
    for caption in all_grammar_captions():
        assert decode_embedding(embed_text(caption, TABLE), TABLE) == caption


def test_decode_within_noise_margin():
    # margin: any perturbation under half the minimum row distance is safe
    dmin = brute_min_distance(TABLE.vectors)
    assert dmin == pytest.approx(min_row_distance(TABLE.vectors))
    rng = np.random.default_rng(3)
    for caption in ("a red square at center", "a black triangle at top left"):
        clean = embed_text(caption, TABLE).rows.astype(np.float64)
        noise = rng.standard_normal(clean.shape)
        noise *= (0.49 * dmin) / np.linalg.norm(noise, axis=1, keepdims=True)
        noisy = TextEmbedding(dim=TABLE.dim, rows=(clean + noise).astype(np.float32))
        assert decode_embedding(noisy, TABLE) == caption


def test_decode_zero_row_ties_to_unk():
    noisy = TextEmbedding(dim=TABLE.dim, rows=np.zeros((1, TABLE.dim), np.float32))
    assert decode_embedding(noisy, TABLE) == UNK


def test_decode_dim_mismatch():
    bad = TextEmbedding(dim=8, rows=np.zeros((1, 8), np.float32))
    with pytest.raises(DimensionMismatch):
        decode_embedding(bad, TABLE)


def test_project_identity_and_zero():
    emb = embed_text("a red square at center", TABLE)
    same = project_features(emb, np.eye(TABLE.dim))
    assert np.allclose(same.rows, emb.rows)
    zero = project_features(emb, np.zeros((TABLE.dim, TABLE.dim)))
    assert not zero.rows.any()


def test_project_hand_example():
    # [1, 2] times [[1, 0], [1, 1]] = [1*1+2*1, 1*0+2*1] = [3, 2]
    emb = TextEmbedding(dim=2, rows=np.array([[1.0, 2.0]], np.float32))
    out = project_features(emb, np.array([[1.0, 0.0], [1.0, 1.0]]))
    assert np.allclose(out.rows, [[3.0, 2.0]])


def test_project_linearity():
    rng = np.random.default_rng(4)
    W = rng.standard_normal((TABLE.dim, TABLE.dim))
    X = TextEmbedding(TABLE.dim, rng.standard_normal((3, TABLE.dim)).astype(np.float32))
    Y = TextEmbedding(TABLE.dim, rng.standard_normal((3, TABLE.dim)).astype(np.float32))
    a, b = 0.7, -1.3
    mix = TextEmbedding(TABLE.dim, (a * X.rows + b * Y.rows).astype(np.float32))
    lhs = project_features(mix, W).rows
    rhs = a * project_features(X, W).rows + b * project_features(Y, W).rows
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))


def test_project_dimension_mismatch():
    emb = embed_text("a", TABLE)
    with pytest.raises(DimensionMismatch):
        project_features(emb, np.eye(TABLE.dim + 1))


def one_block(x0, y0, x1, y1):
    img = np.full((256, 256, 3), 255, np.uint8)
    return Block(bbox=BBox.from_extent(x0, y0, x1, y1), members=(0,),
                 pixels=img[y0:y1, x0:x1])


def test_stub_caption_single_object():
    spec = SceneSpec(256, 256, 0, (SceneObject("square", "red", 128, 128, 16),))
    assert stub_caption(one_block(100, 100, 160, 160), spec) == "a red square at center"


def test_stub_caption_fused_block():
    spec = SceneSpec(256, 256, 0, (
        SceneObject("square", "red", 43, 43, 16),
        SceneObject("circle", "blue", 128, 43, 23),
    ))
    got = stub_caption(one_block(0, 0, 256, 90), spec)
    assert got == "a red square at top left; a blue circle at top"


def test_stub_caption_unmatched():
    spec = SceneSpec(256, 256, 0, (SceneObject("square", "red", 43, 43, 16),))
    with pytest.raises(UnmatchedBlock):
        stub_caption(one_block(200, 200, 240, 240), spec)


def test_table_save_load_round_trip(tmp_path):
    path = tmp_path / "table.semt"
    save_table(TABLE, path)
    back = load_table(path)
    assert back.dim == TABLE.dim
    assert back.vocab == TABLE.vocab
    assert np.array_equal(back.vectors, TABLE.vectors)
    raw = path.read_bytes()
    assert raw[:4] == b"SEMT"
    assert raw[4] == 1
    assert int.from_bytes(raw[5:9], "little") == TABLE.dim
    assert int.from_bytes(raw[9:13], "little") == TABLE.vocab.size
    sidecar = (tmp_path / "table.semt.vocab").read_text(encoding="utf-8")
    assert sidecar.splitlines() == list(TABLE.vocab.tokens)


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "table.semt"
    save_table(TABLE, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(raw)
    with pytest.raises(ValueError):
        load_table(path)
