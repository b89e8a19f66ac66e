import itertools
import math

import numpy as np
import pytest

from multisc.metrics import (
    CSV_HEADER,
    BackendUnavailable,
    LengthMismatch,
    MetricsReport,
    bleu,
    cosine_similarity,
    lpips,
    report_row,
    summary_row,
)


def brute_bleu(candidate, references, max_n=4):
    # independent implementation: dict-based counts, explicit loops
    cand = candidate.split()
    refs = [r.split() for r in references]
    if not cand or not refs:
        return 0.0
    logs = []
    for n in range(1, max_n + 1):
        grams = [tuple(cand[i:i + n]) for i in range(len(cand) - n + 1)]
        if not grams:
            continue
        matched = 0
        for gram in set(grams):
            have = grams.count(gram)
            allowed = 0
            for ref in refs:
                rgrams = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
                allowed = max(allowed, rgrams.count(gram))
            matched += min(have, allowed)
        num = matched if matched else 1e-9
        logs.append(math.log(num / len(grams)))
    c = len(cand)
    best = None
    for ref in refs:
        key = (abs(len(ref) - c), len(ref))
        if best is None or key < best:
            best = key
    r = best[1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(logs) / len(logs))


def test_bleu_identity():
    for text in ("a red square at center", "a", "a blue circle at top left"):
        assert bleu(text, [text]) == pytest.approx(1.0)


def test_bleu_empty_candidate_scores_zero():
    assert bleu("", ["a red square"]) == 0.0


def test_bleu_zero_overlap_is_epsilon_small():
    score = bleu("x y z w", ["a red square at center"])
    assert 0.0 <= score < 1e-8


def test_bleu_short_candidate_brevity_penalty():
    # p1 = p2 = 1 and BP = exp(1 - 5/3)
    score = bleu("a red square", ["a red square at center"], max_n=2)
    assert score == pytest.approx(0.513417119032592)


def test_bleu_clipping_limits_repeats():
    # "the the the" vs reference with two "the": clipped unigrams 2/3
    score = bleu("the the the", ["the cat the"], max_n=1)
    assert score == pytest.approx(2.0 / 3.0)


def test_bleu_reference_order_invariant():
    refs = ["a red square at center", "a blue circle at top", "a red circle"]
    cand = "a red circle at top"
    scores = {bleu(cand, list(p)) for p in itertools.permutations(refs)}
    assert len(scores) == 1


def test_bleu_matches_independent_implementation():
    rng = np.random.default_rng(8)
    words = "a red green blue square circle at top left center".split()
    for _ in range(200):
        cand = " ".join(rng.choice(words, size=rng.integers(1, 9)))
        refs = [" ".join(rng.choice(words, size=rng.integers(1, 9)))
                for _ in range(rng.integers(1, 4))]
        assert bleu(cand, refs) == pytest.approx(brute_bleu(cand, refs))


def test_bleu_range():
    rng = np.random.default_rng(9)
    words = ["a", "b", "c", "d"]
    for _ in range(100):
        cand = " ".join(rng.choice(words, size=rng.integers(1, 7)))
        refs = [" ".join(rng.choice(words, size=rng.integers(1, 7)))]
        assert 0.0 <= bleu(cand, refs) <= 1.0


def test_cosine_self_similarity():
    x = np.array([1.0, 5.0, -2.0, 0.5])
    assert cosine_similarity(x, x) == pytest.approx(1.0)


def test_cosine_reversed_ramp():
    assert cosine_similarity([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_cosine_centered_orthogonal():
    a = [1.0, -1.0, 1.0, -1.0]
    b = [1.0, 1.0, -1.0, -1.0]
    assert cosine_similarity(a, b) == pytest.approx(0.0)


def test_cosine_constant_vector_scores_zero():
    assert cosine_similarity([5.0, 5.0, 5.0], [1.0, 2.0, 3.0]) == 0.0
    assert cosine_similarity([1.0, 2.0, 3.0], [0.0, 0.0, 0.0]) == 0.0


def test_cosine_symmetry_and_scale_invariance():
    rng = np.random.default_rng(10)
    for _ in range(20):
        a = rng.standard_normal(50)
        b = rng.standard_normal(50)
        assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-12)
        assert cosine_similarity(a, 2 * b) == pytest.approx(cosine_similarity(a, b), abs=1e-9)


def test_cosine_length_mismatch():
    with pytest.raises(LengthMismatch):
        cosine_similarity([1, 2], [1, 2, 3])


def test_cosine_on_images():
    img = np.zeros((8, 8, 3), np.uint8)
    img[:4] = 200
    assert cosine_similarity(img, img) == pytest.approx(1.0)
    shifted = img.astype(np.int16) + 30  # constant offset, same centered shape
    assert cosine_similarity(img, shifted) == pytest.approx(1.0)


class FakeBackend:
    def lpips(self, a, b):
        return 0.0 if np.array_equal(a, b) else 0.5


def test_lpips_delegates_to_backend():
    img = np.zeros((4, 4, 3), np.uint8)
    other = img.copy()
    other[0, 0] = 9
    assert lpips(img, img.copy(), FakeBackend()) == 0.0
    assert lpips(img, other, FakeBackend()) == 0.5


def test_lpips_requires_backend():
    img = np.zeros((4, 4, 3), np.uint8)
    with pytest.raises(BackendUnavailable):
        lpips(img, img, None)


def make_report(**overrides):
    base = dict(snr_db=9.0, channel_kind="awgn", cosine=0.5, bleu=0.75,
                lpips=None, scene_seed=7, recovered_objects=2, source_objects=3)
    base.update(overrides)
    return MetricsReport(**base)


def test_report_validation():
    with pytest.raises(ValueError):
        make_report(cosine=1.5)
    with pytest.raises(ValueError):
        make_report(bleu=-0.1)


def test_report_row_format():
    row = report_row(make_report())
    assert row == "9,awgn,0.500000,0.750000,,7,2,3"
    assert len(row.split(",")) == len(CSV_HEADER.split(","))
    with_lpips = report_row(make_report(lpips=0.125))
    assert with_lpips.split(",")[4] == "0.125000"


def test_summary_row_means():
    reports = [make_report(cosine=0.4, bleu=0.6), make_report(cosine=0.8, bleu=1.0)]
    row = summary_row(reports)
    assert row == "9,awgn,0.600000,0.800000,,mean,4,6"
    with pytest.raises(ValueError):
        summary_row([make_report(), make_report(snr_db=12.0)])
