"""Text and image fidelity metrics, plus CSV serialization of run reports.

BLEU is the standard corpus formula (clipped modified n-gram precisions,
geometric mean, brevity penalty) with add-epsilon smoothing so short
captions stay comparable. Image similarity is cosine over mean-centered
flattened pixels, which makes "no correlation scores zero" literally true.
Perceptual distance is delegated to an attached backend; without one it is
simply absent.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

BLEU_EPSILON = 1e-9

CSV_HEADER = "snr_db,channel,cosine,bleu,lpips,scene_seed,recovered,source"


class LengthMismatch(Exception):
    pass


class BackendUnavailable(Exception):
    """No model backend attached or the attached one cannot serve."""


@dataclass(frozen=True)
class MetricsReport:
    snr_db: float
    channel_kind: str
    cosine: float
    bleu: float
    lpips: float | None
    scene_seed: int
    recovered_objects: int
    source_objects: int

    def __post_init__(self):
        if not -1.0 <= self.cosine <= 1.0:
            raise ValueError(f"cosine {self.cosine} outside [-1, 1]")
        if not 0.0 <= self.bleu <= 1.0:
            raise ValueError(f"bleu {self.bleu} outside [0, 1]")
        if self.recovered_objects < 0 or self.source_objects < 0:
            raise ValueError("object counts must be nonnegative")


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, references: list[str], max_n: int = 4) -> float:
    """Corpus BLEU of one candidate against one or more references."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    cand = candidate.split()
    refs = [r.split() for r in references]
    if not cand or not refs:
        return 0.0

    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        counts = _ngrams(cand, n)
        total = sum(counts.values())
        if total == 0:
            continue  # candidate has no n-grams of this order
        clip = Counter()
        for ref in refs:
            ref_counts = _ngrams(ref, n)
            for gram in counts:
                clip[gram] = max(clip[gram], min(counts[gram], ref_counts[gram]))
        matched = sum(clip.values())
        numerator = matched if matched > 0 else BLEU_EPSILON
        log_sum += math.log(numerator / total)
        orders += 1

    c = len(cand)
    # closest reference length; ties go to the shorter reference
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / orders)


def cosine_similarity(a, b) -> float:
    """Cosine of mean-centered vectors; 0 when either centers to zero."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.size} vs {b.size}")
    ac = a - a.mean()
    bc = b - b.mean()
    na = np.linalg.norm(ac)
    nb = np.linalg.norm(bc)
    if na == 0.0 or nb == 0.0:
        return 0.0
    if np.array_equal(ac, bc):
        return 1.0  # exact on identical inputs; the quotient drifts by ulps
    return float(np.clip(ac @ bc / (na * nb), -1.0, 1.0))


def lpips(a: np.ndarray, b: np.ndarray, backend) -> float:
    """Perceptual distance from the attached backend; lower is better."""
    if backend is None:
        raise BackendUnavailable("no model backend attached")
    return float(backend.lpips(a, b))


# ---------------------------------------------------------------------------
# CSV serialization

def _fmt(value: float) -> str:
    return f"{value:.6f}"


def report_row(report: MetricsReport) -> str:
    lp = _fmt(report.lpips) if report.lpips is not None else ""
    return ",".join([
        f"{report.snr_db:g}",
        report.channel_kind,
        _fmt(report.cosine),
        _fmt(report.bleu),
        lp,
        str(report.scene_seed),
        str(report.recovered_objects),
        str(report.source_objects),
    ])


def summary_row(reports: list[MetricsReport]) -> str:
    """Per-SNR mean row; scene_seed column carries the marker `mean`."""
    if not reports:
        raise ValueError("no reports to summarize")
    snr = {r.snr_db for r in reports}
    kind = {r.channel_kind for r in reports}
    if len(snr) != 1 or len(kind) != 1:
        raise ValueError("summary rows cover a single (snr, channel) point")
    lp_values = [r.lpips for r in reports if r.lpips is not None]
    lp = _fmt(sum(lp_values) / len(lp_values)) if lp_values else ""
    return ",".join([
        f"{reports[0].snr_db:g}",
        reports[0].channel_kind,
        _fmt(sum(r.cosine for r in reports) / len(reports)),
        _fmt(sum(r.bleu for r in reports) / len(reports)),
        lp,
        "mean",
        str(sum(r.recovered_objects for r in reports)),
        str(sum(r.source_objects for r in reports)),
    ])
