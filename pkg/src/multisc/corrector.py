"""Maximum-likelihood spelling repair for channel-corrupted captions.

Each received token t' is scored against every vocabulary word c under an
explicit noise model, prior(c) * p^d * (1-p)^(L-d), where d is the character
edit distance (candidates beyond distance 2 are dropped) and L the longer of
the two lengths. The argmax word wins; with no candidate in range the token
collapses to UNK. Unlike a learned corrector this one is exactly checkable
against a brute-force likelihood scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    PAYLOAD_EMBEDDING,
    ChannelConfig,
    embedding_payload,
    parse_embedding_payload,
    transmit_payload,
)
from .semantics import UNK, EmbeddingTable, TextEmbedding, Vocab, decode_embedding

EDIT_CUTOFF = 2


@dataclass(frozen=True)
class NoiseModel:
    sub_prob: float
    prior: np.ndarray  # aligned with the vocab token order

    def __post_init__(self):
        if not 0.0 <= self.sub_prob < 1.0:
            raise ValueError(f"sub_prob {self.sub_prob} outside [0, 1)")
        if np.any(self.prior < 0) or abs(float(self.prior.sum()) - 1.0) > 1e-9:
            raise ValueError("prior must be nonnegative and sum to 1")

    @staticmethod
    def uniform(vocab: Vocab, sub_prob: float) -> "NoiseModel":
        return NoiseModel(sub_prob=sub_prob,
                          prior=np.full(vocab.size, 1.0 / vocab.size))


def edit_distance_capped(a: str, b: str, cap: int = EDIT_CUTOFF) -> int:
    """Levenshtein distance, returning cap+1 as soon as it exceeds cap."""
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        best = i
        for j, cb in enumerate(b, start=1):
            cost = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
            cur.append(cost)
            best = min(best, cost)
        if best > cap:
            return cap + 1
        prev = cur
    return min(prev[-1], cap + 1)


def _correct_token(token: str, vocab: Vocab, model: NoiseModel) -> str:
    p = model.sub_prob
    best_token = None
    best_score = -1.0
    for idx, word in enumerate(vocab.tokens):
        d = edit_distance_capped(token, word)
        if d > EDIT_CUTOFF:
            continue
        L = max(len(token), len(word))
        score = float(model.prior[idx]) * p ** d * (1.0 - p) ** (L - d)
        if score > best_score or (score == best_score and word < best_token):
            best_score = score
            best_token = word
    return best_token if best_token is not None else UNK


def correct_spelling(noisy: str, vocab: Vocab, model: NoiseModel) -> str:
    return " ".join(_correct_token(tok, vocab, model) for tok in noisy.split())


def estimate_sub_prob(snr_db: float, table: EmbeddingTable,
                      trials: int, seed: int) -> float:
    """Monte Carlo per-token decode error rate through AWGN at `snr_db`.

    Random vocabulary tokens are embedded, transmitted in one batch (rows
    are unit norm, so batch and single-token transmissions see the same
    per-sample noise), decoded, and compared.
    """
    if trials < 100:
        raise ValueError(f"trials {trials} below 100; estimate too coarse")
    rng = np.random.default_rng(seed)
    indices = rng.integers(table.vocab.size, size=trials)
    sent = TextEmbedding(dim=table.dim, rows=table.vectors[indices].copy())
    payload, lost = transmit_payload(embedding_payload(sent), PAYLOAD_EMBEDDING,
                                     ChannelConfig("awgn", snr_db, seed), stream_id=0)
    assert not lost  # AWGN has unit gain, never a deep fade
    decoded = decode_embedding(parse_embedding_payload(payload), table).split()
    truth = [table.vocab.tokens[i] for i in indices]
    errors = sum(d != t for d, t in zip(decoded, truth))
    return errors / trials
