#!/usr/bin/env python3
"""Conditioning kernel: cross-attention and the text/image mix.

Shows the scaled dot-product attention core on small matrices: rows of
the attention matrix sum to one, keys compete for each query, and the
lambda mixing knob fades the image branch in and out. At lambda zero the
output is the text branch untouched, bit for bit.
"""

import numpy as np

from multisc.genkernel import (
    AttnWeights,
    Feature,
    LatentQuery,
    attention_matrix,
    combine_outputs,
    cross_attention,
)


def main() -> None:
    rng = np.random.default_rng(3)
    Z = LatentQuery(rng.standard_normal((3, 4)))
    C = Feature(rng.standard_normal((5, 4)), "text")
    W = AttnWeights(W_q=rng.standard_normal((4, 4)),
                    W_k=rng.standard_normal((4, 4)),
                    W_v=rng.standard_normal((4, 4)))

    A = attention_matrix(Z, C, W)
    print("attention matrix (3 queries x 5 keys):")
    print(np.array_str(A, precision=4, suppress_small=True))
    print(f"row sums: {A.sum(axis=1)}\n")

    text_out = cross_attention(Z, C, W)
    image_out = cross_attention(Z, Feature(rng.standard_normal((5, 4)), "image"), W)
    for lam in (0.0, 0.25, 0.5, 1.0):
        mixed = combine_outputs(text_out, image_out, lam)
        tag = "  (text branch, bit-exact)" if lam == 0.0 else ""
        print(f"lambda {lam:4.2f}: first row {np.round(mixed[0], 4)}{tag}")
    assert combine_outputs(text_out, image_out, 0.0).tobytes() == text_out.tobytes()


if __name__ == "__main__":
    main()
