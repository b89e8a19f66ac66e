"""Desk-scale simulator of a multi-text image-transmission semantic link.

The pipeline: segment a synthetic scene into a main object and side objects,
caption each as a short text, embed the captions, push the embeddings (and
the main-object pixel slice) through a noisy channel, decode by nearest
neighbor, repair residual word damage with a noisy-channel spell corrector,
and recompose an image. Everything is seeded and reproducible.
"""

__version__ = "0.1.0"
