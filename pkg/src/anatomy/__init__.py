"""Anatomy: measurement tools for short-prompt text encoders.

Subcommand-sized pieces: a byte-level BPE tokenizer, corpus
context/vocabulary audits, embedding-spectrum analysis, intrinsic
dimensionality estimators, a desk-scale distillation lab, and a softmax
error-attenuation probe. See the CLI (``anatomy --help``) for the
wired-up pipeline.
"""

__version__ = "0.1.0"
