"""Miniature transformer text encoders.

Pre-LN bidirectional blocks over token + positional embeddings, pooled
at the end-marker position and projected to a shared output dimension.
The forward pass runs on the content positions only (everything from
the start marker through the end marker); padding positions can never
influence the result, which also makes a longer-context parameter set
restricted to a shorter window bit-identical to a native short-window
run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from anatomy.bpe import TokenSequence
from anatomy.distill import autodiff as ad
from anatomy.distill.autodiff import Tensor
from anatomy.errors import ValidationError


@dataclass(frozen=True)
class TinyEncoderConfig:
    n_layers: int
    width: int
    n_heads: int
    context_len: int
    vocab_size: int
    out_dim: int

    def __post_init__(self):
        if not 1 <= self.n_layers <= 4:
            raise ValidationError(f"n_layers must be in [1, 4], got {self.n_layers}")
        if self.width < 1 or self.width % self.n_heads != 0:
            raise ValidationError(
                f"width ({self.width}) must be a positive multiple of n_heads ({self.n_heads})"
            )
        if self.context_len < 3:
            raise ValidationError(f"context_len must be >= 3, got {self.context_len}")
        if self.out_dim < 1:
            raise ValidationError(f"out_dim must be >= 1, got {self.out_dim}")
        if self.vocab_size < 3:
            raise ValidationError(f"vocab_size must be >= 3, got {self.vocab_size}")

    @property
    def head_dim(self) -> int:
        return self.width // self.n_heads


INIT_STD = 0.02


def init_params(
    config: TinyEncoderConfig, seed: int, dtype=np.float32
) -> dict[str, Tensor]:
    """Seed-determined parameter set: N(0, 0.02) weights, identity layer norms."""
    rng = np.random.default_rng(seed)
    w = config.width

    def normal(*shape):
        return Tensor(rng.normal(0.0, INIT_STD, size=shape).astype(dtype), requires_grad=True)

    def zeros(*shape):
        return Tensor(np.zeros(shape, dtype=dtype), requires_grad=True)

    def ones(*shape):
        return Tensor(np.ones(shape, dtype=dtype), requires_grad=True)

    params: dict[str, Tensor] = {
        "tok_emb": normal(config.vocab_size, w),
        "pos_emb": normal(config.context_len, w),
    }
    for i in range(config.n_layers):
        p = f"l{i}."
        params[p + "ln1.g"] = ones(w)
        params[p + "ln1.b"] = zeros(w)
        params[p + "q_w"] = normal(w, w)
        params[p + "q_b"] = zeros(w)
        params[p + "k_w"] = normal(w, w)
        params[p + "k_b"] = zeros(w)
        params[p + "v_w"] = normal(w, w)
        params[p + "v_b"] = zeros(w)
        params[p + "o_w"] = normal(w, w)
        params[p + "o_b"] = zeros(w)
        params[p + "ln2.g"] = ones(w)
        params[p + "ln2.b"] = zeros(w)
        params[p + "fc1_w"] = normal(w, 4 * w)
        params[p + "fc1_b"] = zeros(4 * w)
        params[p + "fc2_w"] = normal(4 * w, w)
        params[p + "fc2_b"] = zeros(w)
    params["ln_f.g"] = ones(w)
    params["ln_f.b"] = zeros(w)
    params["proj_w"] = normal(w, config.out_dim)
    return params


def _attention(config: TinyEncoderConfig, params: dict, prefix: str, x: Tensor) -> Tensor:
    b, t, w = x.shape
    heads, hd = config.n_heads, config.head_dim

    def split_heads(m: Tensor) -> Tensor:
        return ad.transpose(ad.reshape(m, (b, t, heads, hd)), (0, 2, 1, 3))

    q = split_heads(ad.add(ad.matmul(x, params[prefix + "q_w"]), params[prefix + "q_b"]))
    k = split_heads(ad.add(ad.matmul(x, params[prefix + "k_w"]), params[prefix + "k_b"]))
    v = split_heads(ad.add(ad.matmul(x, params[prefix + "v_w"]), params[prefix + "v_b"]))
    scores = ad.scale(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(hd))
    mixed = ad.matmul(ad.softmax(scores), v)
    merged = ad.reshape(ad.transpose(mixed, (0, 2, 1, 3)), (b, t, w))
    return ad.add(ad.matmul(merged, params[prefix + "o_w"]), params[prefix + "o_b"])


def forward_batch(
    config: TinyEncoderConfig, params: dict, seqs: list[TokenSequence]
) -> Tensor:
    """Embeddings for a batch of sequences sharing one content length.

    Returns a (batch, out_dim) tensor of end-marker representations
    after the output projection.
    """
    if not seqs:
        raise ValidationError("empty batch")
    t = seqs[0].content_len
    ids = np.empty((len(seqs), t), dtype=np.int64)
    for row, seq in enumerate(seqs):
        if seq.context_len != config.context_len:
            raise ValidationError(
                f"sequence length {seq.context_len} != config context {config.context_len}"
            )
        if seq.content_len != t:
            raise ValidationError("batched sequences must share one content length")
        ids[row] = seq.ids[:t]
    if ids.max() >= config.vocab_size:
        raise ValidationError(f"token id {int(ids.max())} out of range for vocab {config.vocab_size}")

    x = ad.add(ad.gather(params["tok_emb"], ids), params["pos_emb"][:t])
    for i in range(config.n_layers):
        p = f"l{i}."
        normed = ad.layer_norm(x, params[p + "ln1.g"], params[p + "ln1.b"])
        x = ad.add(x, _attention(config, params, p, normed))
        normed = ad.layer_norm(x, params[p + "ln2.g"], params[p + "ln2.b"])
        h = ad.add(ad.matmul(normed, params[p + "fc1_w"]), params[p + "fc1_b"])
        h = ad.add(ad.matmul(ad.gelu(h), params[p + "fc2_w"]), params[p + "fc2_b"])
        x = ad.add(x, h)
    x = ad.layer_norm(x, params["ln_f.g"], params["ln_f.b"])
    pooled = x[:, t - 1, :]
    return ad.matmul(pooled, params["proj_w"])


def forward(config: TinyEncoderConfig, params: dict, seq: TokenSequence) -> Tensor:
    """Embedding of a single sequence: an (out_dim,) tensor."""
    return forward_batch(config, params, [seq])[0]
