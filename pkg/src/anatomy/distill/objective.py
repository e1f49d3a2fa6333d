"""Three-term alignment objective for embedding distillation.

total = mse + lam_cos * (1 - cosine) + lam_consist * permutation_gap

The mse term aligns coordinates with the teacher, the cosine term
aligns directions, and the consistency term penalizes the squared
distance between student embeddings of a prompt and a word-permuted
variant of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from anatomy.bpe import TokenSequence
from anatomy.distill import autodiff as ad
from anatomy.distill.autodiff import Tensor
from anatomy.distill.encoder import TinyEncoderConfig, forward
from anatomy.errors import ValidationError


@dataclass(frozen=True)
class LossWeights:
    lam_cos: float = 2.0
    lam_consist: float = 0.1

    def __post_init__(self):
        if self.lam_cos < 0 or self.lam_consist < 0:
            raise ValidationError("loss weights must be non-negative")


@dataclass(frozen=True)
class LossBreakdown:
    mse: float
    cos: float
    consist: float
    total: float

    def to_dict(self) -> dict:
        return {"mse": self.mse, "cos": self.cos, "consist": self.consist, "total": self.total}


def _pair(v_s, v_t, op: str) -> tuple[Tensor, Tensor]:
    a = v_s if isinstance(v_s, Tensor) else Tensor(np.asarray(v_s))
    b = v_t if isinstance(v_t, Tensor) else Tensor(np.asarray(v_t))
    if a.shape != b.shape:
        raise ValidationError(f"{op}: shape mismatch {a.shape} vs {b.shape}")
    return a, b


def loss_mse(v_s, v_t) -> Tensor:
    """Squared Euclidean distance between two embeddings."""
    a, b = _pair(v_s, v_t, "loss_mse")
    diff = ad.sub(a, b)
    return ad.tsum(ad.mul(diff, diff))


def loss_cos(v_s, v_t) -> Tensor:
    """One minus cosine similarity; both vectors must be nonzero."""
    a, b = _pair(v_s, v_t, "loss_cos")
    na = float(np.linalg.norm(a.data))
    nb = float(np.linalg.norm(b.data))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("loss_cos undefined for a zero vector")
    sim = ad.div(ad.dot(a, b), ad.mul(ad.l2norm(a), ad.l2norm(b)))
    return ad.sub(Tensor(np.asarray(1.0, dtype=a.data.dtype)), sim)


def word_permute(text: str, seed: int) -> str:
    """Uniformly permute whitespace-separated words; deterministic per seed."""
    words = text.split()
    if len(words) < 2:
        return text
    perm = np.random.default_rng(seed).permutation(len(words))
    return " ".join(words[i] for i in perm)


def loss_consistency(
    config: TinyEncoderConfig, params: dict, seq_orig: TokenSequence, seq_perm: TokenSequence
) -> Tensor:
    """Squared distance between embeddings of a prompt and its permutation."""
    return loss_mse(forward(config, params, seq_orig), forward(config, params, seq_perm))


def total_loss(mse: float, cos: float, consist: float, weights: LossWeights) -> LossBreakdown:
    """Combine component losses into the weighted objective."""
    return LossBreakdown(
        mse=mse,
        cos=cos,
        consist=consist,
        total=mse + weights.lam_cos * cos + weights.lam_consist * consist,
    )


def combine_loss_tensors(
    mse: Tensor, cos: Tensor, consist: Tensor, weights: LossWeights
) -> tuple[Tensor, LossBreakdown]:
    """Graph-side combination; the breakdown records the same arithmetic."""
    total = ad.add(ad.add(mse, ad.scale(cos, weights.lam_cos)), ad.scale(consist, weights.lam_consist))
    return total, total_loss(mse.item(), cos.item(), consist.item(), weights)
