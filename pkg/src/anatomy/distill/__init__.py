"""Desk-scale distillation laboratory.

A tape-based reverse-mode engine over numpy arrays, miniature
transformer text encoders, the three-term alignment objective, and a
deterministic training loop.
"""

from anatomy.distill.autodiff import Tensor
from anatomy.distill.encoder import TinyEncoderConfig, forward, forward_batch, init_params
from anatomy.distill.objective import (
    LossBreakdown,
    LossWeights,
    loss_consistency,
    loss_cos,
    loss_mse,
    total_loss,
    word_permute,
)
from anatomy.distill.train import (
    EmbeddingTableTeacher,
    FrozenEncoderTeacher,
    TrainConfig,
    TrainResult,
    grad,
    train,
)

__all__ = [
    "Tensor",
    "TinyEncoderConfig",
    "forward",
    "forward_batch",
    "init_params",
    "LossBreakdown",
    "LossWeights",
    "loss_consistency",
    "loss_cos",
    "loss_mse",
    "total_loss",
    "word_permute",
    "EmbeddingTableTeacher",
    "FrozenEncoderTeacher",
    "TrainConfig",
    "TrainResult",
    "grad",
    "train",
]
