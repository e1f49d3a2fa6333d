"""Deterministic distillation training loop.

The teacher is frozen (a seed-initialized wider encoder, or a plain
text-to-vector table); the student minimizes the three-term objective
with decoupled-weight-decay adaptive moments (beta1=0.9, beta2=0.999,
eps=1e-8) under a constant or cosine-decayed learning rate. One word
permutation is drawn per prompt per step, reseeded from
(global seed, step, prompt index). The loss curve is recorded every
step; a non-finite intermediate aborts with the last finite step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from anatomy import ltxt
from anatomy.bpe import MergeTable, TokenSequence, encode, normalize_text
from anatomy.distill import autodiff as ad
from anatomy.distill.autodiff import Tensor
from anatomy.distill.encoder import TinyEncoderConfig, forward_batch, init_params
from anatomy.distill.objective import (
    LossBreakdown,
    LossWeights,
    combine_loss_tensors,
    word_permute,
)
from anatomy.errors import NumericError, TrainingDivergedError, ValidationError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 5e-3
    steps: int = 1000
    seed: int = 0
    weight_decay: float = 0.0
    batch_size: int = 32
    lr_schedule: str = "cosine"
    dtype: str = "float32"

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1:
            raise ValidationError("steps and batch_size must be positive")
        if self.lr_schedule not in ("cosine", "constant"):
            raise ValidationError(f"unknown lr schedule {self.lr_schedule!r}")
        if self.dtype not in ("float32", "float64"):
            raise ValidationError(f"dtype must be float32 or float64, got {self.dtype!r}")


class FrozenEncoderTeacher:
    """A fixed, seed-initialized encoder used as the distillation target."""

    def __init__(self, config: TinyEncoderConfig, params: dict[str, Tensor]):
        self.config = config
        self.params = {
            name: Tensor(np.array(p.data, copy=True)) for name, p in params.items()
        }

    @classmethod
    def random(cls, config: TinyEncoderConfig, seed: int, dtype=np.float64):
        return cls(config, init_params(config, seed, dtype=dtype))

    @property
    def out_dim(self) -> int:
        return self.config.out_dim

    def embed_texts(self, texts: list[str], table: MergeTable) -> np.ndarray:
        seqs = [encode(table, t, self.config.context_len) for t in texts]
        out = np.empty((len(seqs), self.config.out_dim), dtype=np.float64)
        for rows, bucket in _buckets(seqs):
            out[rows] = forward_batch(self.config, self.params, bucket).data
        return out


class EmbeddingTableTeacher:
    """Precomputed text -> embedding lookup, keyed by normalized text."""

    def __init__(self, table: dict[str, np.ndarray]):
        if not table:
            raise ValidationError("empty teacher embedding table")
        self._table = {normalize_text(k): np.asarray(v, dtype=np.float64) for k, v in table.items()}
        dims = {v.shape for v in self._table.values()}
        if len(dims) != 1:
            raise ValidationError(f"inconsistent teacher embedding shapes: {dims}")
        self.out_dim = next(iter(dims))[0]

    def embed_texts(self, texts: list[str], table: MergeTable) -> np.ndarray:
        out = np.empty((len(texts), self.out_dim), dtype=np.float64)
        for i, text in enumerate(texts):
            key = normalize_text(text)
            if key not in self._table:
                raise ValidationError(f"prompt not in teacher table: {text!r}")
            out[i] = self._table[key]
        return out


def _buckets(seqs: list[TokenSequence]):
    """Group sequence indices by content length for batched forwards."""
    by_len: dict[int, list[int]] = {}
    for i, seq in enumerate(seqs):
        by_len.setdefault(seq.content_len, []).append(i)
    for _length, rows in sorted(by_len.items()):
        yield rows, [seqs[i] for i in rows]


def _perm_seed(global_seed: int, step: int, prompt_idx: int) -> int:
    seq = np.random.SeedSequence((global_seed, step, prompt_idx))
    return int(seq.generate_state(1)[0])


def _batch_loss(
    config: TinyEncoderConfig,
    params: dict[str, Tensor],
    seqs: list[TokenSequence],
    perm_seqs: list[TokenSequence],
    teacher_embs: np.ndarray,
    weights: LossWeights,
    dtype,
) -> tuple[Tensor, LossBreakdown]:
    """Mean three-term loss over one batch, as a differentiable scalar."""
    n = len(seqs)
    teacher_norms = np.linalg.norm(teacher_embs, axis=1)
    if np.any(teacher_norms == 0.0):
        raise ValidationError("teacher embedding with zero norm; cosine loss undefined")
    mse_sum = cos_sum = consist_sum = None
    for rows, bucket in _buckets(seqs):
        both = bucket + [perm_seqs[i] for i in rows]
        out = forward_batch(config, params, both)
        v_s = out[: len(rows)]
        v_p = out[len(rows) :]
        v_t = Tensor(teacher_embs[rows].astype(dtype))
        nt = Tensor(teacher_norms[rows].astype(dtype))

        diff = ad.sub(v_s, v_t)
        mse_b = ad.tsum(ad.mul(diff, diff))
        dots = ad.tsum(ad.mul(v_s, v_t), axis=1)
        ns = ad.sqrt(ad.tsum(ad.mul(v_s, v_s), axis=1))
        sims = ad.div(dots, ad.mul(ns, nt))
        cos_b = ad.tsum(ad.sub(Tensor(np.ones(len(rows), dtype=dtype)), sims))
        gap = ad.sub(v_s, v_p)
        consist_b = ad.tsum(ad.mul(gap, gap))

        mse_sum = mse_b if mse_sum is None else ad.add(mse_sum, mse_b)
        cos_sum = cos_b if cos_sum is None else ad.add(cos_sum, cos_b)
        consist_sum = consist_b if consist_sum is None else ad.add(consist_sum, consist_b)

    inv = 1.0 / n
    return combine_loss_tensors(
        ad.scale(mse_sum, inv), ad.scale(cos_sum, inv), ad.scale(consist_sum, inv), weights
    )


def grad(
    config: TinyEncoderConfig,
    params: dict[str, Tensor],
    batch: list[tuple[np.ndarray, TokenSequence, TokenSequence]],
    weights: LossWeights = LossWeights(),
) -> tuple[dict[str, np.ndarray], LossBreakdown]:
    """Gradients of the mean batch loss for every parameter tensor.

    ``batch`` holds (teacher embedding, sequence, permuted sequence)
    triples. Returns gradient arrays keyed like ``params`` plus the
    loss breakdown at this point.
    """
    if not batch:
        raise ValidationError("empty batch")
    teacher = np.stack([np.asarray(t, dtype=np.float64) for t, _s, _p in batch])
    seqs = [s for _t, s, _p in batch]
    perms = [p for _t, _s, p in batch]
    for p in params.values():
        p.zero_grad()
    dtype = next(iter(params.values())).data.dtype
    total, breakdown = _batch_loss(config, params, seqs, perms, teacher, weights, dtype)
    total.backward()
    grads = {
        name: (p.grad if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }
    return grads, breakdown


@dataclass
class TrainResult:
    config: TinyEncoderConfig
    weights: LossWeights
    train_config: TrainConfig
    params: dict[str, Tensor]
    curve: np.ndarray  # columns: step, mse, cos, consist, total
    final: LossBreakdown
    prompts: list[str] = field(default_factory=list)

    def save(self, run_dir) -> None:
        """Emit params as LTXT tensors, the loss curve, and a manifest."""
        from pathlib import Path

        from anatomy.jsonio import dumps_canonical

        run_dir = Path(run_dir)
        (run_dir / "params").mkdir(parents=True, exist_ok=True)
        shapes = {}
        for name, p in self.params.items():
            arr = p.data
            shapes[name] = list(arr.shape)
            fname = name.replace(".", "_") + ".ltxt"
            ltxt.write_matrix(run_dir / "params" / fname, arr.reshape(1, -1) if arr.ndim == 1 else arr)
        header = "step,mse,cos,consist,total"
        rows = "\n".join(
            f"{int(r[0])},{r[1]:.17g},{r[2]:.17g},{r[3]:.17g},{r[4]:.17g}" for r in self.curve
        )
        (run_dir / "curve.csv").write_text(header + "\n" + rows + "\n")
        manifest = {
            "version": 1,
            "student": {
                "n_layers": self.config.n_layers,
                "width": self.config.width,
                "n_heads": self.config.n_heads,
                "context_len": self.config.context_len,
                "vocab_size": self.config.vocab_size,
                "out_dim": self.config.out_dim,
            },
            "loss_weights": {"lam_cos": self.weights.lam_cos, "lam_consist": self.weights.lam_consist},
            "train": {
                "lr": self.train_config.lr,
                "steps": self.train_config.steps,
                "seed": self.train_config.seed,
                "weight_decay": self.train_config.weight_decay,
                "batch_size": self.train_config.batch_size,
                "lr_schedule": self.train_config.lr_schedule,
                "dtype": self.train_config.dtype,
            },
            "final_loss": self.final.to_dict(),
            "param_shapes": shapes,
            "n_prompts": len(self.prompts),
        }
        (run_dir / "manifest.json").write_text(dumps_canonical(manifest) + "\n")


def train(
    config: TinyEncoderConfig,
    weights: LossWeights,
    teacher,
    corpus: list[str],
    table: MergeTable,
    train_config: TrainConfig,
    start_params: dict[str, Tensor] | None = None,
) -> TrainResult:
    """Distill ``teacher`` into a fresh (or provided) student."""
    if not corpus:
        raise ValidationError("empty training corpus")
    dtype = np.float32 if train_config.dtype == "float32" else np.float64

    seqs = [encode(table, text, config.context_len) for text in corpus]
    teacher_embs = teacher.embed_texts(corpus, table)
    if teacher_embs.shape[1] != config.out_dim:
        raise ValidationError(
            f"teacher emits {teacher_embs.shape[1]} dims, student out_dim is {config.out_dim}"
        )

    params = start_params if start_params is not None else init_params(config, train_config.seed, dtype)
    opt_m = {k: np.zeros_like(p.data) for k, p in params.items()}
    opt_v = {k: np.zeros_like(p.data) for k, p in params.items()}

    rng = np.random.default_rng(train_config.seed)
    perm_cache: dict[tuple[int, str], TokenSequence] = {}
    curve = np.empty((train_config.steps, 5), dtype=np.float64)

    for step in range(train_config.steps):
        idx = rng.choice(len(corpus), size=min(train_config.batch_size, len(corpus)), replace=False)
        batch_seqs = [seqs[i] for i in idx]
        batch_perms = []
        for i in idx:
            permuted = word_permute(corpus[i], _perm_seed(train_config.seed, step, int(i)))
            key = (int(i), permuted)
            if key not in perm_cache:
                perm_cache[key] = encode(table, permuted, config.context_len)
            batch_perms.append(perm_cache[key])

        for p in params.values():
            p.zero_grad()
        try:
            total, breakdown = _batch_loss(
                config, params, batch_seqs, batch_perms, teacher_embs[idx], weights, dtype
            )
            total.backward()
        except NumericError as err:
            raise TrainingDivergedError(step - 1) from err

        if train_config.lr_schedule == "cosine":
            lr = train_config.lr * 0.5 * (1.0 + math.cos(math.pi * step / train_config.steps))
        else:
            lr = train_config.lr
        t = step + 1
        bias1 = 1.0 - ADAM_BETA1**t
        bias2 = 1.0 - ADAM_BETA2**t
        for name, p in params.items():
            g = p.grad
            if g is None:
                continue
            if train_config.weight_decay:
                p.data *= 1.0 - lr * train_config.weight_decay
            m = opt_m[name]
            v = opt_v[name]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * (g * g)
            p.data -= lr * (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)

        curve[step] = (step, breakdown.mse, breakdown.cos, breakdown.consist, breakdown.total)

    final = LossBreakdown(*[float(x) for x in curve[-1, 1:]])
    return TrainResult(
        config=config,
        weights=weights,
        train_config=train_config,
        params=params,
        curve=curve,
        final=final,
        prompts=list(corpus),
    )


def student_embeddings(
    config: TinyEncoderConfig, params: dict[str, Tensor], texts: list[str], table: MergeTable
) -> np.ndarray:
    """Student embeddings for arbitrary prompts (no gradients kept)."""
    seqs = [encode(table, t, config.context_len) for t in texts]
    frozen = {name: Tensor(p.data) for name, p in params.items()}
    out = np.empty((len(seqs), config.out_dim), dtype=np.float64)
    for rows, bucket in _buckets(seqs):
        out[rows] = forward_batch(config, frozen, bucket).data
    return out


def permutation_gap(
    config: TinyEncoderConfig,
    params: dict[str, Tensor],
    texts: list[str],
    table: MergeTable,
    seed: int,
) -> float:
    """Mean ||v(T) - v(T')|| over prompts, permutations drawn from seed."""
    permuted = [word_permute(t, _perm_seed(seed, 0, i)) for i, t in enumerate(texts)]
    v = student_embeddings(config, params, texts, table)
    vp = student_embeddings(config, params, permuted, table)
    return float(np.linalg.norm(v - vp, axis=1).mean())
