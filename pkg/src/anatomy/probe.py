"""Softmax error-attenuation probe.

Perturbs a query embedding with isotropic Gaussian noise, pushes both
versions through scaled dot-product cross-attention against fixed
keys/values, and reports how the input, logit, and output error norms
relate. The headline quantity is the reduction factor
input_err / output_err; when attention is sharply concentrated the
softmax attenuates input noise by orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from anatomy.errors import ValidationError


@dataclass(frozen=True)
class ProbeConfig:
    d: int
    n_keys: int
    eps: float
    sharpness: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.n_keys < 1:
            raise ValidationError("d and n_keys must be >= 1")
        if self.eps < 0:
            raise ValidationError(f"eps must be >= 0, got {self.eps}")
        if self.sharpness <= 0:
            raise ValidationError(f"sharpness must be > 0, got {self.sharpness}")


@dataclass(frozen=True)
class ProbeReport:
    input_err: float
    logit_err: float
    output_err: float
    reduction_factor: float
    reduction_defined: bool
    argmax_flipped: bool
    sharpness: float

    def to_dict(self) -> dict:
        return {
            "input_err": self.input_err,
            "logit_err": self.logit_err,
            "output_err": self.output_err,
            "reduction_factor": self.reduction_factor if self.reduction_defined else None,
            "reduction_defined": self.reduction_defined,
            "argmax_flipped": self.argmax_flipped,
            "sharpness": self.sharpness,
        }


def _validate(q: np.ndarray, keys: np.ndarray, values: np.ndarray):
    q = np.asarray(q, dtype=np.float64)
    keys = np.asarray(keys, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if q.ndim != 1 or keys.ndim != 2 or values.ndim != 2:
        raise ValidationError("q must be 1-d; keys and values 2-d")
    if keys.shape[1] != q.shape[0]:
        raise ValidationError(f"keys dim {keys.shape[1]} != query dim {q.shape[0]}")
    if values.shape[0] != keys.shape[0]:
        raise ValidationError(f"values rows {values.shape[0]} != keys rows {keys.shape[0]}")
    for name, arr in (("q", q), ("keys", keys), ("values", values)):
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{name} contains non-finite values")
    return q, keys, values


def stable_softmax(z: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax; shift-invariant by construction."""
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def logits(q: np.ndarray, keys: np.ndarray, sharpness: float = 1.0) -> np.ndarray:
    return sharpness * (keys @ q) / math.sqrt(q.shape[0])


def cross_attention(
    q: np.ndarray, keys: np.ndarray, values: np.ndarray, sharpness: float = 1.0
) -> np.ndarray:
    """softmax(sharpness * q K^T / sqrt(d)) V for a single query."""
    q, keys, values = _validate(q, keys, values)
    return stable_softmax(logits(q, keys, sharpness)) @ values


def probe(
    config: ProbeConfig, q_teacher: np.ndarray, keys: np.ndarray, values: np.ndarray
) -> ProbeReport:
    """Compare attention outputs for a query and its noisy version."""
    q, keys, values = _validate(q_teacher, keys, values)
    rng = np.random.default_rng(config.seed)
    noise = rng.standard_normal(q.shape[0])
    q_student = q + config.eps * noise

    z_t = logits(q, keys, config.sharpness)
    z_s = logits(q_student, keys, config.sharpness)
    w_t = stable_softmax(z_t)
    w_s = stable_softmax(z_s)

    input_err = float(np.linalg.norm(q_student - q))
    logit_err = float(np.linalg.norm(z_s - z_t))
    output_err = float(np.linalg.norm(w_s @ values - w_t @ values))
    defined = output_err > 0.0
    return ProbeReport(
        input_err=input_err,
        logit_err=logit_err,
        output_err=output_err,
        reduction_factor=input_err / output_err if defined else float("nan"),
        reduction_defined=defined,
        argmax_flipped=bool(np.argmax(w_s) != np.argmax(w_t)),
        sharpness=config.sharpness,
    )


def sharpness_sweep(
    config: ProbeConfig,
    q_teacher: np.ndarray,
    keys: np.ndarray,
    values: np.ndarray,
    scales: list[float],
) -> list[ProbeReport]:
    """One probe per logit scale, sharing the noise seed."""
    if not scales:
        raise ValidationError("need at least one sharpness scale")
    if any(s <= 0 for s in scales):
        raise ValidationError("sharpness scales must be positive")
    if sorted(scales) != list(scales):
        raise ValidationError("sharpness scales must be ascending")
    reports = []
    for s in scales:
        cfg = ProbeConfig(
            d=config.d, n_keys=config.n_keys, eps=config.eps, sharpness=s, seed=config.seed
        )
        reports.append(probe(cfg, q_teacher, keys, values))
    return reports


def make_peaked_instance(
    d: int, n_keys: int, gap: float, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random (q, K, V) whose teacher logits have a planted max-gap.

    The first key is aligned with the query so its logit exceeds every
    other logit by at least ``gap``.
    """
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(d)
    keys = rng.standard_normal((n_keys, d))
    values = rng.standard_normal((n_keys, d))
    z = logits(q, keys, 1.0)
    target = z[1:].max() + gap if n_keys > 1 else gap
    keys[0] = q * (target * math.sqrt(d) / float(q @ q))
    return q, keys, values
