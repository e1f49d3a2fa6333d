"""Embedding-space redundancy measurements.

Centered SVD spectra with effective rank and variance-threshold
dimensions, and pairwise cosine-similarity group analysis for
positional embedding tables.

"Effective rank" is not uniquely defined in the wild; this module
reports the Shannon-entropy effective rank of the normalized singular
values and, alongside it, the same quantity over squared singular
values, labelling both in the output so downstream comparisons are
unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from anatomy.errors import ValidationError

VARIANCE_THRESHOLDS = (0.90, 0.95)
RANK_CLAMP = 1e-10


def _check_matrix(matrix: np.ndarray, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be 2-d and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class SpectrumReport:
    singular_values: np.ndarray
    effective_rank: float
    effective_rank_sq: float
    dims_at: dict[float, int]
    centered: bool

    def to_dict(self) -> dict:
        return {
            "singular_values": [float(s) for s in self.singular_values],
            "effective_rank": self.effective_rank,
            "effective_rank_sq": self.effective_rank_sq,
            "effective_rank_note": (
                "effective_rank is entropy-based over normalized singular values; "
                "effective_rank_sq uses squared (variance) shares"
            ),
            "dims_at": {f"{t:g}": k for t, k in sorted(self.dims_at.items())},
            "centered": self.centered,
        }


@dataclass(frozen=True)
class SimilarityReport:
    matrix: np.ndarray
    within_early: float
    within_late: float
    ratio: float
    ratio_defined: bool
    split: int

    def to_dict(self) -> dict:
        return {
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "within_early": self.within_early,
            "within_late": self.within_late,
            "ratio": self.ratio,
            "ratio_defined": self.ratio_defined,
            "split": self.split,
        }


def effective_rank(sigma: np.ndarray, use_squares: bool = False) -> float:
    """Shannon-entropy effective rank of a singular-value spectrum."""
    sigma = np.asarray(sigma, dtype=np.float64)
    weights = sigma * sigma if use_squares else sigma
    weights = weights[weights > 0]
    if weights.size == 0:
        raise ValidationError("spectrum has no nonzero singular values")
    p = weights / weights.sum()
    return float(np.exp(-np.sum(p * np.log(p))))


def variance_dims(sigma: np.ndarray, threshold: float) -> int:
    """Smallest k whose top-k squared-singular-value share reaches threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    sigma = np.asarray(sigma, dtype=np.float64)
    var = sigma * sigma
    total = var.sum()
    if total <= 0:
        raise ValidationError("spectrum has no nonzero singular values")
    shares = np.cumsum(var) / total
    return int(np.searchsorted(shares, threshold) + 1)


def singular_values(
    matrix: np.ndarray, center: bool = False, return_factors: bool = False
):
    """Singular spectrum of a matrix, optionally centered first.

    Centering subtracts the per-column mean row. Values below
    RANK_CLAMP * sigma_1 are clamped to zero for rank bookkeeping.
    With ``return_factors`` the (U, sigma, W) factors are also returned
    (unclamped), satisfying M_centered ~= U @ diag(sigma) @ W.T.
    """
    arr = _check_matrix(matrix)
    if center:
        if arr.shape[0] < 2:
            raise ValidationError("centering needs at least 2 rows")
        arr = arr - arr.mean(axis=0, keepdims=True)
    if return_factors:
        u, sigma, wt = np.linalg.svd(arr, full_matrices=False)
    else:
        sigma = np.linalg.svd(arr, compute_uv=False)
        u = wt = None
    clamped = sigma.copy()
    if clamped.size and clamped[0] > 0:
        clamped[clamped < RANK_CLAMP * clamped[0]] = 0.0
    report = SpectrumReport(
        singular_values=clamped,
        effective_rank=effective_rank(clamped),
        effective_rank_sq=effective_rank(clamped, use_squares=True),
        dims_at={t: variance_dims(clamped, t) for t in VARIANCE_THRESHOLDS},
        centered=center,
    )
    if return_factors:
        return report, (u, sigma, wt.T)
    return report


def _offdiag_mean(block: np.ndarray) -> float:
    n = block.shape[0]
    if n < 2:
        return float("nan")
    mask = ~np.eye(n, dtype=bool)
    vals = block[mask]
    return float(vals.sum() / vals.size)


def positional_similarity(matrix: np.ndarray, split: int) -> SimilarityReport:
    """Pairwise cosine similarities with early/late group means.

    Rows [0, split) form the early group and [split, n) the late group;
    group means exclude the diagonal. The late/early ratio is flagged
    undefined when the early mean is zero (e.g. orthogonal rows).
    """
    arr = _check_matrix(matrix, "positional matrix")
    n = arr.shape[0]
    if not 1 <= split < n:
        raise ValidationError(f"split must be in [1, {n}), got {split}")
    norms = np.linalg.norm(arr, axis=1)
    zero_rows = np.where(norms == 0)[0]
    if zero_rows.size:
        raise ValidationError(f"row {int(zero_rows[0])} has zero norm")
    unit = arr / norms[:, None]
    sim = unit @ unit.T
    sim = (sim + sim.T) / 2.0
    np.fill_diagonal(sim, 1.0)
    np.clip(sim, -1.0, 1.0, out=sim)
    within_early = _offdiag_mean(sim[:split, :split])
    within_late = _offdiag_mean(sim[split:, split:])
    defined = np.isfinite(within_early) and np.isfinite(within_late) and within_early != 0.0
    ratio = within_late / within_early if defined else float("nan")
    return SimilarityReport(
        matrix=sim,
        within_early=within_early,
        within_late=within_late,
        ratio=ratio,
        ratio_defined=bool(defined),
        split=split,
    )
