"""Intrinsic dimensionality of embedding point clouds.

Two estimators built on the same exact brute-force neighbor distances:

 - two-NN: per-point ratios mu = r2/r1 of the two nearest-neighbor
   distances; after discarding the largest ratios, the dimension is the
   slope of a least-squares line through the origin on
   (ln mu, -ln(1 - F_emp)) with F_emp = rank / (n_used + 1).
 - k-NN MLE: inverse mean log-ratio of neighbor distances per point,
   aggregated by averaging the inverse local estimates (the
   bias-corrected global form) and then averaged over the requested k.

Both statistics depend only on pairwise distances, so they are
invariant to rotations, translations, scaling and zero-padding of the
ambient space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from anatomy.errors import NumericError, ValidationError

DEFAULT_DISCARD = 0.10
DEFAULT_KS = (5, 10, 20, 50)

# Block size cap for the pairwise-distance workspace (floats).
_BLOCK_BUDGET = 8_000_000


@dataclass(frozen=True)
class PointCloud:
    """Deduplicated point set; exact duplicate rows are dropped upfront."""

    points: np.ndarray
    n_duplicates: int = 0

    @staticmethod
    def from_array(points: np.ndarray) -> "PointCloud":
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"point cloud must be 2-d, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("point cloud contains non-finite values")
        _uniq, index = np.unique(arr, axis=0, return_index=True)
        keep = np.sort(index)
        removed = arr.shape[0] - keep.shape[0]
        if removed:
            arr = arr[keep]
        if arr.shape[0] < 3:
            raise ValidationError(f"need at least 3 distinct points, got {arr.shape[0]}")
        return PointCloud(points=arr, n_duplicates=removed)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class IdEstimate:
    method: str
    value: float
    per_k: dict[int, float] = field(default_factory=dict)
    discard_fraction: float = 0.0
    n_used: int = 0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "per_k": {str(k): v for k, v in sorted(self.per_k.items())},
            "discard_fraction": self.discard_fraction,
            "n_used": self.n_used,
        }


# Ambient dimension at which the BLAS path overtakes the direct one.
_GEMM_MIN_DIM = 64


def knn_distances(cloud: PointCloud, k: int) -> np.ndarray:
    """Exact Euclidean distances to the k nearest other points, ascending.

    Brute force over all pairs. For narrow clouds, squared distances
    are elementwise (x - y)^2 sums in float64, reproducible across
    block sizes; for wide clouds the norm-expansion form via GEMM is
    used instead (same neighbors, last-ulp distance differences).
    """
    x = cloud.points
    n = cloud.n
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k >= n:
        raise ValidationError(f"k must be < n ({n}), got {k}")
    use_gemm = x.shape[1] >= _GEMM_MIN_DIM
    if use_gemm:
        # Centering costs nothing and avoids cancellation for offset clouds.
        x = x - x.mean(axis=0, keepdims=True)
        sq_norms = (x * x).sum(axis=1)
    block = max(1, _BLOCK_BUDGET // (n * x.shape[1]))
    out = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        if use_gemm:
            sq = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * (x[start:stop] @ x.T)
            np.maximum(sq, 0.0, out=sq)
        else:
            diff = x[start:stop, None, :] - x[None, :, :]
            np.multiply(diff, diff, out=diff)
            sq = diff.sum(axis=-1)
        sq[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        idx = np.argpartition(sq, k - 1, axis=1)[:, :k]
        rows = np.arange(stop - start)[:, None]
        smallest = sq[rows, idx]
        order = np.argsort(smallest, axis=1, kind="stable")
        out[start:stop] = np.sqrt(smallest[rows, order])
    if np.any(out[:, 0] == 0.0):
        raise NumericError("zero nearest-neighbor distance after deduplication")
    return out


def twonn(
    cloud: PointCloud,
    discard_fraction: float = DEFAULT_DISCARD,
    closed_form: bool = False,
    distances: np.ndarray | None = None,
) -> IdEstimate:
    """Two-nearest-neighbor dimension estimate.

    Ratios are ranked against the empirical CDF of the full sample,
    rank/(n+1); the largest ``discard_fraction`` of ratios is then
    dropped and the slope fitted through the origin on the kept points.
    ``distances`` may pass a precomputed knn_distances table (>= 2
    columns) to share one neighbor pass between estimators.
    """
    if cloud.n < 10:
        raise ValidationError(f"two-NN needs at least 10 points, got {cloud.n}")
    if not 0.0 <= discard_fraction < 0.5:
        raise ValidationError(f"discard fraction must be in [0, 0.5), got {discard_fraction}")
    dists = knn_distances(cloud, 2) if distances is None else distances
    if np.any(dists[:, 0] == 0.0):
        raise NumericError("zero nearest-neighbor distance; duplicates must be removed")
    mu = np.sort(dists[:, 1] / dists[:, 0])
    n = cloud.n
    n_used = n - int(math.floor(discard_fraction * n))
    log_mu = np.log(mu[:n_used])
    if closed_form:
        total = log_mu.sum()
        if total <= 0:
            raise NumericError("all neighbor ratios are 1; dimension undefined")
        value = n_used / total
    else:
        ranks = np.arange(1, n_used + 1, dtype=np.float64)
        y = -np.log1p(-ranks / (n + 1))
        denom = float(log_mu @ log_mu)
        if denom == 0.0:
            raise NumericError("all neighbor ratios are 1; dimension undefined")
        value = float(log_mu @ y) / denom
    return IdEstimate(
        method="twonn",
        value=float(value),
        discard_fraction=discard_fraction,
        n_used=n_used,
    )


def mle_id(cloud: PointCloud, ks=DEFAULT_KS, distances: np.ndarray | None = None) -> IdEstimate:
    """Levina-Bickel style k-NN maximum-likelihood estimate."""
    ks = [int(k) for k in ks]
    if not ks:
        raise ValidationError("need at least one k")
    for k in ks:
        if k <= 1:
            raise ValidationError(f"k must be > 1, got {k}")
    k_max = max(ks)
    if k_max >= cloud.n:
        raise ValidationError(f"max k must be < n ({cloud.n}), got {k_max}")
    dists = knn_distances(cloud, k_max) if distances is None else distances[:, :k_max]
    if np.any(dists == 0.0):
        raise NumericError("zero neighbor distance; duplicates must be removed")
    log_d = np.log(dists)
    per_k: dict[int, float] = {}
    for k in ks:
        # mean over j < k of ln(T_k / T_j) is the inverse local estimate
        inv_local = log_d[:, k - 1 : k] - log_d[:, : k - 1]
        inv_mean = float(inv_local.mean())
        if inv_mean <= 0:
            raise NumericError(f"degenerate neighbor distances at k={k}")
        per_k[k] = 1.0 / inv_mean
    value = sum(per_k.values()) / len(per_k)
    return IdEstimate(method="mle", value=float(value), per_k=per_k, n_used=cloud.n)
