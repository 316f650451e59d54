"""Least-squares clustering of pixel intensities (1D K-means).

Deterministic: centres start at evenly spaced quantiles, ties go to the lowest
class index, and empty classes are re-seeded at the worst-fitted pixel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import as_image, as_labels


@dataclass
class KMeansResult:
    labels: np.ndarray          # 1-based, image shaped
    means: np.ndarray           # (K,)
    sse: float
    iterations: int
    converged: bool
    n_effective: int            # classes with at least one member
    sse_history: list[float] = field(default_factory=list)

    def __iter__(self):
        # allows ``z, mu, sse = kmeans(...)``
        return iter((self.labels, self.means, self.sse))

    @property
    def has_duplicate_means(self) -> bool:
        return len(np.unique(self.means)) < len(self.means)


def assign(x, mu) -> np.ndarray:
    """Nearest-centre labels (1-based), lowest index on ties."""
    x = np.asarray(x, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 1 or len(mu) < 2 or not np.all(np.isfinite(mu)):
        raise ValueError("class means must be a finite vector of length >= 2")
    # |x - mu| orders like (x - mu)^2 without underflowing for tiny gaps
    d = np.abs(x[..., None] - mu)
    return np.argmin(d, axis=-1).astype(np.int64) + 1


def update_means(x, z, K: int) -> np.ndarray:
    """Class means of ``x`` over each label set; empty classes are re-seeded.

    An empty class takes the value of the pixel farthest from its nearest
    nonempty-class mean. Successive empty classes see the earlier re-seeds.
    """
    x = np.asarray(x, dtype=np.float64)
    z = as_labels(z, K)
    v = x.ravel()
    idx = z.ravel() - 1
    counts = np.bincount(idx, minlength=K)
    sums = np.bincount(idx, weights=v, minlength=K)
    mu = np.empty(K)
    full = counts > 0
    mu[full] = sums[full] / counts[full]
    empty = np.flatnonzero(~full)
    if len(empty):
        centres = list(mu[full])
        for k in empty:
            dist = np.min(np.abs(v[:, None] - np.array(centres)[None, :]), axis=1)
            mu[k] = v[int(np.argmax(dist))]
            centres.append(mu[k])
    return mu


def quantile_init(x, K: int) -> np.ndarray:
    levels = (np.arange(K) + 0.5) / K
    return np.quantile(np.asarray(x, dtype=np.float64).ravel(), levels)


def within_sse(x, z, mu) -> float:
    x = np.asarray(x, dtype=np.float64)
    r = x - np.asarray(mu)[np.asarray(z) - 1]
    return float(np.dot(r.ravel(), r.ravel()))


def kmeans(x, K: int, max_iters: int = 100, init=None) -> KMeansResult:
    """Alternate :func:`assign` and :func:`update_means` until the labels stop changing.

    ``init`` optionally supplies starting centres (warm start); otherwise centres
    start at the quantile levels ``(k - 1/2)/K``.

    Raises
    ------
    ValueError
        If ``K < 2`` or ``x`` has fewer than ``K`` distinct values.
    """
    x = as_image(x, "x")
    if K < 2:
        raise ValueError("K must be at least 2")
    n_distinct = len(np.unique(x))
    if n_distinct < K:
        raise ValueError(f"cannot form {K} clusters from {n_distinct} distinct values")
    if max_iters < 1:
        raise ValueError("max_iters must be positive")

    mu = quantile_init(x, K) if init is None else np.array(init, dtype=np.float64)
    if mu.shape != (K,):
        raise ValueError(f"initial centres must have shape ({K},)")
    z = assign(x, mu)
    counts = np.bincount(z.ravel() - 1, minlength=K)
    history = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        mu = update_means(x, z, K)
        history.append(within_sse(x, z, mu))
        z_new = assign(x, mu)
        counts = np.bincount(z_new.ravel() - 1, minlength=K)
        if np.array_equal(z_new, z) and np.all(counts > 0):
            converged = True
            break
        z = z_new
    sse = within_sse(x, z, mu)
    return KMeansResult(
        labels=z, means=mu, sse=sse, iterations=it, converged=converged,
        n_effective=int(np.count_nonzero(counts)), sse_history=history,
    )
