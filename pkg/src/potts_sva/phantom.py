"""Synthetic piecewise-constant test images with known partitions."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def plateau_levels(K: int) -> np.ndarray:
    """Evenly spaced class intensities ``(k - 1/2)/K``; K = 2 gives 0.25 and 0.75."""
    return (np.arange(K) + 0.5) / K


def make_labels(width: int, height: int, K: int, seed: int) -> np.ndarray:
    """Random label map: background class 1 with disks and rectangles for classes 2..K.

    Every class is guaranteed to occupy at least 5% of the grid.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:height, :width]
    size = min(width, height)
    for _ in range(1000):
        z = np.ones((height, width), dtype=np.int64)
        for k in range(2, K + 1):
            r = rng.uniform(0.18, 0.32) * size
            cy = rng.uniform(r, height - r) if height > 2 * r else height / 2
            cx = rng.uniform(r, width - r) if width > 2 * r else width / 2
            if k % 2 == 0:
                mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
            else:
                mask = (np.abs(yy - cy) <= 0.8 * r) & (np.abs(xx - cx) <= 0.8 * r)
            z[mask] = k
        counts = np.bincount(z.ravel(), minlength=K + 1)[1:]
        if counts.min() >= 0.05 * z.size:
            return z
    raise RuntimeError(f"could not place {K} classes on a {width}x{height} grid")


def make_phantom(width: int, height: int, K: int, noise: float, seed: int):
    """Return ``(image, truth)``: class plateaus plus i.i.d. Gaussian noise of std ``noise``."""
    z = make_labels(width, height, K, seed)
    rng = np.random.default_rng([seed, 1])
    y = plateau_levels(K)[z - 1] + noise * rng.standard_normal(z.shape)
    return y, z


def label_accuracy(pred, truth) -> float:
    """Fraction of matching pixels under the best one-to-one relabelling."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    kp, kt = int(pred.max()), int(truth.max())
    conf = np.zeros((kp, kt))
    np.add.at(conf, (pred - 1, truth - 1), 1)
    rows, cols = linear_sum_assignment(-conf)
    return float(conf[rows, cols].sum() / pred.size)
