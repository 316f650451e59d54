"""Grid primitives: neighbourhoods, discrete gradients and the energies built on them.

Images and label fields are plain 2D numpy arrays indexed ``[row, col]``.
Labels are integers in ``1..K``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class NeighborhoodKind(enum.Enum):
    FOUR_CONNECTED_2D = "4-connected-2d"
    SIX_CONNECTED_3D = "6-connected-3d"


@dataclass(frozen=True)
class Neighborhood:
    kind: NeighborhoodKind
    offsets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        offs = set(self.offsets)
        for o in offs:
            if tuple(-c for c in o) not in offs:
                raise ValueError(f"neighbourhood offsets are not symmetric: {o}")

    @property
    def size(self) -> int:
        """Number of neighbours of an interior site."""
        return len(self.offsets)


FOUR_CONNECTED = Neighborhood(
    NeighborhoodKind.FOUR_CONNECTED_2D, ((-1, 0), (1, 0), (0, -1), (0, 1))
)
# Declared for completeness; the energy functions below reject it.
SIX_CONNECTED = Neighborhood(
    NeighborhoodKind.SIX_CONNECTED_3D,
    ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)),
)


class GradientField(NamedTuple):
    """Forward differences. ``dh`` has shape (H, W-1), ``dv`` has shape (H-1, W)."""

    dh: np.ndarray
    dv: np.ndarray


def as_image(x, name: str = "image") -> np.ndarray:
    """Validate and return ``x`` as a 2D float64 array with finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_labels(z, num_classes: int | None = None) -> np.ndarray:
    """Validate a label field (integers in ``1..K``) and return it as an int64 array."""
    arr = np.asarray(z)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"label field must be a non-empty 2D array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ValueError("label field must contain integers")
    arr = arr.astype(np.int64)
    if arr.min() < 1:
        raise ValueError("labels must be >= 1")
    if num_classes is not None:
        if num_classes < 2:
            raise ValueError("number of classes must be at least 2")
        if arr.max() > num_classes:
            raise ValueError(f"label {arr.max()} out of range for K={num_classes}")
    return arr


def _check_2d(nb: Neighborhood):
    if nb.kind is not NeighborhoodKind.FOUR_CONNECTED_2D:
        raise NotImplementedError(f"{nb.kind.value} neighbourhoods are not supported")


def _neighbor_pairs(z: np.ndarray, nb: Neighborhood):
    """Yield (site, neighbour) value arrays for every in-bounds directed pair."""
    h, w = z.shape
    for dy, dx in nb.offsets:
        src = z[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
        dst = z[max(0, dy):h - max(0, -dy), max(0, dx):w - max(0, -dx)]
        yield src, dst


def hamiltonian(z, nb: Neighborhood = FOUR_CONNECTED) -> int:
    """Number of directed neighbour pairs carrying equal labels."""
    _check_2d(nb)
    z = as_labels(z)
    return int(sum(np.count_nonzero(a == b) for a, b in _neighbor_pairs(z, nb)))


def complement_hamiltonian(z, nb: Neighborhood = FOUR_CONNECTED) -> int:
    """Number of directed neighbour pairs carrying different labels."""
    _check_2d(nb)
    z = as_labels(z)
    return int(sum(np.count_nonzero(a != b) for a, b in _neighbor_pairs(z, nb)))


def directed_edge_count(width: int, height: int, nb: Neighborhood = FOUR_CONNECTED) -> int:
    """Sum over sites of the boundary-truncated neighbourhood size.

    Plays the role of ``N * |V|`` on a finite grid, so that
    ``hamiltonian(z) + complement_hamiltonian(z) == directed_edge_count(w, h)``.
    """
    _check_2d(nb)
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    return 2 * ((width - 1) * height + width * (height - 1))


def gradient(x) -> GradientField:
    x = as_image(x)
    return GradientField(dh=x[:, 1:] - x[:, :-1], dv=x[1:, :] - x[:-1, :])


def l0_gradient_norm(x) -> int:
    """Count of nonzero horizontal plus vertical forward differences (exact test)."""
    g = gradient(x)
    return int(np.count_nonzero(g.dh) + np.count_nonzero(g.dv))


def pixel_gradient(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences padded to (H, W) with zeros where the neighbour is missing."""
    gh = np.zeros_like(x)
    gv = np.zeros_like(x)
    gh[:, :-1] = x[:, 1:] - x[:, :-1]
    gv[:-1, :] = x[1:, :] - x[:-1, :]
    return gh, gv


def divergence(ph: np.ndarray, pv: np.ndarray) -> np.ndarray:
    """Negative adjoint of :func:`pixel_gradient`.

    Only ``ph[:, :-1]`` and ``pv[:-1, :]`` are read; the padding slots are ignored.
    """
    d = np.zeros_like(ph)
    d[:, :-1] += ph[:, :-1]
    d[:, 1:] -= ph[:, :-1]
    d[:-1, :] += pv[:-1, :]
    d[1:, :] -= pv[:-1, :]
    return d


def tv_isotropic(x) -> float:
    """Isotropic total variation, each pixel pairing its own two forward differences."""
    x = as_image(x)
    gh, gv = pixel_gradient(x)
    return float(np.hypot(gh, gv).sum())


def labels_of(x) -> np.ndarray:
    """Label a piecewise-constant image by its distinct values (1-based, sorted)."""
    x = as_image(x)
    _, inv = np.unique(x, return_inverse=True)
    return inv.reshape(x.shape).astype(np.int64) + 1
