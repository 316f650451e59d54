"""Unsupervised hidden-Potts segmentation by alternating TV denoising and K-means.

The relaxed energy minimised over ``(x, z, mu)`` is

    sum_n 0.5 (x_n - y_n)^2 + 0.5 (x_n - mu_{z_n})^2 + N log(TV(x) + 1)

The log penalty is handled by majorisation-minimisation: each inner step solves a
TV denoising problem with weight ``lambda_l = N / (TV(v_l) + 1)``, so the amount of
regularisation is set by the data rather than by the user. The penalty constant ``N``
(pixel count) is what is left of the marginalised Potts parameter; no inverse
temperature appears at run time.

The energy is not invariant to the intensity scale, so images (normalised to
[0, 1] on ingest) are multiplied by ``SvaConfig.intensity_scale`` before solving and
all returned quantities (``x``, ``mu``, ``lambda_final``, trace) are in those
working units.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cluster, tvprox
from .grid import as_image, as_labels, l0_gradient_norm, tv_isotropic


@dataclass
class SvaConfig:
    K: int
    max_outer: int = 50
    max_inner: int = 25
    tol: float = 1e-3
    prox_tol: float = 1e-6
    prox_max_sweeps: int = 500
    intensity_scale: float = 255.0
    kmeans_max_iters: int = 100

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be positive")
        if not self.tol > 0 or not self.prox_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.prox_max_sweeps < 1 or self.kmeans_max_iters < 1:
            raise ValueError("sweep/iteration caps must be positive")
        if not (self.intensity_scale > 0 and math.isfinite(self.intensity_scale)):
            raise ValueError("intensity_scale must be positive")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TraceRecord:
    """One inner MM step (``kind="inner"``) or one outer K-means step (``kind="outer"``).

    Inner: ``lam = N / (tv_prev + 1)`` is the weight used to map ``v_l`` (TV ``tv_prev``,
    energy ``objective_prev``) to ``v_{l+1}`` (TV ``tv``, energy ``objective``) with
    ``z, mu`` held fixed. Outer: ``lam = N / (tv + 1)`` for the new ``x``, and
    ``objective`` is evaluated after the K-means update.
    """

    kind: str
    outer: int
    inner: int
    lam: float
    tv_prev: float
    tv: float
    objective_prev: float
    objective: float
    labels_changed: int = -1
    prox_sweeps: int = 0


@dataclass
class SegmentationResult:
    z: np.ndarray
    mu: np.ndarray
    x: np.ndarray
    lambda_final: float
    converged: bool
    outer_iterations: int
    scale: float
    trace: list[TraceRecord] = field(default_factory=list)
    lambda_used: float | None = None    # fixed weight of a TSA run
    kmeans_effective_classes: int = 0

    @property
    def mu_normalized(self) -> np.ndarray:
        return self.mu / self.scale

    @property
    def x_normalized(self) -> np.ndarray:
        return self.x / self.scale

    @property
    def num_classes(self) -> int:
        return len(self.mu)


def _quadratic(x, z, mu, y) -> float:
    mu = np.asarray(mu, dtype=np.float64)
    c = mu[np.asarray(z) - 1]
    a = x - y
    b = x - c
    return 0.5 * float(np.vdot(a, a) + np.vdot(b, b))


def sva_objective(x, z, mu, y) -> float:
    """Relaxed energy with the TV surrogate inside the log penalty."""
    x = as_image(x, "x")
    y = as_image(y, "y")
    return _quadratic(x, z, mu, y) + x.size * math.log(tv_isotropic(x) + 1.0)


def sva_l0_objective(x, z, mu, y) -> float:
    """Energy with the gradient-count penalty ``N log(||grad x||_0 + 1)``; reporting only."""
    x = as_image(x, "x")
    y = as_image(y, "y")
    return _quadratic(x, z, mu, y) + x.size * math.log(l0_gradient_norm(x) + 1.0)


def lambda_schedule(v) -> float:
    v = as_image(v, "v")
    return v.size / (tv_isotropic(v) + 1.0)


def mm_inner(y, z, mu, x_init, cfg: SvaConfig, lam: float | None = None,
             warm_start: tvprox.DualField | None = None, outer: int = 0):
    """Majorisation-minimisation over ``x`` with ``z`` and ``mu`` fixed.

    Iterates ``v_{l+1} = prox(fused data term, lambda_l)`` with
    ``lambda_l = N / (TV(v_l) + 1)`` until ``|lambda_{l+1} - lambda_l| < tol * lambda_l``
    or ``max_inner`` solves. Passing ``lam`` fixes the weight and performs a single
    solve instead.

    Returns ``(v, trace, dual, stabilised)``.
    """
    y = as_image(y, "y")
    mu = np.asarray(mu, dtype=np.float64)
    z = as_labels(z, len(mu))
    v = as_image(x_init, "x_init")
    n = y.size
    tv_v = tv_isotropic(v)
    f_v = _quadratic(v, z, mu, y) + n * math.log(tv_v + 1.0)
    lam_l = n / (tv_v + 1.0) if lam is None else float(lam)
    n_steps = 1 if lam is not None else cfg.max_inner

    trace = []
    dual = warm_start
    stabilised = lam is not None
    for ell in range(n_steps):
        prob = tvprox.fuse_data_term(y, z, mu, lam_l, cfg.prox_tol, cfg.prox_max_sweeps)
        v_new, dual, diag = tvprox.solve(prob, dual)
        tv_new = tv_isotropic(v_new)
        f_new = _quadratic(v_new, z, mu, y) + n * math.log(tv_new + 1.0)
        trace.append(TraceRecord("inner", outer, ell + 1, lam_l, tv_v, tv_new, f_v, f_new,
                                 prox_sweeps=diag.sweeps))
        v, tv_v, f_v = v_new, tv_new, f_new
        if lam is not None:
            break
        lam_next = n / (tv_v + 1.0)
        if abs(lam_next - lam_l) < cfg.tol * lam_l:
            stabilised = True
            break
        lam_l = lam_next
    return v, trace, dual, stabilised


def _check_classes(y: np.ndarray, K: int):
    n_distinct = len(np.unique(y))
    if n_distinct < K:
        raise ValueError(f"image has {n_distinct} distinct values, cannot segment into K={K} classes")


def segment(y, cfg: SvaConfig, x_init=None) -> SegmentationResult:
    """Unsupervised K-class segmentation of a normalised image.

    Starts from ``x = 2 y``, ``z = 1``, ``mu = 0`` (``x_init``, in normalised units,
    overrides the first). Each outer step runs :func:`mm_inner` from the previous
    ``x`` and then K-means on the result, warm-started from the previous means after
    the first step. Stops when the labels repeat or after ``max_outer`` steps.
    """
    y = as_image(y, "y")
    _check_classes(y, cfg.K)
    s = cfg.intensity_scale
    yw = y * s
    n = y.size
    x = 2.0 * yw if x_init is None else as_image(x_init, "x_init") * s
    z = np.ones(y.shape, dtype=np.int64)
    mu = np.zeros(cfg.K)

    trace: list[TraceRecord] = []
    dual = None
    converged = False
    km = None
    t = 0
    for t in range(1, cfg.max_outer + 1):
        x, inner, dual, _ = mm_inner(yw, z, mu, x, cfg, warm_start=dual, outer=t)
        trace.extend(inner)
        km = cluster.kmeans(x, cfg.K, cfg.kmeans_max_iters, init=None if t == 1 else mu)
        changed = int(np.count_nonzero(km.labels != z))
        tv_x = inner[-1].tv
        trace.append(TraceRecord("outer", t, 0, n / (tv_x + 1.0), tv_x, tv_x,
                                 inner[-1].objective, sva_objective(x, km.labels, km.means, yw),
                                 labels_changed=changed))
        z, mu = km.labels, km.means
        if changed == 0:
            converged = True
            break

    return SegmentationResult(
        z=z, mu=mu, x=x, lambda_final=n / (tv_isotropic(x) + 1.0), converged=converged,
        outer_iterations=t, scale=s, trace=trace, kmeans_effective_classes=km.n_effective,
    )


def segment_tsa(y, K: int, lam: float, cfg: SvaConfig | None = None) -> SegmentationResult:
    """Two-stage baseline: one TV denoise of ``y`` with fixed weight, then K-means.

    ``lam`` is in working units, so the ``lambda_final`` of an unsupervised run with
    the same ``intensity_scale`` can be passed straight in. ``lam == 0`` skips the
    denoising step.
    """
    cfg = SvaConfig(K=K) if cfg is None else cfg
    if lam < 0 or not math.isfinite(lam):
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    y = as_image(y, "y")
    _check_classes(y, K)
    s = cfg.intensity_scale
    yw = y * s
    n = y.size
    sweeps = 0
    prox_ok = True
    if lam > 0:
        x, _, diag = tvprox.solve(tvprox.ProxProblem(yw, lam, cfg.prox_tol, cfg.prox_max_sweeps))
        sweeps, prox_ok = diag.sweeps, diag.converged
    else:
        x = yw.copy()
    tv_y = tv_isotropic(yw)
    tv_x = tv_isotropic(x)
    km = cluster.kmeans(x, K, cfg.kmeans_max_iters)
    f0 = 0.5 * float(np.vdot(x - yw, x - yw))
    trace = [
        # TSA energy 0.5||x - y||^2 + lam TV(x), at x = y and at the denoised x
        TraceRecord("inner", 1, 1, lam, tv_y, tv_x, lam * tv_y, f0 + lam * tv_x, prox_sweeps=sweeps),
        TraceRecord("outer", 1, 0, n / (tv_x + 1.0), tv_x, tv_x, f0 + lam * tv_x,
                    sva_objective(x, km.labels, km.means, yw),
                    labels_changed=int(np.count_nonzero(km.labels != 1))),
    ]
    return SegmentationResult(
        z=km.labels, mu=km.means, x=x, lambda_final=n / (tv_x + 1.0),
        converged=bool(km.converged and prox_ok), outer_iterations=1, scale=s, trace=trace,
        lambda_used=float(lam), kmeans_effective_classes=km.n_effective,
    )
