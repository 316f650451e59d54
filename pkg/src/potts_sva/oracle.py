"""Slow, independent reference implementations used to cross-check the solvers.

Nothing here imports from the modules it checks: gradients, TV and objectives are
re-derived with explicit loops or dense matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_ASSIGNMENTS = 2**20


@dataclass
class OracleReport:
    description: str
    oracle: float
    candidate: float
    tolerance: float
    gap: float = field(init=False)

    def __post_init__(self):
        self.gap = abs(self.oracle - self.candidate)

    @property
    def passed(self) -> bool:
        return self.gap <= self.tolerance

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag}  {self.description:<44s} oracle={self.oracle:<14.8g} "
                f"candidate={self.candidate:<14.8g} gap={self.gap:.2e} (tol {self.tolerance:.0e})")


# ---------------------------------------------------------------------------
# clustering
# ---------------------------------------------------------------------------

def exhaustive_clustering(x, K: int):
    """Globally optimal K-clustering of a tiny image by enumerating all K^N assignments.

    Returns ``(labels, means, sse)`` with 1-based labels in the shape of ``x``; the
    first assignment in lexicographic order wins ties. Empty classes get a NaN mean.
    """
    x = np.asarray(x, dtype=np.float64)
    v = x.ravel()
    n = v.size
    if K < 1:
        raise ValueError("K must be positive")
    if K**n > MAX_ASSIGNMENTS:
        raise ValueError(f"instance too large for exhaustive search: {K}^{n} assignments")

    # rows enumerate assignments in lexicographic order, last pixel fastest
    assign = np.stack(np.unravel_index(np.arange(K**n), (K,) * n), axis=1)
    onehot = assign[:, :, None] == np.arange(K)[None, None, :]
    counts = onehot.sum(axis=1)
    sums = (onehot * v[None, :, None]).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    fitted = np.take_along_axis(means, assign, axis=1)
    sse = ((v[None, :] - fitted) ** 2).sum(axis=1)
    best = int(np.argmin(sse))
    return (assign[best] + 1).reshape(x.shape), means[best], float(sse[best])


# ---------------------------------------------------------------------------
# 1D total variation
# ---------------------------------------------------------------------------

def tv1d_exact(signal, weight: float) -> np.ndarray:
    """Exact minimiser of ``0.5 * sum (x_i - m_i)^2 + weight * sum |x_{i+1} - x_i|``.

    Direct taut-string construction (Condat, IEEE SPL 2013), written with plain loops.
    """
    m = [float(s) for s in np.asarray(signal, dtype=np.float64).ravel()]
    n = len(m)
    if n == 0:
        raise ValueError("signal must be non-empty")
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    if weight == 0 or n == 1:
        return np.array(m)

    lam = float(weight)
    out = [0.0] * n
    k = k0 = kplus = kminus = 0
    umin, umax = lam, -lam
    vmin, vmax = m[0] - lam, m[0] + lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = kminus = k0
                vmin = m[k0]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    out[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = kplus = k0
                vmax = m[k0]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > k:
                        break
                return np.array(out)
        umin += m[k + 1] - vmin
        if umin < -lam:
            while True:
                out[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = kplus = kminus = k0
            vmin = m[k0]
            vmax = vmin + 2 * lam
            umin, umax = lam, -lam
            continue
        umax += m[k + 1] - vmax
        if umax > lam:
            while True:
                out[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = kplus = kminus = k0
            vmax = m[k0]
            vmin = vmax - 2 * lam
            umin, umax = lam, -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


def tv1d_optimality_residual(signal, x, weight: float, jump_tol: float = 1e-9) -> float:
    """Largest violation of the subgradient conditions for the 1D TV problem.

    With ``r_j = sum_{i<=j} (m_i - x_i)`` optimality requires ``r_{n-1} = 0``,
    ``|r_j| <= weight`` and ``r_j = -weight * sign(x_{j+1} - x_j)`` across jumps.
    """
    m = np.asarray(signal, dtype=np.float64).ravel()
    x = np.asarray(x, dtype=np.float64).ravel()
    r = np.cumsum(m - x)
    worst = abs(r[-1])
    for j in range(len(m) - 1):
        jump = x[j + 1] - x[j]
        if abs(jump) > jump_tol:
            worst = max(worst, abs(r[j] + weight * math.copysign(1.0, jump)))
        else:
            worst = max(worst, abs(r[j]) - weight)
    return float(worst)


# ---------------------------------------------------------------------------
# 2D total variation
# ---------------------------------------------------------------------------

def _difference_matrix(h: int, w: int) -> np.ndarray:
    """Dense (2N, N) forward-difference matrix; row n is d_h at pixel n, row N+n is d_v."""
    n = h * w
    d = np.zeros((2 * n, n))
    for i in range(h):
        for j in range(w):
            p = i * w + j
            if j + 1 < w:
                d[p, p] = -1.0
                d[p, p + 1] = 1.0
            if i + 1 < h:
                d[n + p, p] = -1.0
                d[n + p, p + w] = 1.0
    return d


def _tv_loops(x: np.ndarray) -> float:
    h, w = x.shape
    total = 0.0
    for i in range(h):
        for j in range(w):
            a = x[i, j + 1] - x[i, j] if j + 1 < w else 0.0
            b = x[i + 1, j] - x[i, j] if i + 1 < h else 0.0
            total += math.sqrt(a * a + b * b)
    return total


def projected_gradient_reference(prob, iters: int = 20000, gap_tol: float = 0.0) -> np.ndarray:
    """Reference primal solution of ``0.5||x - target||^2 + weight * TV(x)``.

    Accelerated projected gradient on the dual ``min_{|p_n|<=1} 0.5||m - w D^T p||^2``
    with step ``1/(8 w^2)``, using an explicit dense difference matrix. Stops after
    ``iters`` steps or once the primal-dual gap is at most ``gap_tol``.
    ``prob`` needs ``target`` and ``weight`` attributes.
    """
    m = np.asarray(prob.target, dtype=np.float64)
    w = float(prob.weight)
    if w == 0:
        return m.copy()
    h, wd = m.shape
    n = h * wd
    d = _difference_matrix(h, wd)
    mv = m.ravel()

    def project(q):
        qq = q.reshape(2, n)
        norm = np.maximum(1.0, np.sqrt(qq[0] ** 2 + qq[1] ** 2))
        return (qq / norm).ravel()

    def primal_of(q):
        return mv - w * (d.T @ q)

    def gap_of(q):
        xv = primal_of(q)
        g = d @ xv
        primal = 0.5 * np.sum((xv - mv) ** 2) + w * np.sum(np.sqrt(g[:n] ** 2 + g[n:] ** 2))
        dual = 0.5 * np.sum(mv**2) - 0.5 * np.sum(xv**2)
        return primal - dual

    p = np.zeros(2 * n)
    q = p.copy()
    t = 1.0
    step = 1.0 / (8.0 * w)
    for it in range(iters):
        p_next = project(q + step * (d @ primal_of(q)))
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        q = p_next + ((t - 1.0) / t_next) * (p_next - p)
        p, t = p_next, t_next
        if gap_tol > 0 and it % 50 == 49 and gap_of(p) <= gap_tol:
            break
    return primal_of(p).reshape(m.shape)


def prox_objective(target, weight: float, x) -> float:
    m = np.asarray(target, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return float(0.5 * np.sum((x - m) ** 2) + weight * _tv_loops(x))


# ---------------------------------------------------------------------------
# relaxed segmentation objective
# ---------------------------------------------------------------------------

def independent_objective(x, z, mu, y) -> float:
    """Pixel-by-pixel evaluation of the relaxed segmentation energy.

    ``sum_n [0.5(x_n - y_n)^2 + 0.5(x_n - mu_{z_n})^2] + N log(TV(x) + 1)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z)
    h, w = x.shape
    quad = 0.0
    for i in range(h):
        for j in range(w):
            c = float(mu[int(z[i, j]) - 1])
            quad += 0.5 * (x[i, j] - y[i, j]) ** 2 + 0.5 * (x[i, j] - c) ** 2
    return quad + h * w * math.log(_tv_loops(x) + 1.0)
