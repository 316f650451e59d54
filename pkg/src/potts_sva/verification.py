"""Cross-checks of the solvers against :mod:`potts_sva.oracle`, used by ``verify``."""
from __future__ import annotations

import numpy as np

from . import cluster, grid, oracle, sva, tvprox
from .oracle import OracleReport


def random_piecewise_constant(rng, h: int, w: int, K: int) -> np.ndarray:
    """Label-valued random blocks mapped to K pairwise-distinct random levels."""
    z = np.ones((h, w), dtype=np.int64)
    for k in range(2, K + 1):
        y0, x0 = rng.integers(0, h), rng.integers(0, w)
        y1, x1 = rng.integers(y0, h) + 1, rng.integers(x0, w) + 1
        z[y0:y1, x0:x1] = k
    levels = rng.permutation(np.linspace(-1.0, 2.0, K)) + rng.uniform(0, 0.01)
    return levels[z - 1]


def check_energies(rng, n: int = 200) -> list[OracleReport]:
    worst_sum = worst_l0 = None
    for _ in range(n):
        h, w = rng.integers(1, 17, size=2)
        K = int(rng.integers(2, 5))
        z = rng.integers(1, K + 1, size=(h, w))
        total = grid.hamiltonian(z) + grid.complement_hamiltonian(z)
        edges = grid.directed_edge_count(int(w), int(h))
        if worst_sum is None or abs(total - edges) > abs(worst_sum[1] - worst_sum[0]):
            worst_sum = (edges, total)
        x = random_piecewise_constant(rng, int(h), int(w), K)
        pair = (2 * grid.l0_gradient_norm(x), grid.complement_hamiltonian(grid.labels_of(x)))
        if worst_l0 is None or abs(pair[0] - pair[1]) > abs(worst_l0[0] - worst_l0[1]):
            worst_l0 = pair
    return [
        OracleReport("H + H* = directed edge count", worst_sum[0], worst_sum[1], 0.0),
        OracleReport("H*(labels of x) = 2 ||grad x||_0", worst_l0[0], worst_l0[1], 0.0),
    ]


def check_prox_2d(rng, n: int = 20, shape=(6, 6)) -> OracleReport:
    worst = None
    for _ in range(n):
        m = rng.random(shape)
        prob = tvprox.ProxProblem(m, 10 ** rng.uniform(-2, 0), tol=1e-13, max_sweeps=50000)
        x, _, _ = tvprox.solve(prob)
        ref = oracle.projected_gradient_reference(prob, iters=200000, gap_tol=1e-11)
        pair = (oracle.prox_objective(m, prob.weight, ref), oracle.prox_objective(m, prob.weight, x))
        if worst is None or abs(pair[0] - pair[1]) > abs(worst[0] - worst[1]):
            worst = pair
    return OracleReport(f"TV prox vs projected gradient {shape[0]}x{shape[1]}", *worst, 1e-6 * shape[0] * shape[1])


def check_prox_1d(rng, n: int = 20, length: int = 64) -> OracleReport:
    worst = (0.0, 0.0)
    for _ in range(n):
        m = np.cumsum(rng.standard_normal(length)) * 0.1
        w = 10 ** rng.uniform(-1, 0.3)
        x, _, _ = tvprox.solve(tvprox.ProxProblem(m[None, :], w, tol=1e-14, max_sweeps=50000))
        ref = oracle.tv1d_exact(m, w)
        i = int(np.argmax(np.abs(x[0] - ref)))
        if abs(x[0, i] - ref[i]) > abs(worst[1] - worst[0]):
            worst = (float(ref[i]), float(x[0, i]))
    return OracleReport(f"TV prox vs taut string 1x{length} (pointwise)", *worst, 1e-5)


def check_kmeans(rng, n: int = 200) -> list[OracleReport]:
    below = 0.0
    hits = 0
    for _ in range(n):
        N = int(rng.integers(3, 10))
        K = int(rng.integers(2, 4))
        x = rng.random((1, N))
        _, _, opt = oracle.exhaustive_clustering(x, K)
        res = cluster.kmeans(x, K)
        below = max(below, opt - res.sse)
        hits += res.sse <= opt + 1e-12
    return [
        OracleReport("K-means sse below exhaustive optimum", 0.0, max(below, 0.0), 1e-12),
        OracleReport("K-means reaches optimum (fraction)", 1.0, hits / n, 0.5),
    ]


def check_objective(rng, n: int = 50) -> OracleReport:
    worst = (0.0, 0.0)
    for _ in range(n):
        K = int(rng.integers(2, 4))
        x, y = rng.random((3, 3)), rng.random((3, 3))
        z = rng.integers(1, K + 1, size=(3, 3))
        mu = rng.random(K)
        pair = (oracle.independent_objective(x, z, mu, y), sva.sva_objective(x, z, mu, y))
        if abs(pair[0] - pair[1]) > abs(worst[0] - worst[1]):
            worst = pair
    return OracleReport("relaxed objective vs loop evaluator 3x3", *worst, 1e-12)


def run_cross_checks(seed: int = 0) -> list[OracleReport]:
    rng = np.random.default_rng(seed)
    return [
        *check_energies(rng),
        check_prox_2d(rng),
        check_prox_1d(rng),
        *check_kmeans(rng),
        check_objective(rng),
    ]
