import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from potts_sva import oracle, tvprox
from potts_sva.tvprox import DualField, ProxProblem, fuse_data_term, fused_constant, solve


class TestFuse:
    def test_arithmetic(self):
        p = fuse_data_term(np.zeros((1, 1)), np.ones((1, 1), int), [1.0, 5.0], 4.0)
        assert p.target[0, 0] == 0.5
        assert p.weight == 2.0

    def test_matching_means_give_y(self):
        y = np.array([[0.2, 0.2], [0.7, 0.7]])
        z = np.array([[1, 1], [2, 2]])
        p = fuse_data_term(y, z, [0.2, 0.7], 1.0)
        np.testing.assert_array_equal(p.target, y)

    def test_constant_y_is_fused_minimiser(self):
        y = np.full((3, 3), 0.6)
        x, _, _ = solve(fuse_data_term(y, np.ones((3, 3), int), [0.6, 0.1], 3.0))
        np.testing.assert_allclose(x, y, atol=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            fuse_data_term(np.zeros((2, 2)), np.full((2, 2), 3), [0.0, 1.0], 1.0)

    def test_constant_offset(self):
        rng = np.random.default_rng(1)
        y, x = rng.random((2, 4, 4))
        z = rng.integers(1, 3, (4, 4))
        mu = np.array([0.3, 0.9])
        p = fuse_data_term(y, z, mu, 0.7)
        two_term = 0.5 * np.sum((x - y) ** 2) + 0.5 * np.sum((x - mu[z - 1]) ** 2) + 0.7 * oracle._tv_loops(x)
        assert 2 * p.objective(x) + fused_constant(y, z, mu) == pytest.approx(two_term, rel=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_fused_minimiser_matches_two_term_problem(self, seed):
        cp = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(seed)
        y = rng.random((4, 4))
        z = rng.integers(1, 3, (4, 4))
        mu = np.array([0.2, 0.8])
        lam = 0.3
        xv = cp.Variable((4, 4))
        dh = cp.hstack([xv[:, 1:] - xv[:, :-1], np.zeros((4, 1))])
        dv = cp.vstack([xv[1:, :] - xv[:-1, :], np.zeros((1, 4))])
        tv = cp.sum(cp.norm(cp.vstack([cp.vec(dh, order="C"), cp.vec(dv, order="C")]), 2, axis=0))
        objective = 0.5 * cp.sum_squares(xv - y) + 0.5 * cp.sum_squares(xv - mu[z - 1]) + lam * tv
        cp.Problem(cp.Minimize(objective)).solve(
            solver="CLARABEL", tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
        x, _, _ = solve(fuse_data_term(y, z, mu, lam, tol=1e-15, max_sweeps=100000))
        np.testing.assert_allclose(x, xv.value, atol=1e-8)


class TestProblem:
    @pytest.mark.parametrize("kw", [dict(weight=0.0), dict(weight=-1.0), dict(weight=1.0, tol=0.0),
                                    dict(weight=1.0, max_sweeps=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ProxProblem(np.zeros((2, 2)), **kw)

    def test_nonfinite_target(self):
        with pytest.raises(ValueError):
            ProxProblem(np.array([[0.0, np.inf]]), 1.0)


class TestSolve:
    def test_vanishing_weight(self):
        m = np.random.default_rng(0).random((5, 5))
        x, _, _ = solve(ProxProblem(m, 1e-12))
        np.testing.assert_allclose(x, m, atol=1e-9)

    def test_huge_weight_gives_mean(self):
        m = np.random.default_rng(1).random((8, 8))
        x, _, diag = solve(ProxProblem(m, 1e6, tol=1e-12, max_sweeps=20000))
        np.testing.assert_allclose(x, np.full_like(m, m.mean()), atol=1e-4)

    def test_row_signal_matches_taut_string(self):
        rng = np.random.default_rng(2)
        m = np.cumsum(rng.standard_normal(64)) * 0.1
        x, _, diag = solve(ProxProblem(m[None], 0.5, tol=1e-14, max_sweeps=50000))
        np.testing.assert_allclose(x[0], oracle.tv1d_exact(m, 0.5), atol=1e-5)
        assert diag.duality_gap < 1e-8

    def test_column_signal_matches_taut_string(self):
        rng = np.random.default_rng(3)
        m = np.cumsum(rng.standard_normal(40)) * 0.1
        x, _, _ = solve(ProxProblem(m[:, None], 0.3, tol=1e-14, max_sweeps=50000))
        np.testing.assert_allclose(x[:, 0], oracle.tv1d_exact(m, 0.3), atol=1e-5)

    @pytest.mark.parametrize("seed", range(10))
    def test_sweep_invariants(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.random((7, 9))
        prob = ProxProblem(m, 10 ** rng.uniform(-2, 0), tol=1e-10, max_sweeps=3000)
        x, dual, diag = solve(prob, record=True)
        hist = np.array(diag.objective_history)
        assert np.all(np.diff(hist) <= 1e-12 * m.size)
        assert max(diag.dual_norm_history) <= 1 + 1e-12
        assert m.min() - 1e-9 <= x.min() and x.max() <= m.max() + 1e-9
        assert diag.objective == pytest.approx(prob.objective(x))
        assert diag.duality_gap >= -1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_warm_start_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        prob = ProxProblem(rng.random((10, 10)), 0.2)
        x, dual, _ = solve(prob)
        x2, _, diag = solve(prob, warm_start=dual)
        assert diag.sweeps <= 2
        assert prob.objective(x2) <= prob.objective(x) + 1e-12

    def test_not_converged_is_flagged(self):
        m = np.random.default_rng(0).random((16, 16))
        _, _, diag = solve(ProxProblem(m, 1.0, tol=1e-15, max_sweeps=3))
        assert not diag.converged and diag.sweeps == 3

    def test_warm_start_shape_mismatch(self):
        with pytest.raises(ValueError):
            solve(ProxProblem(np.zeros((3, 3)), 1.0), warm_start=DualField.zeros((2, 2)))

    @pytest.mark.parametrize("seed", range(10))
    def test_agrees_with_projected_gradient(self, seed):
        rng = np.random.default_rng(100 + seed)
        m = rng.random((6, 6))
        prob = ProxProblem(m, 10 ** rng.uniform(-2, 0), tol=1e-13, max_sweeps=50000)
        x, _, _ = solve(prob)
        ref = oracle.projected_gradient_reference(prob, iters=200000, gap_tol=1e-11)
        gap = oracle.prox_objective(m, prob.weight, x) - oracle.prox_objective(m, prob.weight, ref)
        assert abs(gap) <= 1e-6 * m.size

    @given(arrays(np.float64, (5, 6), elements=st.floats(-3, 3, allow_nan=False)),
           st.floats(1e-3, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_maximum_principle(self, m, w):
        x, dual, _ = solve(ProxProblem(m, w, tol=1e-8, max_sweeps=2000))
        assert m.min() - 1e-9 <= x.min() and x.max() <= m.max() + 1e-9
        assert dual.max_norm() <= 1 + 1e-12
        # any feasible dual gives |x - m| <= 4 w pointwise
        assert np.abs(x - m).max() <= 4 * w + 1e-9
