import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otkit.errors import EnumerationGuardError
from otkit.selftest import bisection_projection
from otkit.subproblems import (QPSolverConfig, least_squares_on_support,
                               project_capped_simplex, solve_binary_ot,
                               solve_relaxed_ot)

from conftest import gaussian_instance


class TestProjection:
    def test_cap_forces_unit(self):
        np.testing.assert_allclose(
            project_capped_simplex(np.array([10.0, 0.0, 0.0]), 1), [1.0, 0.0, 0.0],
            atol=1e-14)

    def test_symmetry(self):
        for c in (-3.0, 0.0, 7.5):
            np.testing.assert_allclose(
                project_capped_simplex(np.full(3, c), 2), np.full(3, 2 / 3),
                atol=1e-14)

    def test_full_mass_is_ones(self, rng):
        v = rng.normal(0, 5, 9)
        np.testing.assert_array_equal(project_capped_simplex(v, 9), np.ones(9))

    def test_matches_bisection_oracle(self, rng):
        for _ in range(50):
            v = rng.normal(0, rng.uniform(0.5, 5.0), 6)
            w = project_capped_simplex(v, 3)
            ref = bisection_projection(v, 3)
            np.testing.assert_allclose(w, ref, atol=1e-10)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            project_capped_simplex(np.ones(3), 4)

    def test_coincident_breakpoints(self):
        # repeated values make breakpoints collide; feasibility must survive
        v = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 2.0, 2.0])
        for k in range(1, 8):
            w = project_capped_simplex(v, k)
            assert abs(w.sum() - k) <= 1e-12
            assert w.min() >= 0 and w.max() <= 1

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=25), st.data())
    @settings(deadline=None, max_examples=60)
    def test_feasibility_and_optimality(self, vals, data):
        v = np.array(vals, dtype=float)
        k = data.draw(st.integers(1, v.size))
        w = project_capped_simplex(v, k)
        assert abs(w.sum() - k) <= 1e-12
        assert w.min() >= -1e-15 and w.max() <= 1 + 1e-15
        # any other feasible point (obtained by projection) is no closer to v
        other = project_capped_simplex(
            np.array(data.draw(st.lists(st.floats(-50, 50),
                                        min_size=v.size, max_size=v.size))), k)
        assert (np.linalg.norm(w - v) <= np.linalg.norm(other - v) + 1e-10)


class TestRelaxedOT:
    def test_zero_residual_certificate(self, rng):
        m, n, k = 6, 12, 3
        A = rng.standard_normal((m, n))
        A /= np.linalg.norm(A, axis=0)
        v = np.zeros(n)
        v[[1, 4, 9]] = rng.standard_normal(3)
        y = A @ v
        w, converged = solve_relaxed_ot(A, y, v, k)
        assert converged
        obj = float(np.sum((y - A @ (v * w)) ** 2))
        assert obj <= 1e-18

    def test_dominates_binary_minimum(self, rng):
        m, n, k = 4, 8, 2
        for _ in range(10):
            A = rng.standard_normal((m, n))
            y = rng.standard_normal(m)
            v = rng.standard_normal(n)
            w, _ = solve_relaxed_ot(A, y, v, k)
            relaxed = float(np.sum((y - A @ (v * w)) ** 2))
            _, exact = solve_binary_ot(A, y, v, k)
            assert relaxed <= exact + 1e-9

    def test_zero_v_returns_feasible(self, rng):
        A = rng.standard_normal((4, 8))
        y = rng.standard_normal(4)
        w, converged = solve_relaxed_ot(A, y, np.zeros(8), 3)
        assert converged
        assert abs(w.sum() - 3) <= 1e-12
        assert w.min() >= 0 and w.max() <= 1
        assert np.allclose(np.sum((y - A @ (np.zeros(8) * w)) ** 2), y @ y)

    def test_monotone_in_iteration_budget(self, rng):
        # accepted objectives never increase, so a larger budget never hurts
        A = rng.standard_normal((6, 10))
        y = rng.standard_normal(6)
        v = rng.standard_normal(10)
        objs = []
        for budget in range(1, 40):
            cfg = QPSolverConfig(max_inner_iter=budget)
            w, _ = solve_relaxed_ot(A, y, v, 3, cfg)
            objs.append(float(np.sum((y - A @ (v * w)) ** 2)))
        assert all(a >= b - 1e-12 for a, b in zip(objs, objs[1:]))

    def test_nonconvergence_flag(self, rng):
        A = rng.standard_normal((8, 16))
        y = rng.standard_normal(8)
        v = rng.standard_normal(16)
        cfg = QPSolverConfig(max_inner_iter=1, grad_tol=1e-300, objective_rel_tol=1e-300)
        w, converged = solve_relaxed_ot(A, y, v, 5, cfg)
        assert not converged
        assert abs(w.sum() - 5) <= 1e-12  # still feasible


class TestBinaryOT:
    def test_constructed_optimum(self, rng):
        m, n, k = 5, 9, 3
        A = rng.standard_normal((m, n))
        v = rng.standard_normal(n)
        what = np.zeros(n)
        what[[0, 3, 7]] = 1.0
        y = A @ (v * what)
        w, obj = solve_binary_ot(A, y, v, k)
        np.testing.assert_array_equal(w, what)
        assert obj <= 1e-20

    def test_identity_padded_example(self):
        A = np.eye(4)
        v = np.ones(4)
        y = np.array([1.0, 1.0, 0.0, 0.0])
        w, obj = solve_binary_ot(A, y, v, 2)
        np.testing.assert_array_equal(w, [1.0, 1.0, 0.0, 0.0])
        assert obj == 0.0

    def test_full_k_returns_all_ones(self, rng):
        A = rng.standard_normal((4, 6))
        y = rng.standard_normal(4)
        v = rng.standard_normal(6)
        w, obj = solve_binary_ot(A, y, v, 6)
        np.testing.assert_array_equal(w, np.ones(6))
        assert np.isclose(obj, np.sum((y - A @ v) ** 2))

    def test_enumeration_guard(self, rng):
        A = rng.standard_normal((4, 31))
        with pytest.raises(EnumerationGuardError):
            solve_binary_ot(A, rng.standard_normal(4), rng.standard_normal(31), 2)

    def test_tie_prefers_lexicographic_support(self):
        # two columns identical: supports {0,...} and {1,...} tie; 0 must win
        A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        v = np.ones(3)
        y = np.array([1.0, 0.0])
        w, _ = solve_binary_ot(A, y, v, 1)
        np.testing.assert_array_equal(w, [1.0, 0.0, 0.0])


class TestLeastSquares:
    def test_identity(self):
        y = np.array([1.0, 2.0, 3.0])
        x, flag = least_squares_on_support(np.eye(3), y, np.array([0, 2]))
        np.testing.assert_allclose(x, [1.0, 0.0, 3.0], atol=1e-14)
        assert not flag

    def test_exact_interpolation_on_true_support(self, rng):
        A, y, truth, _ = gaussian_instance(rng, 8, 12, 3)
        x, flag = least_squares_on_support(A, y, np.flatnonzero(truth))
        assert not flag
        np.testing.assert_allclose(x, truth, atol=1e-10)

    def test_matches_normal_equations_oracle(self, rng):
        A = rng.standard_normal((6, 10))
        y = rng.standard_normal(6)
        S = np.array([1, 4, 8])
        x, _ = least_squares_on_support(A, y, S)
        As = A[:, S]
        expected = np.linalg.solve(As.T @ As, As.T @ y)
        np.testing.assert_allclose(x[S], expected, atol=1e-9)

    def test_orthogonality_certificate(self, rng):
        for _ in range(20):
            A = rng.standard_normal((7, 11))
            y = rng.standard_normal(7)
            S = np.sort(rng.choice(11, size=3, replace=False))
            x, _ = least_squares_on_support(A, y, S)
            cert = np.abs(A[:, S].T @ (y - A @ x)).max()
            assert cert <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(y)

    def test_rank_deficient_returns_min_norm(self, rng):
        col = rng.standard_normal(5)
        A = np.column_stack([col, col, rng.standard_normal(5)])
        y = rng.standard_normal(5)
        x, flag = least_squares_on_support(A, y, np.array([0, 1]))
        assert flag
        # minimum-norm solution splits the weight across the duplicates
        assert np.isclose(x[0], x[1])

    def test_empty_support(self, rng):
        A = rng.standard_normal((4, 6))
        x, flag = least_squares_on_support(A, rng.standard_normal(4), np.array([], dtype=int))
        np.testing.assert_array_equal(x, np.zeros(6))
        assert not flag

    def test_duplicate_support_rejected(self, rng):
        A = rng.standard_normal((4, 6))
        with pytest.raises(ValueError):
            least_squares_on_support(A, rng.standard_normal(4), np.array([1, 1]))
