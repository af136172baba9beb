import csv

import numpy as np
import pytest

from opensys.dynamics import (
    ForcingSignal,
    Trajectory,
    kernel_to_csv,
    make_grid,
    make_kernel,
    no_gain_check,
    propagate_full,
    propagate_reduced,
    reduction_discrepancy,
    trajectory_to_csv,
)
from opensys.subspaces import DimensionMismatchError
from opensys.systems import BlockSystem, assemble_full, random_system


def swap_system():
    """The 2x2 closed-form case: full propagation gives v1(t) = cos(t)."""
    return BlockSystem(np.array([[0.0]]), np.array([[0.0]]), np.array([[1.0]]))


class TestKernel:
    def test_value_at_zero_is_gamma_gamma_dag(self):
        sys = random_system(3, 5, 2, seed=5)
        k = make_kernel(sys, "observable")
        assert np.linalg.norm(k.at(0.0) - sys.gamma @ sys.gamma.conj().T) < 1e-12

    def test_hidden_side_at_zero(self):
        sys = random_system(3, 5, 2, seed=5)
        k = make_kernel(sys, "hidden")
        assert np.linalg.norm(k.at(0.0) - sys.gamma.conj().T @ sys.gamma) < 1e-12

    def test_scalar_kernel_analytic(self):
        sys = BlockSystem(np.array([[0.0]]), np.array([[1.0]]),
                          np.array([[1.0]]))
        k = make_kernel(sys)
        for t in (0.0, 0.5, 2.0):
            assert abs(k.at(t)[0, 0] - np.exp(-1j * t)) < 1e-14

    def test_zero_coupling_kernel_vanishes(self):
        sys = random_system(2, 4, 0, seed=1)
        k = make_kernel(sys)
        assert np.linalg.norm(k.at(3.7)) == 0.0

    def test_time_symmetry(self):
        k = make_kernel(random_system(3, 6, 2, seed=9))
        for t in (0.3, 1.7, 5.0):
            assert np.linalg.norm(k.at(t).conj().T - k.at(-t)) < 1e-13

    def test_unknown_side_rejected(self):
        with pytest.raises(ValueError):
            make_kernel(random_system(2, 2, 1, seed=0), "sideways")


class TestPropagateFull:
    def test_eigenvector_phase_evolution(self):
        sys = random_system(3, 3, 1, seed=2)
        full = assemble_full(sys)
        w, u = np.linalg.eigh(full.omega)
        grid = make_grid(5.0, 200)
        traj = propagate_full(full, u[:, 0], ForcingSignal.zero(), grid)
        expected = np.outer(np.exp(-1j * w[0] * grid), u[:, 0])
        assert np.max(np.abs(traj.states - expected)) < 1e-12

    def test_norm_conservation(self):
        sys = random_system(4, 5, 2, seed=3)
        rng = np.random.default_rng(0)
        v0 = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        traj = propagate_full(assemble_full(sys), v0, ForcingSignal.zero(),
                              make_grid(10.0, 400))
        drift = np.abs(traj.norms() - np.linalg.norm(v0))
        assert np.max(drift) < 1e-12 * np.linalg.norm(v0)

    def test_two_level_closed_form(self):
        omega = np.array([[0.0, 1.0], [1.0, 0.0]])
        grid = make_grid(np.pi / 2, 100)
        traj = propagate_full(omega, np.array([1.0, 0.0]),
                              ForcingSignal.zero(), grid)
        # closed-form 2x2 exponential: (cos t, -i sin t)
        assert np.allclose(traj.states[-1], [0.0, -1j], atol=1e-12)

    def test_forced_duhamel_against_fine_reference(self):
        omega = np.array([[0.5, 0.2], [0.2, -0.3]])
        grid = make_grid(4.0, 200)
        f = np.stack([np.sin(grid), np.cos(2 * grid)], axis=1).astype(complex)
        traj = propagate_full(omega, np.zeros(2, dtype=complex),
                              ForcingSignal(f), grid)
        fine = make_grid(4.0, 3200)
        ff = np.stack([np.sin(fine), np.cos(2 * fine)], axis=1).astype(complex)
        ref = propagate_full(omega, np.zeros(2, dtype=complex),
                             ForcingSignal(ff), fine)
        assert np.max(np.abs(traj.states[-1] - ref.states[-1])) < 1e-4

    def test_non_uniform_grid_rejected(self):
        with pytest.raises(ValueError):
            propagate_full(np.zeros((2, 2)), np.zeros(2),
                           ForcingSignal.zero(), np.array([0.0, 0.1, 0.3]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            propagate_full(np.zeros((2, 2)), np.zeros(3),
                           ForcingSignal.zero(), make_grid(1.0, 10))


class TestPropagateReduced:
    def test_zero_coupling_matches_observable_block(self):
        sys = random_system(3, 4, 0, seed=11)
        v1 = np.array([1.0, 1j, -0.5]) / np.sqrt(2.25)
        grid = make_grid(8.0, 1600)
        red = propagate_reduced(sys, v1, ForcingSignal.zero("observable"), grid)
        v0 = np.concatenate([v1, np.zeros(4)])
        full = propagate_full(assemble_full(sys), v0, ForcingSignal.zero(), grid)
        assert np.max(np.abs(red.states - full.states[:, :3])) < 1e-4

    def test_cosine_closed_form(self):
        # constant kernel 1: v1' = -int_0^t v1(t - tau) dtau, v1 = cos(t)
        grid = make_grid(10.0, 2000)
        red = propagate_reduced(swap_system(), np.array([1.0 + 0j]),
                                ForcingSignal.zero("observable"), grid)
        assert np.max(np.abs(red.states[:, 0] - np.cos(grid))) < 1e-4

    def test_second_order_convergence(self):
        sys = random_system(2, 4, 1, seed=23)
        rng = np.random.default_rng(1)
        v1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v1 /= np.linalg.norm(v1)
        result = reduction_discrepancy(sys, v1, 10.0, 500)
        assert 1.7 <= result["order"] <= 2.3
        assert result["sup_diff_fine"] < result["sup_diff_coarse"]

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            propagate_reduced(swap_system(), np.zeros(2),
                              ForcingSignal.zero("observable"),
                              make_grid(1.0, 10))


class TestNoGain:
    def test_zero_signal_gives_zero(self):
        from opensys.dynamics import _bump_profile
        grid = make_grid(10.0, 100)
        assert np.all(_bump_profile(grid, 2.0, 4.0)[grid <= 2.0] == 0.0)

    def test_zero_coupling_kernel(self):
        k = make_kernel(random_system(2, 3, 0, seed=0))
        res = no_gain_check(k, 5, make_grid(10.0, 200), seed=1)
        assert res.min_value == 0.0

    def test_scalar_kernel_nonnegative(self):
        sys = BlockSystem(np.array([[0.0]]), np.array([[1.0]]),
                          np.array([[1.0]]))
        k = make_kernel(sys)
        res = no_gain_check(k, 20, make_grid(20.0, 300), seed=3)
        assert res.min_value >= -res.quad_error_bound
        refined = no_gain_check(k, 20, make_grid(20.0, 600), seed=3)
        if res.min_value < 0:
            assert refined.min_value >= res.min_value / 2

    def test_random_kernel_nonnegative(self):
        k = make_kernel(random_system(3, 6, 2, seed=31))
        res = no_gain_check(k, 25, make_grid(20.0, 300), seed=7)
        assert res.passed

    def test_deterministic(self):
        k = make_kernel(random_system(2, 4, 1, seed=2))
        grid = make_grid(10.0, 150)
        a = no_gain_check(k, 5, grid, seed=9)
        b = no_gain_check(k, 5, grid, seed=9)
        assert np.array_equal(a.values, b.values)


class TestExport:
    def test_trajectory_csv(self, tmp_path):
        traj = Trajectory(np.array([0.0, 0.5]),
                          np.array([[1 + 2j, 0j], [0.5j, 3 + 0j]]))
        path = tmp_path / "t.csv"
        trajectory_to_csv(traj, str(path))
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["time", "re_0", "im_0", "re_1", "im_1"]
        assert float(rows[1][1]) == 1.0 and float(rows[1][2]) == 2.0
        assert float(rows[2][6 - 5]) == 0.0  # re_0 of second sample

    def test_kernel_csv(self, tmp_path):
        k = make_kernel(random_system(2, 3, 1, seed=4))
        path = tmp_path / "k.csv"
        kernel_to_csv(k, make_grid(1.0, 4), str(path))
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "time"
        assert len(rows) == 6  # header + 5 grid points
        assert len(rows[1]) == 1 + 2 * 4  # time + re/im per 2x2 entry


def test_grid_validation():
    with pytest.raises(ValueError):
        make_grid(-1.0, 100)
    with pytest.raises(ValueError):
        make_grid(1.0, 1)
