import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admm_trajopt import (DimensionError, DynamicalSystem, NumericalError,
                          Trajectory, finite_diff_jacobian, rollout)
from admm_trajopt.car import CarScenario, car_system


def double_integrator(dt=0.1):
    def step(x, u):
        return np.array([x[0] + dt * x[1], x[1] + dt * u[0]])
    return DynamicalSystem(2, 1, step, dt)


class TestTrajectory:
    def test_length_contract_enforced(self):
        with pytest.raises(DimensionError):
            Trajectory(np.zeros((5, 2)), np.zeros((5, 1)), 0.1)

    def test_dt_must_be_positive(self):
        with pytest.raises(ValueError):
            Trajectory(np.zeros((2, 2)), np.zeros((1, 1)), 0.0)


class TestRollout:
    def test_zero_input_fixed_point(self):
        traj = rollout(double_integrator(), np.zeros(2), np.zeros((3, 1)))
        assert np.all(traj.states == 0.0)

    def test_single_euler_step_by_hand(self):
        traj = rollout(double_integrator(), np.zeros(2), np.array([[1.0]]))
        np.testing.assert_allclose(traj.states[1], [0.0, 0.1])

    def test_car_stays_still_at_zero_velocity(self):
        scn = CarScenario()
        x0 = np.array([1.0, 1.0, 1.5 * np.pi, 0.0])
        traj = rollout(car_system(scn), x0, np.zeros((49, 2)))
        np.testing.assert_allclose(traj.states[:, :2], [[1.0, 1.0]] * 50)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            rollout(double_integrator(), np.zeros(3), np.zeros((3, 1)))

    @given(T=st.integers(min_value=1, max_value=30),
           seed=st.integers(min_value=0, max_value=2 ** 31))
    @settings(max_examples=25, deadline=None)
    def test_length_contract_property(self, T, seed):
        rng = np.random.default_rng(seed)
        us = rng.normal(size=(T, 1))
        traj = rollout(double_integrator(), rng.normal(size=2), us)
        assert len(traj.states) == len(traj.controls) + 1 == T + 1


class TestFiniteDiffJacobian:
    def test_identity_map(self):
        J = finite_diff_jacobian(lambda x: x, np.array([1.0, -2.0, 3.0]), 1e-5)
        np.testing.assert_allclose(J, np.eye(3), atol=1e-10)

    def test_hand_computed_jacobian(self):
        f = lambda x: np.array([x[0] ** 2, x[0] * x[1]])
        J = finite_diff_jacobian(f, np.array([2.0, 3.0]), 1e-5)
        np.testing.assert_allclose(J, [[4.0, 0.0], [3.0, 2.0]], atol=1e-6)

    def test_nonfinite_value_reported_with_coordinate(self):
        def f(x):
            return np.array([1.0 / x[1]])
        with pytest.raises(NumericalError, match="coordinate"):
            finite_diff_jacobian(f, np.array([1.0, 0.0]), 1e-12)

    @given(seed=st.integers(min_value=0, max_value=2 ** 31))
    @settings(max_examples=25, deadline=None)
    def test_linear_map_recovered_exactly(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.uniform(-1e3, 1e3, size=(3, 4))
        x = rng.normal(size=4)
        J = finite_diff_jacobian(lambda z: A @ z, x, 1e-5)
        np.testing.assert_allclose(J, A, atol=1e-8)
