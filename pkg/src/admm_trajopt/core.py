"""Shared abstractions: trajectories, dynamical systems, rollouts, numerical differentiation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class DimensionError(ValueError):
    """Raised when vector dimensions do not match a system's contract."""


class NumericalError(RuntimeError):
    """Raised when an evaluation produces non-finite values."""


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed state/control sequence for one sub-block.

    states has length T, controls length T-1; dt is the fixed time step.
    """

    states: np.ndarray
    controls: np.ndarray
    dt: float

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        controls = np.asarray(self.controls, dtype=float)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)
        if states.ndim != 2 or controls.ndim != 2:
            raise DimensionError("states and controls must be 2-D arrays")
        if len(states) != len(controls) + 1:
            raise DimensionError(
                f"states length {len(states)} != controls length {len(controls)} + 1"
            )
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def horizon(self) -> int:
        return len(self.states)

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def control_dim(self) -> int:
        return self.controls.shape[1]


@dataclass(frozen=True)
class DynamicalSystem:
    """Discrete-time transition map x_next = step(x, u).

    step must be deterministic: identical inputs yield identical outputs.
    """

    state_dim: int
    control_dim: int
    step: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dt: float = 1.0


def rollout(system: DynamicalSystem, x0: np.ndarray, controls: np.ndarray) -> Trajectory:
    """Forward-simulate a control sequence from x0."""
    x0 = np.asarray(x0, dtype=float)
    controls = np.atleast_2d(np.asarray(controls, dtype=float))
    if x0.shape != (system.state_dim,):
        raise DimensionError(f"x0 has shape {x0.shape}, expected ({system.state_dim},)")
    if controls.shape[1] != system.control_dim:
        raise DimensionError(
            f"controls have dim {controls.shape[1]}, expected {system.control_dim}"
        )
    states = np.empty((len(controls) + 1, system.state_dim))
    states[0] = x0
    for k, u in enumerate(controls):
        states[k + 1] = system.step(states[k], u)
    return Trajectory(states, controls, system.dt)


def finite_diff_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                         h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of f at x.

    Entry (i, j) is (f_i(x + h e_j) - f_i(x - h e_j)) / (2 h).
    """
    if h <= 0:
        raise ValueError("step size h must be positive")
    x = np.asarray(x, dtype=float)
    n = x.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fp = np.asarray(f(x + e), dtype=float)
        fm = np.asarray(f(x - e), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NumericalError(f"non-finite function value while perturbing coordinate {j}")
        cols.append((fp - fm) / (2.0 * h))
    return np.stack(cols, axis=-1)


def finite_diff_jacobian_batched(f_batch: Callable[[np.ndarray], np.ndarray],
                                 x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian using a single batched evaluation.

    f_batch maps an array of points (N, n) to values (N, m). Used where the
    underlying model supports vectorized evaluation (walker dynamics).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    pts = np.concatenate([x + h * np.eye(n), x - h * np.eye(n)], axis=0)
    vals = np.asarray(f_batch(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = int(np.argwhere(~np.isfinite(vals))[0][0] % n)
        raise NumericalError(f"non-finite function value while perturbing coordinate {bad}")
    return ((vals[:n] - vals[n:]) / (2.0 * h)).T
