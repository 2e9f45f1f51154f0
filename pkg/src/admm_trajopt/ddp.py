"""Unconstrained iLQR/DDP solver used by the centroidal and whole-body sub-blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DynamicalSystem, Trajectory, rollout, finite_diff_jacobian


class NotPositiveDefinite(Exception):
    """Regularized Q_uu failed its Cholesky factorization at some step."""

    def __init__(self, step: int):
        super().__init__(f"Q_uu not positive definite at step {step}")
        self.step = step


class RolloutDiverged(Exception):
    """Forward pass produced a non-finite state."""


class SolveStalled(Exception):
    """Regularization exceeded its maximum without an accepted step."""


def _default_line_search() -> np.ndarray:
    return 2.0 ** (-np.arange(11, dtype=float))


@dataclass
class DdpSettings:
    max_iterations: int = 100
    cost_reduction_tol: float = 1e-9
    regularization_init: float = 1e-6
    regularization_min: float = 1e-9
    regularization_max: float = 1e9
    line_search_steps: np.ndarray = field(default_factory=_default_line_search)

    def __post_init__(self):
        steps = np.asarray(self.line_search_steps, dtype=float)
        if not (0 < self.regularization_min <= self.regularization_init
                <= self.regularization_max):
            raise ValueError("regularization bounds must satisfy 0 < min <= init <= max")
        if steps[0] != 1.0 or np.any(np.diff(steps) >= 0):
            raise ValueError("line_search_steps must start at 1 and strictly decrease")
        self.line_search_steps = steps


@dataclass
class DdpProblem:
    """Dynamics, costs, and derivative providers consumed by the solver.

    dynamics_derivs(xs, us) returns (fx, fu) stacked over the horizon;
    stage_cost_derivs returns (lx, lu, lxx, luu, lux) stacked likewise;
    terminal_cost_derivs returns (lx, lxx) at the final state. Cost Hessians
    must be symmetric.
    """

    system: DynamicalSystem
    stage_cost: Callable[[np.ndarray, np.ndarray, int], float]
    terminal_cost: Callable[[np.ndarray], float]
    dynamics_derivs: Callable[[np.ndarray, np.ndarray], tuple]
    stage_cost_derivs: Callable[[np.ndarray, np.ndarray], tuple]
    terminal_cost_derivs: Callable[[np.ndarray], tuple]

    def total_cost(self, traj: Trajectory) -> float:
        c = sum(self.stage_cost(traj.states[k], traj.controls[k], k)
                for k in range(len(traj.controls)))
        return float(c + self.terminal_cost(traj.states[-1]))


@dataclass
class DdpGains:
    feedback: np.ndarray      # (T-1, m, n)
    feedforward: np.ndarray   # (T-1, m)
    d1: float                 # sum k^T Q_u   (negative at a descent direction)
    d2: float                 # sum k^T Q_uu k
    value_gradient: np.ndarray = None   # dV/dx at the initial state

    def expected_reduction(self, step: float) -> float:
        return -(step * self.d1 + 0.5 * step ** 2 * self.d2)


@dataclass
class DdpSolution:
    trajectory: Trajectory
    total_cost: float
    iterations: int
    converged: bool
    feedback_gains: np.ndarray
    feedforward: np.ndarray


def finite_diff_problem(system: DynamicalSystem,
                        stage_cost: Callable[[np.ndarray, np.ndarray, int], float],
                        terminal_cost: Callable[[np.ndarray], float],
                        h: float = 1e-5) -> DdpProblem:
    """Build a DdpProblem whose derivatives all come from central differences."""
    n, m = system.state_dim, system.control_dim

    def dyn_derivs(xs, us):
        T1 = len(us)
        fx = np.empty((T1, n, n))
        fu = np.empty((T1, n, m))
        for k in range(T1):
            J = finite_diff_jacobian(
                lambda z: system.step(z[:n], z[n:]),
                np.concatenate([xs[k], us[k]]), h)
            fx[k], fu[k] = J[:, :n], J[:, n:]
        return fx, fu

    def cost_grad_hess(f, z, hh):
        g = finite_diff_jacobian(lambda w: np.array([f(w)]), z, hh)[0]
        H = finite_diff_jacobian(lambda w: finite_diff_jacobian(
            lambda v: np.array([f(v)]), w, hh)[0], z, hh)
        return g, 0.5 * (H + H.T)

    def stage_derivs(xs, us):
        T1 = len(us)
        lx = np.empty((T1, n)); lu = np.empty((T1, m))
        lxx = np.empty((T1, n, n)); luu = np.empty((T1, m, m)); lux = np.empty((T1, m, n))
        for k in range(T1):
            z = np.concatenate([xs[k], us[k]])
            g, H = cost_grad_hess(lambda w, kk=k: stage_cost(w[:n], w[n:], kk), z, 1e-4)
            lx[k], lu[k] = g[:n], g[n:]
            lxx[k], luu[k], lux[k] = H[:n, :n], H[n:, n:], H[n:, :n]
        return lx, lu, lxx, luu, lux

    def term_derivs(x):
        g, H = cost_grad_hess(terminal_cost, x, 1e-4)
        return g, H

    return DdpProblem(system, stage_cost, terminal_cost,
                      dyn_derivs, stage_derivs, term_derivs)


def backward_pass(problem: DdpProblem, traj: Trajectory, reg: float) -> DdpGains:
    """Value-function recursion from the terminal step back to the start.

    Raises NotPositiveDefinite when regularized Q_uu fails at any step; the
    caller retries with a larger reg.
    """
    if reg < 0:
        raise ValueError("regularization must be nonnegative")
    xs, us = traj.states, traj.controls
    T1 = len(us)
    fx, fu = problem.dynamics_derivs(xs, us)
    lx, lu, lxx, luu, lux = problem.stage_cost_derivs(xs, us)
    Vx, Vxx = problem.terminal_cost_derivs(xs[-1])
    Vxx = 0.5 * (Vxx + Vxx.T)

    m, n = fu.shape[2], fx.shape[2]
    K = np.empty((T1, m, n))
    kff = np.empty((T1, m))
    d1 = d2 = 0.0
    for t in range(T1 - 1, -1, -1):
        Qx = lx[t] + fx[t].T @ Vx
        Qu = lu[t] + fu[t].T @ Vx
        Qxx = lxx[t] + fx[t].T @ Vxx @ fx[t]
        Quu = luu[t] + fu[t].T @ Vxx @ fu[t]
        Qux = lux[t] + fu[t].T @ Vxx @ fx[t]
        Quu_reg = Quu + reg * np.eye(m)
        try:
            L = np.linalg.cholesky(0.5 * (Quu_reg + Quu_reg.T))
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(t) from None
        rhs = np.column_stack([Qu, Qux])
        sol = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
        kff[t] = -sol[:, 0]
        K[t] = -sol[:, 1:]
        d1 += float(kff[t] @ Qu)
        d2 += float(kff[t] @ Quu @ kff[t])
        Vx = Qx + K[t].T @ Quu @ kff[t] + K[t].T @ Qu + Qux.T @ kff[t]
        Vxx = Qxx + K[t].T @ Quu @ K[t] + K[t].T @ Qux + Qux.T @ K[t]
        Vxx = 0.5 * (Vxx + Vxx.T)
    return DdpGains(K, kff, d1, d2, Vx)


def forward_pass(problem: DdpProblem, traj: Trajectory, gains: DdpGains,
                 step: float) -> tuple[Trajectory, float]:
    """Roll out u = u_bar + step*k + K (x - x_bar) from the unchanged x0."""
    if not 0 <= step <= 1:
        raise ValueError("step must lie in [0, 1]")
    xs, us = traj.states, traj.controls
    new_xs = np.empty_like(xs)
    new_us = np.empty_like(us)
    new_xs[0] = xs[0]
    for k in range(len(us)):
        new_us[k] = us[k] + step * gains.feedforward[k] \
            + gains.feedback[k] @ (new_xs[k] - xs[k])
        new_xs[k + 1] = problem.system.step(new_xs[k], new_us[k])
        if not np.all(np.isfinite(new_xs[k + 1])):
            raise RolloutDiverged(f"non-finite state at step {k + 1}")
    new_traj = Trajectory(new_xs, new_us, traj.dt)
    return new_traj, problem.total_cost(new_traj)


def solve(problem: DdpProblem, init: Trajectory,
          settings: DdpSettings | None = None) -> DdpSolution:
    """Iterate backward/forward passes until the cost reduction stalls.

    Accepted costs are monotone non-increasing. On a regularization blowup
    the best trajectory so far is returned with converged=False.
    """
    settings = settings or DdpSettings()
    traj = init
    cost = problem.total_cost(traj)
    reg = settings.regularization_init
    K = np.zeros((len(init.controls), init.control_dim, init.state_dim))
    kff = np.zeros((len(init.controls), init.control_dim))
    converged = False
    it = 0
    while it < settings.max_iterations:
        it += 1
        # backward pass, inflating reg until Q_uu is positive definite
        while True:
            try:
                gains = backward_pass(problem, traj, reg)
                break
            except NotPositiveDefinite:
                reg = min(reg * 10.0, settings.regularization_max * 10.0)
                if reg > settings.regularization_max:
                    return DdpSolution(traj, cost, it, False, K, kff)
        K, kff = gains.feedback, gains.feedforward
        # backtracking line search
        accepted = False
        for step in settings.line_search_steps:
            try:
                cand, cand_cost = forward_pass(problem, traj, gains, step)
            except RolloutDiverged:
                continue
            expected = gains.expected_reduction(step)
            actual = cost - cand_cost
            if (expected > 0 and actual >= 1e-4 * expected) or \
               (expected <= 0 and actual > 0):
                traj, reduction, cost = cand, actual, cand_cost
                accepted = True
                break
        if accepted:
            reg = max(reg / 2.0, settings.regularization_min)
            if reduction < settings.cost_reduction_tol:
                converged = True
                break
        else:
            reg = reg * 10.0
            if reg > settings.regularization_max:
                return DdpSolution(traj, cost, it, False, K, kff)
    return DdpSolution(traj, cost, it, converged, K, kff)
