"""Control-limited car parking benchmark, solved as a two-block ADMM:
one DDP block carrying the full car objective plus the control-consistency
penalty, and a box-projection block enforcing the input limits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from . import ddp
from .admm import (AccelerationConfig, AdmmBlocks, AdmmResult, ConstraintId,
                   CouplingState, StoppingCriteria, solve_admm)
from .core import DynamicalSystem, Trajectory
from .projection import project_box


@dataclass(frozen=True)
class CarScenario:
    """Kinematic car with bounded steering and acceleration.

    State (x, y, heading, front-wheel speed); control (wheel angle, accel).
    """

    wheelbase: float = 2.0
    dt: float = 0.03
    horizon: int = 500                      # number of states
    x0: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0, 1.5 * np.pi, 0.0]))
    goal: np.ndarray = field(default_factory=lambda: np.zeros(4))
    steer_limit: float = 0.5
    accel_limit: float = 2.0
    # cost weights; smoothing width for the smoothed-absolute distance terms
    pos_weight_stage: float = 1e-3
    steer_weight: float = 1e-2
    accel_weight: float = 1e-4
    pos_weight_final: float = 0.1
    heading_weight_final: float = 1.0
    speed_weight_final: float = 1.0
    smooth_eps: float = 0.1


def _smooth_abs(z: np.ndarray, eps: float):
    """sqrt(z^2 + eps^2) - eps and its first/second derivatives."""
    r = np.sqrt(z ** 2 + eps ** 2)
    return r - eps, z / r, eps ** 2 / r ** 3


def car_step(s: np.ndarray, u: np.ndarray, scn: CarScenario) -> np.ndarray:
    """One discrete step: front-wheel rolling distance, exact back-wheel
    geometry, heading change asin(sin(w) * v * h / d)."""
    x, y, th, v = s
    w, a = u
    d, h = scn.wheelbase, scn.dt
    f = h * v
    sw, cw = np.sin(w), np.cos(w)
    b = d + f * cw - np.sqrt(max(d ** 2 - (f * sw) ** 2, 1e-12))
    dth = np.arcsin(np.clip(sw * f / d, -1.0, 1.0))
    return np.array([x + b * np.cos(th), y + b * np.sin(th), th + dth, v + h * a])


def car_step_jacobians(s: np.ndarray, u: np.ndarray, scn: CarScenario):
    """Analytic (fx, fu) of car_step."""
    x, y, th, v = s
    w, a = u
    d, h = scn.wheelbase, scn.dt
    f = h * v
    sw, cw = np.sin(w), np.cos(w)
    g = np.sqrt(d ** 2 - (f * sw) ** 2)
    b = d + f * cw - g
    db_df = cw + f * sw ** 2 / g
    db_dw = -f * sw + f ** 2 * sw * cw / g
    z = sw * f / d
    root = np.sqrt(max(1.0 - z ** 2, 1e-12))
    ddth_df = sw / (d * root)
    ddth_dw = cw * f / (d * root)
    cth, sth = np.cos(th), np.sin(th)
    fx = np.array([
        [1.0, 0.0, -b * sth, cth * db_df * h],
        [0.0, 1.0, b * cth, sth * db_df * h],
        [0.0, 0.0, 1.0, ddth_df * h],
        [0.0, 0.0, 0.0, 1.0],
    ])
    fu = np.array([
        [cth * db_dw, 0.0],
        [sth * db_dw, 0.0],
        [ddth_dw, 0.0],
        [0.0, h],
    ])
    return fx, fu


def car_stage_cost(s: np.ndarray, u: np.ndarray, k: int, scn: CarScenario) -> float:
    dx = s[:2] - scn.goal[:2]
    sa, _, _ = _smooth_abs(dx, scn.smooth_eps)
    return float(scn.pos_weight_stage * sa.sum()
                 + scn.steer_weight * u[0] ** 2 + scn.accel_weight * u[1] ** 2)


def car_terminal_cost(s: np.ndarray, scn: CarScenario) -> float:
    e = s - scn.goal
    sa, _, _ = _smooth_abs(e, scn.smooth_eps)
    wts = np.array([scn.pos_weight_final, scn.pos_weight_final,
                    scn.heading_weight_final, scn.speed_weight_final])
    return float(wts @ sa)


def car_system(scn: CarScenario) -> DynamicalSystem:
    return DynamicalSystem(4, 2, lambda s, u: car_step(s, u, scn), scn.dt)


def car_ddp_problem(scn: CarScenario, u_bar: np.ndarray, w_t: np.ndarray,
                    rho_t: float) -> ddp.DdpProblem:
    """Car objective plus the quadratic control-consistency penalty
    rho_t/2 ||u - u_bar + w_t||^2 with the projection copy frozen."""
    target = u_bar - w_t

    def stage(s, u, k):
        pen = 0.5 * rho_t * np.sum((u - target[k]) ** 2)
        return car_stage_cost(s, u, k, scn) + pen

    def dyn_derivs(xs, us):
        T1 = len(us)
        fx = np.empty((T1, 4, 4)); fu = np.empty((T1, 4, 2))
        for k in range(T1):
            fx[k], fu[k] = car_step_jacobians(xs[k], us[k], scn)
        return fx, fu

    def stage_derivs(xs, us):
        T1 = len(us)
        dxy = xs[:-1, :2] - scn.goal[:2]
        _, g1, g2 = _smooth_abs(dxy, scn.smooth_eps)
        lx = np.zeros((T1, 4)); lxx = np.zeros((T1, 4, 4))
        lx[:, :2] = scn.pos_weight_stage * g1
        lxx[:, 0, 0] = scn.pos_weight_stage * g2[:, 0]
        lxx[:, 1, 1] = scn.pos_weight_stage * g2[:, 1]
        cw = np.array([scn.steer_weight, scn.accel_weight])
        lu = 2.0 * cw * us + rho_t * (us - target)
        luu = np.tile(np.diag(2.0 * cw) + rho_t * np.eye(2), (T1, 1, 1))
        lux = np.zeros((T1, 2, 4))
        return lx, lu, lxx, luu, lux

    def term_derivs(x):
        e = x - scn.goal
        _, g1, g2 = _smooth_abs(e, scn.smooth_eps)
        wts = np.array([scn.pos_weight_final, scn.pos_weight_final,
                        scn.heading_weight_final, scn.speed_weight_final])
        return wts * g1, np.diag(wts * g2)

    return ddp.DdpProblem(
        car_system(scn), stage,
        lambda s: car_terminal_cost(s, scn),
        dyn_derivs, stage_derivs, term_derivs)


def car_local_cost(traj: Trajectory, scn: CarScenario) -> float:
    c = sum(car_stage_cost(traj.states[k], traj.controls[k], k, scn)
            for k in range(len(traj.controls)))
    return float(c + car_terminal_cost(traj.states[-1], scn))


def car_blocks(scn: CarScenario,
               ddp_settings: ddp.DdpSettings | None = None) -> AdmmBlocks:
    """Two-block wiring: only the control-consistency constraint t is active."""
    settings = ddp_settings or ddp.DdpSettings(max_iterations=200,
                                               cost_reduction_tol=1e-9)
    lo = np.array([-scn.steer_limit, -scn.accel_limit])
    hi = -lo

    def solve_wholebody(phi_wbd, phi_cen, copies, coupling):
        problem = car_ddp_problem(scn, copies[ConstraintId.T],
                                  coupling.duals[ConstraintId.T],
                                  coupling.rho[ConstraintId.T])
        sol = ddp.solve(problem, phi_wbd, settings)
        return sol.trajectory, {"local_cost": car_local_cost(sol.trajectory, scn),
                                "iterations": sol.iterations,
                                "converged": sol.converged}

    def primal_values(phi_cen, phi_wbd):
        return {ConstraintId.T: phi_wbd.controls}

    def project(targets):
        return {ConstraintId.T: project_box(targets[ConstraintId.T], lo, hi)}

    return AdmmBlocks(projection_ids=(ConstraintId.T,),
                      solve_wholebody=solve_wholebody,
                      primal_values=primal_values,
                      project=project)


def initial_guess(scn: CarScenario) -> Trajectory:
    """Zero-control rollout from the initial state."""
    from .core import rollout
    controls = np.zeros((scn.horizon - 1, 2))
    return rollout(car_system(scn), scn.x0, controls)


def solve_car(cfg: AccelerationConfig, criteria: StoppingCriteria | None = None,
              scn: CarScenario | None = None, rho0: float = 0.01) -> AdmmResult:
    """Run the car-parking ADMM from the paper-style warm start (zero
    controls, zero duals)."""
    scn = scn or CarScenario()
    criteria = criteria or StoppingCriteria(
        eps_pri={ConstraintId.T: 1e-2}, eps_cost=1e-4, max_iterations=100)
    init = initial_guess(scn)
    coupling = CouplingState(
        duals={ConstraintId.T: np.zeros((scn.horizon - 1, 2))},
        rho={ConstraintId.T: rho0})
    return solve_admm(car_blocks(scn), None, init, coupling, cfg, criteria)
