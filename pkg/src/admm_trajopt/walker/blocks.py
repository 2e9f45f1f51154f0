"""Walker sub-block wiring: cost builders for the centroidal and whole-body
DDP problems (local costs plus augmented-Lagrangian penalty terms) and the
AdmmBlocks callbacks consumed by the splitting loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .. import ddp
from ..admm import AdmmBlocks, ConstraintId, CouplingState
from ..core import DynamicalSystem, Trajectory
from ..projection import project_box, project_friction_cone_2d
from . import model as wm

CID = ConstraintId

# generalized state s = (c, theta, q, cdot, thetadot, qdot), 18-dim
S_DIM = 18
_Q_ROWS = slice(3, 9)
_QD_ROWS = slice(12, 18)
KNEE_ROWS = (7, 8)


@dataclass(frozen=True)
class Terrain:
    kind: str = "flat"          # flat | stairs
    rise: float = 0.08
    run: float = 0.30
    start: float = 0.15         # x of the first riser
    count: int = 10

    def height(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(x)
        steps = np.clip(np.floor((x - self.start) / self.run) + 1, 0, self.count)
        return self.rise * steps


@dataclass(frozen=True)
class WalkerScenario:
    """Model, terrain, footstep plan, horizon, penalties and cost weights."""

    model: wm.WalkerModel = field(default_factory=wm.WalkerModel)
    terrain: Terrain = field(default_factory=Terrain)
    footsteps: np.ndarray = field(
        default_factory=lambda: np.arange(5) * 0.3)
    horizon: int = 50           # states per walking step
    dt: float = 0.01
    hip_height: float = 0.80
    clearance: float = 0.08
    swing_dwell: float = 0.3
    torque_limit: float = 50.0
    initial_com_velocity: float = 0.2
    capture_gain: float = 1.1
    # one-sided speed regulation through foot placement: reduce the capture
    # gain in proportion to how far the post-impact speed exceeds
    # target_speed (stairs need this; a fixed gain either stalls against
    # the climb or accelerates until the long steps stop converging)
    speed_feedback: float = 0.0
    target_speed: float = 0.0
    knee_lower: float = 0.0
    knee_upper: float = np.pi
    friction_coefficient: float = 1.0
    # penalties rho_i
    rho: Dict[CID, float] = field(default_factory=lambda: {
        CID.C: 1e4, CID.H: 1e-2, CID.LAM: 1e-2,
        CID.J: 10.0, CID.T: 0.1, CID.F: 1e-2})
    # local cost weights
    torque_weight: float = 1e-3
    foot_weight: float = 5e3
    posture_weight: float = 10.0
    posture_rate_weight: float = 0.1
    terminal_q_weight: float = 1e2
    terminal_qd_weight: float = 1.0
    com_vel_weight: float = 1e-4
    com_ref_weight: float = 500.0
    force_weight: float = 1e-6
    track_q_weight: float = 2e2
    track_qd_weight: float = 2.0
    fd_step: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "footsteps",
                           np.asarray(self.footsteps, dtype=float))

    def footstep_points(self) -> np.ndarray:
        z = self.terrain.height(self.footsteps)
        return np.column_stack([self.footsteps, z])

    def state_bounds(self):
        lo = np.full(S_DIM, -np.inf)
        hi = np.full(S_DIM, np.inf)
        lo[list(KNEE_ROWS)] = self.knee_lower
        hi[list(KNEE_ROWS)] = self.knee_upper
        return lo, hi


def swing_reference(p0: np.ndarray, p1: np.ndarray, clearance: float,
                    T: int, dwell: float = 0.2) -> np.ndarray:
    """Quintic swing-foot trajectory from p0 to p1 with an apex bump.

    The reference reaches p1 at fraction 1 - dwell of the step and holds it
    there, giving the tracking cost time to settle the landing.
    """
    tau = np.minimum(np.linspace(0.0, 1.0, T) / max(1.0 - dwell, 1e-9), 1.0)
    s = 10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5
    ref = p0[None, :] + s[:, None] * (p1 - p0)[None, :]
    ref[:, 1] += clearance * (4 * tau * (1 - tau)) ** 2
    return ref


def assemble_generalized_state(phi_cen: Trajectory,
                               phi_wbd: Trajectory) -> np.ndarray:
    """Stack (c, theta, q, cdot, thetadot, qdot) per time step, (T, 18)."""
    cen, wbd = phi_cen.states, phi_wbd.states
    return np.concatenate([cen[:, 0:2], cen[:, 2:3], wbd[:, 0:6],
                           cen[:, 3:5], cen[:, 5:6], wbd[:, 6:12]], axis=1)


def wholebody_quantities(scn: WalkerScenario, phi_wbd: Trajectory,
                         stance: int = 1):
    """CoM, centroidal momentum A_g qd, and contact forces g_lambda along a
    whole-body trajectory."""
    q = phi_wbd.states[:, :6]
    qd = phi_wbd.states[:, 6:]
    com = wm.com_position(scn.model, q)
    A = wm.centroidal_momentum_matrix(scn.model, q)
    mom = np.einsum("kij,kj->ki", A, qd)
    glam = wm.contact_force(scn.model, q[:-1], qd[:-1],
                            phi_wbd.controls, stance)
    return com, mom, glam


# ---------------------------------------------------------------------------
# centroidal sub-block


def centroidal_system(scn: WalkerScenario, contact_point: np.ndarray,
                      inertia: float) -> DynamicalSystem:
    m = scn.model.total_mass
    g = scn.model.gravity
    dt = scn.dt
    p = np.asarray(contact_point, dtype=float)

    def step(x, lam):
        # semi-implicit Euler, matching the whole-body integrator
        c, th, cd, thd = x[0:2], x[2], x[3:5], x[5]
        cdd = lam / m + np.array([0.0, -g])
        r = p - c
        thdd = (r[0] * lam[1] - r[1] * lam[0]) / inertia
        cd1 = cd + dt * cdd
        thd1 = thd + dt * thdd
        return np.concatenate([c + dt * cd1, [th + dt * thd1],
                               cd1, [thd1]])

    return DynamicalSystem(6, 2, step, dt)


def build_centroidal_cost(scn: WalkerScenario, phi_wbd: Trajectory,
                          coupling: CouplingState, contact_point: np.ndarray,
                          inertia: float, stance: int = 1,
                          com_ref: Optional[np.ndarray] = None
                          ) -> ddp.DdpProblem:
    """Centroidal DDP problem: CoM-plan tracking and regularization plus
    quadratic consensus penalties with whole-body quantities frozen."""
    com, mom, glam = wholebody_quantities(scn, phi_wbd, stance)
    if com_ref is None:
        wr = 0.0
        com_ref = np.zeros_like(com)
    else:
        wr = scn.com_ref_weight
    c_t = com + coupling.duals[CID.C]              # target for c
    h_t = mom + coupling.duals[CID.H]              # target for (m cdot, I thd)
    l_t = glam + coupling.duals[CID.LAM]           # target for lambda
    rc, rh, rl = (coupling.rho[CID.C], coupling.rho[CID.H],
                  coupling.rho[CID.LAM])
    m = scn.model.total_mass
    dt, g = scn.dt, scn.model.gravity
    p = np.asarray(contact_point, dtype=float)
    T = phi_wbd.horizon
    # momentum map (m cdot, I thetadot) as a linear map of the state
    M = np.zeros((3, 6))
    M[0, 3] = M[1, 4] = m
    M[2, 5] = inertia

    def stage(x, lam, k):
        pen = 0.5 * rc * np.sum((c_t[k] - x[0:2]) ** 2) \
            + 0.5 * rh * np.sum((h_t[k] - M @ x) ** 2) \
            + 0.5 * rl * np.sum((l_t[k] - lam) ** 2)
        return float(pen + wr * np.sum((x[0:2] - com_ref[k]) ** 2)
                     + scn.com_vel_weight * np.sum(x[3:5] ** 2)
                     + scn.force_weight * np.sum(lam ** 2))

    def terminal(x):
        return float(0.5 * rc * np.sum((c_t[T - 1] - x[0:2]) ** 2)
                     + 0.5 * rh * np.sum((h_t[T - 1] - M @ x) ** 2)
                     + wr * np.sum((x[0:2] - com_ref[T - 1]) ** 2)
                     + scn.com_vel_weight * np.sum(x[3:5] ** 2))

    def dyn_derivs(xs, us):
        T1 = len(us)
        fx = np.tile(np.eye(6), (T1, 1, 1))
        fx[:, 0, 3] = fx[:, 1, 4] = fx[:, 2, 5] = dt
        fx[:, 5, 0] = -dt * us[:, 1] / inertia
        fx[:, 5, 1] = dt * us[:, 0] / inertia
        fu = np.zeros((T1, 6, 2))
        fu[:, 3, 0] = fu[:, 4, 1] = dt / m
        fu[:, 5, 0] = -dt * (p[1] - xs[:-1, 1]) / inertia
        fu[:, 5, 1] = dt * (p[0] - xs[:-1, 0]) / inertia
        return fx, fu

    E_c = np.zeros((2, 6)); E_c[0, 0] = E_c[1, 1] = 1.0
    E_cd = np.zeros((2, 6)); E_cd[0, 3] = E_cd[1, 4] = 1.0

    def stage_derivs(xs, us):
        T1 = len(us)
        x = xs[:-1]
        rc_res = x @ E_c.T - c_t[:T1]
        rh_res = x @ M.T - h_t[:T1]
        lx = rc * rc_res @ E_c + rh * rh_res @ M \
            + 2 * wr * (x @ E_c.T - com_ref[:T1]) @ E_c \
            + 2 * scn.com_vel_weight * x @ E_cd.T @ E_cd
        lxx = np.tile(rc * E_c.T @ E_c + rh * M.T @ M
                      + 2 * wr * E_c.T @ E_c
                      + 2 * scn.com_vel_weight * E_cd.T @ E_cd, (T1, 1, 1))
        lu = rl * (us - l_t[:T1]) + 2 * scn.force_weight * us
        luu = np.tile((rl + 2 * scn.force_weight) * np.eye(2), (T1, 1, 1))
        lux = np.zeros((T1, 2, 6))
        return lx, lu, lxx, luu, lux

    def term_derivs(x):
        g1 = rc * E_c.T @ (E_c @ x - c_t[T - 1]) + rh * M.T @ (M @ x - h_t[T - 1]) \
            + 2 * wr * E_c.T @ (E_c @ x - com_ref[T - 1]) \
            + 2 * scn.com_vel_weight * E_cd.T @ E_cd @ x
        H1 = rc * E_c.T @ E_c + rh * M.T @ M + 2 * wr * E_c.T @ E_c \
            + 2 * scn.com_vel_weight * E_cd.T @ E_cd
        return g1, H1

    return ddp.DdpProblem(centroidal_system(scn, p, inertia),
                          stage, terminal, dyn_derivs, stage_derivs, term_derivs)


def centroidal_local_cost(scn: WalkerScenario, phi_cen: Trajectory,
                          com_ref: Optional[np.ndarray] = None) -> float:
    cd = phi_cen.states[:, 3:5]
    val = scn.com_vel_weight * np.sum(cd ** 2) \
        + scn.force_weight * np.sum(phi_cen.controls ** 2)
    if com_ref is not None:
        val += scn.com_ref_weight * np.sum(
            (phi_cen.states[:, 0:2] - com_ref) ** 2)
    return float(val)


# ---------------------------------------------------------------------------
# whole-body sub-block


def wholebody_system(scn: WalkerScenario, stance: int = 1) -> DynamicalSystem:
    def step(x, u):
        q2, qd2, _ = wm.wholebody_step(scn.model, x[..., :6], x[..., 6:],
                                       u, stance, scn.dt)
        return np.concatenate([q2, qd2], axis=-1)
    return DynamicalSystem(12, 3, step, scn.dt)


@dataclass
class WholebodyTargets:
    """Frozen quantities entering the whole-body penalties."""

    c_t: np.ndarray        # (T, 2)   centroidal CoM minus dual offset handling
    h_t: np.ndarray        # (T, 3)
    lam_t: np.ndarray      # (T-1, 2)
    s_bar_q: np.ndarray    # (T, 6)  q rows of the state copy + dual
    s_bar_qd: np.ndarray   # (T, 6)
    u_bar: np.ndarray      # (T-1, 3)
    lam_bar: np.ndarray    # (T-1, 2)


def _wholebody_targets(scn: WalkerScenario, phi_cen: Trajectory,
                       copies, coupling: CouplingState,
                       inertia: float) -> WholebodyTargets:
    m = scn.model.total_mass
    cen = phi_cen.states
    h_cen = np.column_stack([m * cen[:, 3:5], inertia * cen[:, 5]])
    s_bar = copies[CID.J] - coupling.duals[CID.J]
    return WholebodyTargets(
        c_t=cen[:, 0:2] - coupling.duals[CID.C],
        h_t=h_cen - coupling.duals[CID.H],
        lam_t=phi_cen.controls - coupling.duals[CID.LAM],
        s_bar_q=s_bar[:, _Q_ROWS],
        s_bar_qd=s_bar[:, _QD_ROWS],
        u_bar=copies[CID.T] - coupling.duals[CID.T],
        lam_bar=copies[CID.F] - coupling.duals[CID.F],
    )


def _batched_fd_sweep(scn: WalkerScenario, stance: int):
    """Cached batched central-difference sweep over one trajectory: returns
    a callable giving (fx, fu, Jg, glam) with Jg the Jacobian of g_lambda
    with respect to (x, u)."""
    mdl, h, dt = scn.model, scn.fd_step, scn.dt
    cache = {}

    def sweep(xs, us):
        key = (xs.tobytes(), us.tobytes())
        if cache.get("key") == key:
            return cache["val"]
        T1, n, mu = len(us), 12, 3
        base = np.concatenate([xs[:-1], us], axis=1)
        eye = np.eye(n + mu) * h
        pts = base[:, None, :] + np.concatenate([eye, -eye])[None, :, :]
        q2, qd2, lam = wm.wholebody_step(mdl, pts[..., :6], pts[..., 6:12],
                                         pts[..., 12:], stance, dt)
        nxt = np.concatenate([q2, qd2], axis=-1)
        dF = (nxt[:, :n + mu] - nxt[:, n + mu:]) / (2 * h)
        fx = np.swapaxes(dF[:, :n, :], 1, 2)
        fu = np.swapaxes(dF[:, n:, :], 1, 2)
        Jg = np.swapaxes((lam[:, :n + mu] - lam[:, n + mu:]) / (2 * h), 1, 2)
        glam0 = wm.contact_force(mdl, xs[:-1, :6], xs[:-1, 6:], us, stance)
        cache["key"], cache["val"] = key, (fx, fu, Jg, glam0)
        return cache["val"]

    return sweep


def build_tracking_cost(scn: WalkerScenario, x_ref: np.ndarray,
                        stance: int = 1) -> ddp.DdpProblem:
    """Plain reference-tracking DDP problem (no consensus terms), used to
    bootstrap a dynamically consistent trajectory from a kinematic
    reference."""
    wq, wqd, wu = scn.track_q_weight, scn.track_qd_weight, scn.torque_weight
    W = np.diag(np.concatenate([np.full(6, wq), np.full(6, wqd)]))
    sweep = _batched_fd_sweep(scn, stance)

    def stage(x, u, k):
        e = x - x_ref[k]
        return float(e @ W @ e + wu * np.sum(u ** 2))

    def terminal(x):
        e = x - x_ref[-1]
        return float(10.0 * e @ W @ e)

    def dyn_derivs(xs, us):
        fx, fu, _, _ = sweep(xs, us)
        return fx, fu

    def stage_derivs(xs, us):
        T1 = len(us)
        e = xs[:-1] - x_ref[:T1]
        lx = 2 * e @ W
        lu = 2 * wu * us
        lxx = np.tile(2 * W, (T1, 1, 1))
        luu = np.tile(2 * wu * np.eye(3), (T1, 1, 1))
        return lx, lu, lxx, luu, np.zeros((T1, 3, 12))

    def term_derivs(x):
        return 20.0 * W @ (x - x_ref[-1]), 20.0 * W

    return ddp.DdpProblem(wholebody_system(scn, stance), stage, terminal,
                          dyn_derivs, stage_derivs, term_derivs)


def build_wholebody_cost(scn: WalkerScenario, phi_cen: Trajectory,
                         copies, coupling: CouplingState,
                         foot_ref: np.ndarray, q_term: np.ndarray,
                         qd_term: np.ndarray, inertia: float,
                         stance: int = 1,
                         posture_ref: Optional[np.ndarray] = None
                         ) -> ddp.DdpProblem:
    """Whole-body DDP problem (13b): torque/swing-foot/terminal-posture local
    costs plus all six penalty terms, centroidal and projection quantities
    frozen. Derivatives are Gauss-Newton with one shared batched
    finite-difference sweep providing the dynamics and g_lambda Jacobians."""
    tg = _wholebody_targets(scn, phi_cen, copies, coupling, inertia)
    rho = coupling.rho
    mdl = scn.model
    T = phi_cen.horizon
    h = scn.fd_step
    if posture_ref is None:
        posture_ref = np.zeros((T, 12))
        wp = wpd = 0.0
    else:
        wp, wpd = scn.posture_weight, scn.posture_rate_weight

    def glam_single(x, u):
        return wm.contact_force(mdl, x[:6], x[6:], u, stance)

    def stage(x, u, k):
        q, qd = x[:6], x[6:]
        gl = glam_single(x, u)
        foot = wm.foot_position(mdl, q, 3 - stance)
        com = wm.com_position(mdl, q)
        mom = wm.centroidal_momentum_matrix(mdl, q) @ qd
        val = scn.torque_weight * np.sum(u ** 2) \
            + scn.foot_weight * np.sum((foot - foot_ref[k]) ** 2) \
            + wp * np.sum((q - posture_ref[k, :6]) ** 2) \
            + wpd * np.sum((qd - posture_ref[k, 6:]) ** 2) \
            + 0.5 * rho[CID.C] * np.sum((com - tg.c_t[k]) ** 2) \
            + 0.5 * rho[CID.H] * np.sum((mom - tg.h_t[k]) ** 2) \
            + 0.5 * rho[CID.LAM] * np.sum((gl - tg.lam_t[k]) ** 2) \
            + 0.5 * rho[CID.J] * (np.sum((q - tg.s_bar_q[k]) ** 2)
                                  + np.sum((qd - tg.s_bar_qd[k]) ** 2)) \
            + 0.5 * rho[CID.T] * np.sum((u - tg.u_bar[k]) ** 2) \
            + 0.5 * rho[CID.F] * np.sum((gl - tg.lam_bar[k]) ** 2)
        return float(val)

    def terminal(x):
        q, qd = x[:6], x[6:]
        com = wm.com_position(mdl, q)
        mom = wm.centroidal_momentum_matrix(mdl, q) @ qd
        k = T - 1
        val = scn.terminal_q_weight * np.sum((q - q_term) ** 2) \
            + scn.terminal_qd_weight * np.sum((qd - qd_term) ** 2) \
            + scn.foot_weight * np.sum(
                (wm.foot_position(mdl, q, 3 - stance) - foot_ref[k]) ** 2) \
            + 0.5 * rho[CID.C] * np.sum((com - tg.c_t[k]) ** 2) \
            + 0.5 * rho[CID.H] * np.sum((mom - tg.h_t[k]) ** 2) \
            + 0.5 * rho[CID.J] * (np.sum((q - tg.s_bar_q[k]) ** 2)
                                  + np.sum((qd - tg.s_bar_qd[k]) ** 2))
        return float(val)

    _fd_sweep = _batched_fd_sweep(scn, stance)

    def dyn_derivs(xs, us):
        fx, fu, _, _ = _fd_sweep(xs, us)
        return fx, fu

    def _momentum_jac(q, qd):
        """Jacobian of A_g(q) qd w.r.t. q by batched central differences."""
        K = len(q)
        pts = q[:, None, :] + np.concatenate([np.eye(6) * h,
                                              -np.eye(6) * h])[None, :, :]
        A = wm.centroidal_momentum_matrix(mdl, pts)        # (K, 12, 3, 6)
        mom = np.einsum("kpij,kj->kpi", A, qd)
        return np.swapaxes((mom[:, :6] - mom[:, 6:]) / (2 * h), 1, 2)  # (K,3,6)

    def stage_derivs(xs, us):
        T1 = len(us)
        fx, fu, Jg, glam0 = _fd_sweep(xs, us)
        q, qd = xs[:-1, :6], xs[:-1, 6:]
        lx = np.zeros((T1, 12)); lu = np.zeros((T1, 3))
        lxx = np.zeros((T1, 12, 12)); luu = np.zeros((T1, 3, 3))
        lux = np.zeros((T1, 3, 12))

        def add(res, Jx, Ju, w):
            nonlocal lx, lu, lxx, luu, lux
            lx += w * np.einsum("kvi,kv->ki", Jx, res)
            lxx += w * np.einsum("kvi,kvj->kij", Jx, Jx)
            if Ju is not None:
                lu += w * np.einsum("kvi,kv->ki", Ju, res)
                luu += w * np.einsum("kvi,kvj->kij", Ju, Ju)
                lux += w * np.einsum("kvi,kvj->kij", Ju, Jx)

        # torque regularization and box-consistency on u (identity Jacobians)
        lu += 2 * scn.torque_weight * us + rho[CID.T] * (us - tg.u_bar[:T1])
        luu += np.tile((2 * scn.torque_weight + rho[CID.T]) * np.eye(3),
                       (T1, 1, 1))
        # running posture tracking
        if wp > 0.0:
            Wp = np.diag(np.concatenate([np.full(6, 2 * wp),
                                         np.full(6, 2 * wpd)]))
            lx += (xs[:-1] - posture_ref[:T1]) @ Wp
            lxx += np.tile(Wp, (T1, 1, 1))
        # swing-foot tracking
        foot, Jf = wm.foot_jacobian(mdl, q, 3 - stance)
        Jfx = np.concatenate([Jf, np.zeros((T1, 2, 6))], axis=2)
        add(foot - foot_ref[:T1], Jfx, None, 2 * scn.foot_weight)
        # CoM consensus
        com = wm.com_position(mdl, q)
        Jcom = np.concatenate([wm.com_jacobian(mdl, q),
                               np.zeros((T1, 2, 6))], axis=2)
        add(com - tg.c_t[:T1], Jcom, None, rho[CID.C])
        # momentum consensus
        A = wm.centroidal_momentum_matrix(mdl, q)
        mom = np.einsum("kij,kj->ki", A, qd)
        Jmom = np.concatenate([_momentum_jac(q, qd), A], axis=2)
        add(mom - tg.h_t[:T1], Jmom, None, rho[CID.H])
        # contact-force consensus and cone consistency, shared Jacobian
        Jgx, Jgu = Jg[:, :, :12], Jg[:, :, 12:]
        add(glam0 - tg.lam_t[:T1], Jgx, Jgu, rho[CID.LAM])
        add(glam0 - tg.lam_bar[:T1], Jgx, Jgu, rho[CID.F])
        # state-box consistency (identity on x)
        lx += rho[CID.J] * (xs[:-1] - np.concatenate(
            [tg.s_bar_q[:T1], tg.s_bar_qd[:T1]], axis=1))
        lxx += np.tile(rho[CID.J] * np.eye(12), (T1, 1, 1))
        return lx, lu, lxx, luu, lux

    def term_derivs(x):
        q, qd = x[None, :6], x[None, 6:]
        k = T - 1
        g1 = np.zeros(12); H1 = np.zeros((12, 12))

        def add(res, Jx, w):
            nonlocal g1, H1
            g1 += w * Jx.T @ res
            H1 += w * Jx.T @ Jx

        foot, Jf = wm.foot_jacobian(mdl, q, 3 - stance)
        add((foot[0] - foot_ref[k]),
            np.concatenate([Jf[0], np.zeros((2, 6))], axis=1),
            2 * scn.foot_weight)
        com = wm.com_position(mdl, q)[0]
        add(com - tg.c_t[k],
            np.concatenate([wm.com_jacobian(mdl, q)[0], np.zeros((2, 6))],
                           axis=1), rho[CID.C])
        A = wm.centroidal_momentum_matrix(mdl, q)
        mom = (A[0] @ qd[0])
        Jmom = np.concatenate([_momentum_jac(q, qd)[0], A[0]], axis=1)
        add(mom - tg.h_t[k], Jmom, rho[CID.H])
        g1 += 2 * scn.terminal_q_weight * np.concatenate(
            [q[0] - q_term, np.zeros(6)])
        g1 += 2 * scn.terminal_qd_weight * np.concatenate(
            [np.zeros(6), qd[0] - qd_term])
        H1 += np.diag(np.concatenate(
            [np.full(6, 2 * scn.terminal_q_weight),
             np.full(6, 2 * scn.terminal_qd_weight)]))
        g1 += rho[CID.J] * (x - np.concatenate([tg.s_bar_q[k], tg.s_bar_qd[k]]))
        H1 += rho[CID.J] * np.eye(12)
        return g1, H1

    return ddp.DdpProblem(wholebody_system(scn, stance), stage, terminal,
                          dyn_derivs, stage_derivs, term_derivs)


def wholebody_local_cost(scn: WalkerScenario, phi_wbd: Trajectory,
                         foot_ref: np.ndarray, q_term: np.ndarray,
                         qd_term: np.ndarray, stance: int = 1,
                         posture_ref: Optional[np.ndarray] = None) -> float:
    q, qd = phi_wbd.states[:, :6], phi_wbd.states[:, 6:]
    foot = wm.foot_position(scn.model, q, 3 - stance)
    val = scn.torque_weight * np.sum(phi_wbd.controls ** 2) \
        + scn.foot_weight * np.sum((foot - foot_ref) ** 2) \
        + scn.terminal_q_weight * np.sum((q[-1] - q_term) ** 2) \
        + scn.terminal_qd_weight * np.sum((qd[-1] - qd_term) ** 2)
    if posture_ref is not None:
        val += scn.posture_weight * np.sum(
            (q[:-1] - posture_ref[:-1, :6]) ** 2)
        val += scn.posture_rate_weight * np.sum(
            (qd[:-1] - posture_ref[:-1, 6:]) ** 2)
    return float(val)


# ---------------------------------------------------------------------------
# blocks


def walker_blocks(scn: WalkerScenario, contact_point: np.ndarray,
                  foot_ref: np.ndarray, q_term: np.ndarray,
                  qd_term: np.ndarray, inertia: float, stance: int = 1,
                  posture_ref: Optional[np.ndarray] = None,
                  com_ref: Optional[np.ndarray] = None,
                  ddp_settings: Optional[ddp.DdpSettings] = None) -> AdmmBlocks:
    settings = ddp_settings or ddp.DdpSettings(
        max_iterations=25, cost_reduction_tol=1e-6)
    cen_settings = ddp.DdpSettings(max_iterations=25, cost_reduction_tol=1e-10)
    s_lo, s_hi = scn.state_bounds()
    u_lim = scn.torque_limit
    m = scn.model.total_mass
    quantity_cache: Dict[int, tuple] = {}

    def quantities(phi_wbd):
        key = id(phi_wbd)
        if key not in quantity_cache:
            quantity_cache.clear()
            quantity_cache[key] = wholebody_quantities(scn, phi_wbd, stance)
        return quantity_cache[key]

    def solve_centroidal(phi_cen, phi_wbd, copies, coupling):
        problem = build_centroidal_cost(scn, phi_wbd, coupling,
                                        contact_point, inertia, stance,
                                        com_ref)
        sol = ddp.solve(problem, phi_cen, cen_settings)
        return sol.trajectory, {
            "local_cost": centroidal_local_cost(scn, sol.trajectory, com_ref),
            "iterations": sol.iterations, "converged": sol.converged}

    def solve_wholebody(phi_wbd, phi_cen, copies, coupling):
        problem = build_wholebody_cost(scn, phi_cen, copies, coupling,
                                       foot_ref, q_term, qd_term, inertia,
                                       stance, posture_ref)
        sol = ddp.solve(problem, phi_wbd, settings)
        return sol.trajectory, {
            "local_cost": wholebody_local_cost(scn, sol.trajectory, foot_ref,
                                               q_term, qd_term, stance,
                                               posture_ref),
            "iterations": sol.iterations, "converged": sol.converged}

    def primal_values(phi_cen, phi_wbd):
        _, _, glam = quantities(phi_wbd)
        return {CID.J: assemble_generalized_state(phi_cen, phi_wbd),
                CID.T: phi_wbd.controls,
                CID.F: glam}

    def consensus_residuals(phi_cen, phi_wbd):
        com, mom, glam = quantities(phi_wbd)
        cen = phi_cen.states
        h_cen = np.column_stack([m * cen[:, 3:5], inertia * cen[:, 5]])
        return {CID.C: com - cen[:, 0:2],
                CID.H: mom - h_cen,
                CID.LAM: glam - phi_cen.controls}

    def project(targets):
        return {CID.J: project_box(targets[CID.J], s_lo, s_hi),
                CID.T: project_box(targets[CID.T], -u_lim, u_lim),
                CID.F: project_friction_cone_2d(targets[CID.F],
                                                scn.friction_coefficient)}

    return AdmmBlocks(projection_ids=(CID.J, CID.T, CID.F),
                      solve_wholebody=solve_wholebody,
                      primal_values=primal_values,
                      project=project,
                      consensus_ids=(CID.C, CID.H, CID.LAM),
                      solve_centroidal=solve_centroidal,
                      consensus_residuals=consensus_residuals)
