"""Planar kneed compass-gait walker: rigid-body dynamics with rigid point
contact, centroidal quantities and the coupling maps CoM(q), A_g(q), g_lambda.

Generalized coordinates q = (base_x, base_z, pitch, hip, knee1, knee2):
the base is the hip point, pitch is the absolute angle of the leg-1 thigh
measured from straight down (CCW positive), hip rotates the leg-2 thigh
relative to leg 1, and each knee folds its shank relative to its thigh
(0 = straight, range [0, pi]).

All kinematic/dynamic functions broadcast over leading axes of q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import NumericalError

NQ = 6
NU = 3

# absolute link angles = ANGLE_MAP @ q[2:]
# rows: leg1 thigh, leg1 shank, leg2 thigh, leg2 shank
ANGLE_MAP = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 1.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 1.0],
])


@dataclass(frozen=True)
class WalkerModel:
    thigh_length: float = 0.5
    shank_length: float = 0.5
    thigh_mass: float = 3.0
    shank_mass: float = 2.0
    gravity: float = 9.81
    knee_singularity_tol: float = 1e-3
    knee_regularization: float = 1e-8

    def __post_init__(self):
        if min(self.thigh_length, self.shank_length,
               self.thigh_mass, self.shank_mass) <= 0:
            raise ValueError("link lengths and masses must be positive")

    @property
    def total_mass(self) -> float:
        return 2.0 * (self.thigh_mass + self.shank_mass)

    @property
    def leg_length(self) -> float:
        return self.thigh_length + self.shank_length

    @property
    def masses(self) -> np.ndarray:
        return np.array([self.thigh_mass, self.shank_mass,
                         self.thigh_mass, self.shank_mass])

    @property
    def point_coeffs(self) -> np.ndarray:
        """Link-length coefficients of the four link-midpoint masses."""
        lt, ls = self.thigh_length, self.shank_length
        return np.array([
            [lt / 2, 0.0, 0.0, 0.0],
            [lt, ls / 2, 0.0, 0.0],
            [0.0, 0.0, lt / 2, 0.0],
            [0.0, 0.0, lt, ls / 2],
        ])

    def foot_coeffs(self, stance: int) -> np.ndarray:
        lt, ls = self.thigh_length, self.shank_length
        if stance == 1:
            return np.array([lt, ls, 0.0, 0.0])
        if stance == 2:
            return np.array([0.0, 0.0, lt, ls])
        raise ValueError("stance must be 1 or 2")

    @property
    def selection_matrix(self) -> np.ndarray:
        """B maps the 3 actuated joints (hip, knee1, knee2) into q-space."""
        B = np.zeros((NQ, NU))
        B[3, 0] = B[4, 1] = B[5, 2] = 1.0
        return B


def _dirs(angles: np.ndarray):
    """Unit link direction d(a)=(sin a, -cos a) and its derivative."""
    d = np.stack([np.sin(angles), -np.cos(angles)], axis=-1)
    dp = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return d, dp


def _point_and_jac(q: np.ndarray, coeffs: np.ndarray):
    """Position and Jacobian of a chain point defined by link coefficients.

    q: (..., 6); coeffs: (4,). Returns p (..., 2) and J (..., 2, 6).
    """
    angles = q[..., 2:] @ ANGLE_MAP.T
    d, dp = _dirs(angles)
    p = q[..., :2] + np.einsum("t,...tv->...v", coeffs, d)
    J = np.zeros(q.shape[:-1] + (2, NQ))
    J[..., 0, 0] = 1.0
    J[..., 1, 1] = 1.0
    # column j>=2: sum_t coeffs[t] * d'(a_t) * ANGLE_MAP[t, j-2]
    J[..., :, 2:] = np.einsum("t,...tv,tj->...vj", coeffs, dp, ANGLE_MAP)
    return p, J


def _jac_dot(q: np.ndarray, qd: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Time derivative of the chain-point Jacobian along qd."""
    angles = q[..., 2:] @ ANGLE_MAP.T
    adot = qd[..., 2:] @ ANGLE_MAP.T
    d, _ = _dirs(angles)
    Jd = np.zeros(q.shape[:-1] + (2, NQ))
    # d/dt d'(a) = -d(a) * adot
    Jd[..., :, 2:] = np.einsum("t,...t,...tv,tj->...vj", coeffs, adot, -d, ANGLE_MAP)
    return Jd


def point_positions(model: WalkerModel, q: np.ndarray) -> np.ndarray:
    """Positions of the four link-midpoint masses, (..., 4, 2)."""
    C = model.point_coeffs
    return np.stack([_point_and_jac(q, C[k])[0] for k in range(4)], axis=-2)


def foot_position(model: WalkerModel, q: np.ndarray, stance: int) -> np.ndarray:
    return _point_and_jac(q, model.foot_coeffs(stance))[0]


def foot_jacobian(model: WalkerModel, q: np.ndarray, stance: int):
    return _point_and_jac(q, model.foot_coeffs(stance))


def mass_matrix(model: WalkerModel, q: np.ndarray) -> np.ndarray:
    """Inertia matrix H(q), symmetric positive definite."""
    C = model.point_coeffs
    H = np.zeros(q.shape[:-1] + (NQ, NQ))
    for k, mk in enumerate(model.masses):
        _, J = _point_and_jac(q, C[k])
        H = H + mk * np.einsum("...vi,...vj->...ij", J, J)
    return H


def bias_forces(model: WalkerModel, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """Coriolis/centrifugal plus gravity generalized forces C(q, qd)."""
    C = model.point_coeffs
    out = np.zeros(q.shape[:-1] + (NQ,))
    gvec = np.array([0.0, model.gravity])
    for k, mk in enumerate(model.masses):
        _, J = _point_and_jac(q, C[k])
        Jd = _jac_dot(q, qd, C[k])
        acc = np.einsum("...vj,...j->...v", Jd, qd)
        out = out + mk * np.einsum("...vi,...v->...i", J, acc)
        out = out + mk * np.einsum("...vi,v->...i", J, gvec)
    return out


def potential_energy(model: WalkerModel, q: np.ndarray) -> np.ndarray:
    pts = point_positions(model, q)
    return model.gravity * np.einsum("k,...kv->...", model.masses,
                                     pts * np.array([0.0, 1.0]))


def kinetic_energy(model: WalkerModel, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    H = mass_matrix(model, q)
    return 0.5 * np.einsum("...i,...ij,...j->...", qd, H, qd)


def com_position(model: WalkerModel, q: np.ndarray) -> np.ndarray:
    """Mass-weighted mean of the link CoM positions."""
    pts = point_positions(model, q)
    return np.einsum("k,...kv->...v", model.masses, pts) / model.total_mass


def com_jacobian(model: WalkerModel, q: np.ndarray) -> np.ndarray:
    C = model.point_coeffs
    J = np.zeros(q.shape[:-1] + (2, NQ))
    for k, mk in enumerate(model.masses):
        J = J + mk * _point_and_jac(q, C[k])[1]
    return J / model.total_mass


def centroidal_momentum_matrix(model: WalkerModel, q: np.ndarray) -> np.ndarray:
    """A_g(q): qd -> (linear momentum (2), angular momentum about CoM (1))."""
    C = model.point_coeffs
    c = com_position(model, q)
    A = np.zeros(q.shape[:-1] + (3, NQ))
    for k, mk in enumerate(model.masses):
        p, J = _point_and_jac(q, C[k])
        A[..., :2, :] += mk * J
        r = p - c
        # planar wedge: r ^ v = r_x v_z - r_z v_x
        A[..., 2, :] += mk * (r[..., 0:1] * J[..., 1, :] - r[..., 1:2] * J[..., 0, :])
    return A


def centroidal_inertia(model: WalkerModel, q: np.ndarray) -> float:
    """Composite moment of inertia about the CoM at a given posture."""
    pts = point_positions(model, q)
    c = com_position(model, q)
    r2 = np.sum((pts - c[..., None, :]) ** 2, axis=-1)
    return float(np.einsum("k,...k->...", model.masses, r2))


def contact_dynamics(model: WalkerModel, q: np.ndarray, qd: np.ndarray,
                     u: np.ndarray, stance: int):
    """Contact-consistent accelerations and forces from the rigid-contact KKT
    system: H qdd + C = B u + Jc' lam with Jc qdd + Jcdot qd = 0.

    Returns (qdd, lam). Broadcasts over leading axes. Configurations within
    knee_singularity_tol of a straight knee receive a small diagonal
    regularization of the KKT matrix.
    """
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    u = np.asarray(u, dtype=float)
    H = mass_matrix(model, q)
    C = bias_forces(model, q, qd)
    coeffs = model.foot_coeffs(stance)
    _, Jc = _point_and_jac(q, coeffs)
    Jcd = _jac_dot(q, qd, coeffs)
    batch = q.shape[:-1]
    KKT = np.zeros(batch + (NQ + 2, NQ + 2))
    KKT[..., :NQ, :NQ] = H
    KKT[..., :NQ, NQ:] = -np.swapaxes(Jc, -1, -2)
    KKT[..., NQ:, :NQ] = Jc
    knee = q[..., 4:6]
    near_straight = np.any(np.abs(knee) < model.knee_singularity_tol, axis=-1)
    if np.any(near_straight):
        eye = np.eye(NQ + 2) * model.knee_regularization
        KKT = KKT + np.where(near_straight[..., None, None], eye, 0.0)
    rhs = np.concatenate([
        np.einsum("ij,...j->...i", model.selection_matrix, u) - C,
        -np.einsum("...vj,...j->...v", Jcd, qd),
    ], axis=-1)
    try:
        sol = np.linalg.solve(KKT, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"contact KKT system singular: {exc}") from exc
    return sol[..., :NQ], sol[..., NQ:]


def contact_force(model: WalkerModel, q: np.ndarray, qd: np.ndarray,
                  u: np.ndarray, stance: int) -> np.ndarray:
    """The map g_lambda(q, qd, u)."""
    return contact_dynamics(model, q, qd, u, stance)[1]


def _constrained_solve(model: WalkerModel, q: np.ndarray, Jc: np.ndarray,
                       rhs: np.ndarray) -> np.ndarray:
    """Mass-weighted least-squares solve: delta = H^-1 Jc' (Jc H^-1 Jc')^-1 rhs."""
    H = mass_matrix(model, q)
    HinvJt = np.linalg.solve(H, np.swapaxes(Jc, -1, -2))
    S = np.einsum("...vi,...iw->...vw", Jc, HinvJt)
    y = np.linalg.solve(S, rhs[..., None])[..., 0]
    return np.einsum("...iv,...v->...i", HinvJt, y)


def wholebody_step(model: WalkerModel, q: np.ndarray, qd: np.ndarray,
                   u: np.ndarray, stance: int, dt: float,
                   newton_iters: int = 2):
    """Semi-implicit Euler step of the contact-consistent dynamics.

    The new velocity is projected onto the contact constraint and the new
    configuration receives Newton corrections pinning the stance foot to its
    pre-step position. Returns (q_next, qd_next, lam).
    """
    qdd, lam = contact_dynamics(model, q, qd, u, stance)
    coeffs = model.foot_coeffs(stance)
    anchor, _ = _point_and_jac(q, coeffs)
    qd2 = qd + dt * qdd
    _, Jc = _point_and_jac(q, coeffs)
    qd2 = qd2 - _constrained_solve(model, q, Jc,
                                   np.einsum("...vj,...j->...v", Jc, qd2))
    q2 = q + dt * qd2
    for _ in range(newton_iters):
        p2, Jc2 = _point_and_jac(q2, coeffs)
        q2 = q2 - _constrained_solve(model, q2, Jc2, p2 - anchor)
    p2, Jc2 = _point_and_jac(q2, coeffs)
    qd2 = qd2 - _constrained_solve(model, q2, Jc2,
                                   np.einsum("...vj,...j->...v", Jc2, qd2))
    return q2, qd2, lam


def swap_stance_coordinates(x: np.ndarray) -> np.ndarray:
    """Relabel leg 2 as leg 1 in a whole-body state (q, qd) or in q alone."""
    x = np.asarray(x, dtype=float)
    S = np.eye(NQ)
    S[2, 3] = 1.0     # new pitch = pitch + hip
    S[3, 3] = -1.0    # new hip = -hip
    S[4, 4], S[4, 5] = 0.0, 1.0
    S[5, 5], S[5, 4] = 0.0, 1.0
    if x.shape[-1] == NQ:
        return x @ S.T
    full = np.zeros((2 * NQ, 2 * NQ))
    full[:NQ, :NQ] = S
    full[NQ:, NQ:] = S
    return x @ full.T


def impact_velocity_projection(model: WalkerModel, q: np.ndarray,
                               qd: np.ndarray, stance: int) -> np.ndarray:
    """Plastic-impact velocity map: zero post-impact velocity of the new
    stance foot, mass-weighted."""
    _, Jc = _point_and_jac(q, model.foot_coeffs(stance))
    return qd - _constrained_solve(model, q, Jc,
                                   np.einsum("...vj,...j->...v", Jc, qd))


def static_hold_controls(model: WalkerModel, q: np.ndarray, stance: int):
    """Least-squares torques/forces holding a posture at rest.

    Solves C(q, 0) = B u + Jc' lam; exact when the CoM sits above the
    contact point. Returns (u, lam, residual_norm).
    """
    C = bias_forces(model, q, np.zeros_like(q))
    _, Jc = _point_and_jac(q, model.foot_coeffs(stance))
    A = np.concatenate([model.selection_matrix, np.swapaxes(Jc, -1, -2)], axis=-1)
    sol, res, _, _ = np.linalg.lstsq(A, C, rcond=None)
    resid = float(np.linalg.norm(A @ sol - C))
    return sol[:NU], sol[NU:], resid


def leg_inverse_kinematics(model: WalkerModel, hip: np.ndarray,
                           foot: np.ndarray):
    """Thigh absolute angle and knee fold reaching a foot point from a hip
    point; knee in [0, pi]."""
    lt, ls = model.thigh_length, model.shank_length
    delta = np.asarray(foot, dtype=float) - np.asarray(hip, dtype=float)
    r2 = float(delta @ delta)
    r = np.sqrt(r2)
    if r > lt + ls + 1e-12 or r < abs(lt - ls) - 1e-12:
        raise ValueError(f"foot target at distance {r:.3f} unreachable")
    ck = np.clip((r2 - lt ** 2 - ls ** 2) / (2 * lt * ls), -1.0, 1.0)
    knee = float(np.arccos(ck))
    beta = float(np.arctan2(delta[0], -delta[1]))
    gamma = float(np.arctan2(ls * np.sin(knee), lt + ls * np.cos(knee)))
    return beta - gamma, knee


def posture_from_feet(model: WalkerModel, hip: np.ndarray,
                      stance_foot: np.ndarray, swing_foot: np.ndarray) -> np.ndarray:
    """Full configuration with leg 1 on stance_foot and leg 2 on swing_foot."""
    th1, k1 = leg_inverse_kinematics(model, hip, stance_foot)
    th2, k2 = leg_inverse_kinematics(model, hip, swing_foot)
    return np.array([hip[0], hip[1], th1, th2 - th1, k1, k2])
