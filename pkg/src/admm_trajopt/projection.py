"""Projection sub-block: saturation onto box sets and the planar friction cone."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DimensionError


@dataclass(frozen=True)
class AdmissibleSets:
    """Box bounds for states/controls and the friction coefficient.

    Bounds may be +-inf; lower <= upper coordinate-wise.
    """

    state_lower: np.ndarray
    state_upper: np.ndarray
    control_lower: np.ndarray
    control_upper: np.ndarray
    friction_coefficient: float = 1.0

    def __post_init__(self):
        for name in ("state_lower", "state_upper", "control_lower", "control_upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(self.state_lower > self.state_upper) or \
           np.any(self.control_lower > self.control_upper):
            raise ValueError("lower bounds must not exceed upper bounds")
        if self.friction_coefficient <= 0:
            raise ValueError("friction coefficient must be positive")


def project_box(v: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Coordinate-wise clamp of v into [lower, upper]."""
    return np.clip(np.asarray(v, dtype=float), lower, upper)


def project_friction_cone_2d(f: np.ndarray, mu: float) -> np.ndarray:
    """Euclidean projection of (fx, fz) onto {|fx| <= mu * fz}.

    Identity inside the cone, the apex for points in the polar cone, and the
    closest boundary-ray point otherwise. Vectorized over leading axes.
    """
    if mu <= 0:
        raise ValueError("friction coefficient must be positive")
    f = np.asarray(f, dtype=float)
    fx, fz = f[..., 0], f[..., 1]
    inside = np.abs(fx) <= mu * fz
    polar = fz <= -mu * np.abs(fx)
    # closest point on the boundary ray (mu*s, 1)/sqrt(1+mu^2), s = sign(fx)
    t = (mu * np.abs(fx) + fz) / (1.0 + mu ** 2)
    bx = np.sign(fx) * mu * t
    bz = t
    out = np.empty_like(f)
    out[..., 0] = np.where(inside, fx, np.where(polar, 0.0, bx))
    out[..., 1] = np.where(inside, fz, np.where(polar, 0.0, bz))
    return out


def project_block(state_targets: Optional[np.ndarray],
                  control_targets: Optional[np.ndarray],
                  force_targets: Optional[np.ndarray],
                  sets: AdmissibleSets) -> tuple:
    """Exact minimizer of the projection sub-problem.

    Each target is the relaxed primal value plus the scaled dual (s + w_j,
    u + w_t, g_lambda + w_f), one row per time step; a None target means the
    corresponding constraint is inactive. The objective is a separable
    squared distance, so the penalty weights do not affect the minimizer.
    Returns (s_bar, u_bar, lambda_bar) with the same shapes.
    """
    lengths = {t.shape[0] for t in (state_targets, control_targets, force_targets)
               if t is not None}
    if len(lengths) > 1:
        raise DimensionError(f"targets disagree on horizon: {sorted(lengths)}")
    s_bar = u_bar = lam_bar = None
    if state_targets is not None:
        state_targets = np.asarray(state_targets, dtype=float)
        if state_targets.shape[1] != _bound_dim(sets.state_lower):
            raise DimensionError("state target dimension does not match bounds")
        s_bar = project_box(state_targets, sets.state_lower, sets.state_upper)
    if control_targets is not None:
        control_targets = np.asarray(control_targets, dtype=float)
        if control_targets.shape[1] != _bound_dim(sets.control_lower):
            raise DimensionError("control target dimension does not match bounds")
        u_bar = project_box(control_targets, sets.control_lower, sets.control_upper)
    if force_targets is not None:
        force_targets = np.asarray(force_targets, dtype=float)
        if force_targets.shape[1] != 2:
            raise DimensionError("force targets must be planar (fx, fz)")
        lam_bar = project_friction_cone_2d(force_targets, sets.friction_coefficient)
    return s_bar, u_bar, lam_bar


def _bound_dim(bound: np.ndarray) -> int:
    return int(np.asarray(bound).shape[0])
