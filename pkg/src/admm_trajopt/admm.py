"""Multi-block ADMM: primal sequencing, dual updates, residual monitoring,
stopping tests, and the acceleration variants (over-relaxation, varying
penalty, stage-wise accelerated)."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .core import Trajectory


class ConstraintId(str, enum.Enum):
    """The six coupling constraints: CoM, momentum and contact-force
    consensus plus state-box, control-box and friction-cone consistency."""

    C = "c"
    H = "h"
    LAM = "lam"
    J = "j"
    T = "t"
    F = "f"


CONSENSUS_IDS = (ConstraintId.C, ConstraintId.H, ConstraintId.LAM)
PROJECTION_IDS = (ConstraintId.J, ConstraintId.T, ConstraintId.F)


class Variant(str, enum.Enum):
    VANILLA = "vanilla"
    OVER_RELAXED = "over_relaxed"
    VARYING_PENALTY = "varying_penalty"
    SWA = "swa"


class Decision(str, enum.Enum):
    CONTINUE = "continue"
    CONVERGED = "converged"
    MAX_ITER = "max_iter"


@dataclass
class CouplingState:
    """Scaled duals w_i, penalties rho_i and the latest residuals per id."""

    duals: Dict[ConstraintId, np.ndarray]
    rho: Dict[ConstraintId, float]
    primal_residuals: Dict[ConstraintId, np.ndarray] = field(default_factory=dict)
    dual_residuals: Dict[ConstraintId, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if any(r <= 0 for r in self.rho.values()):
            raise ValueError("penalties rho must be positive")

    def copy(self) -> "CouplingState":
        return CouplingState({k: v.copy() for k, v in self.duals.items()},
                             dict(self.rho),
                             {k: v.copy() for k, v in self.primal_residuals.items()},
                             {k: v.copy() for k, v in self.dual_residuals.items()})


@dataclass(frozen=True)
class AccelerationConfig:
    variant: Variant = Variant.VANILLA
    alpha: float = 1.65
    mu: float = 10.0
    tau_incr: float = 2.0
    tau_decr: float = 2.0
    k_sw: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.mu <= 1 or self.tau_incr <= 1 or self.tau_decr <= 1:
            raise ValueError("mu, tau_incr, tau_decr must exceed 1")
        if self.k_sw < 0:
            raise ValueError("k_sw must be nonnegative")

    @property
    def effective_alpha(self) -> float:
        if self.variant in (Variant.OVER_RELAXED, Variant.SWA):
            return self.alpha
        return 1.0

    def penalty_adaptation_active(self, iteration: int) -> bool:
        if self.variant == Variant.VARYING_PENALTY:
            return True
        if self.variant == Variant.SWA:
            return iteration > self.k_sw
        return False


@dataclass(frozen=True)
class StoppingCriteria:
    eps_pri: Dict[ConstraintId, float]
    eps_cost: float = 1e-3
    max_iterations: int = 50

    def __post_init__(self):
        if any(e <= 0 for e in self.eps_pri.values()) or self.eps_cost <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class IterationRecord:
    iteration: int
    residual_norms: Dict[ConstraintId, float]
    local_cost_cen: float
    local_cost_wbd: float
    rho: Dict[ConstraintId, float]
    wall_time: float
    block_order: tuple
    subsolver_iterations: Dict[str, int] = field(default_factory=dict)
    subsolver_stalled: Dict[str, bool] = field(default_factory=dict)


@dataclass
class AdmmTrace:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def residual_history(self, cid: ConstraintId) -> np.ndarray:
        return np.array([r.residual_norms[cid] for r in self.records])

    def wbd_cost_history(self) -> np.ndarray:
        return np.array([r.local_cost_wbd for r in self.records])


def relax(primal: Dict[ConstraintId, np.ndarray],
          copies: Dict[ConstraintId, np.ndarray],
          alpha: float) -> Dict[ConstraintId, np.ndarray]:
    """Over/under-relaxed blend alpha * primal + (1 - alpha) * copies."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    return {i: alpha * primal[i] + (1.0 - alpha) * copies[i] for i in primal}


def dual_update(coupling: CouplingState,
                residuals: Dict[ConstraintId, np.ndarray]) -> CouplingState:
    """Scaled-dual ascent w_i <- w_i + r_i; nothing else mutated."""
    out = coupling.copy()
    for i, r in residuals.items():
        out.duals[i] = out.duals[i] + r
    return out


def adapt_penalty(coupling: CouplingState, cfg: AccelerationConfig,
                  iteration: int) -> CouplingState:
    """Varying-penalty update for the projection constraints {j, t, f}.

    rho grows by tau_incr when the primal residual dominates, shrinks by
    tau_decr when the dual residual dominates; the scaled dual is rescaled
    so rho * w is preserved. A no-op whenever the variant or stage disables
    adaptation.
    """
    if not cfg.penalty_adaptation_active(iteration):
        return coupling
    out = coupling.copy()
    for i in PROJECTION_IDS:
        if i not in out.primal_residuals or i not in out.dual_residuals:
            continue
        r2 = float(np.sum(out.primal_residuals[i] ** 2))
        d2 = float(np.sum(out.dual_residuals[i] ** 2))
        old = out.rho[i]
        if r2 > cfg.mu * d2:
            out.rho[i] = old * cfg.tau_incr
        elif d2 > cfg.mu * r2:
            out.rho[i] = old / cfg.tau_decr
        if out.rho[i] != old:
            out.duals[i] = out.duals[i] * (old / out.rho[i])
    return out


def check_stopping(trace: AdmmTrace, criteria: StoppingCriteria) -> Decision:
    """Converged iff every residual norm meets its primal tolerance and the
    whole-body local-cost change meets eps_cost; otherwise max_iter at the
    iteration cap, else continue."""
    if not trace.records:
        raise ValueError("trace is empty")
    last = trace.records[-1]
    residuals_ok = all(last.residual_norms[i] <= eps
                       for i, eps in criteria.eps_pri.items()
                       if i in last.residual_norms)
    cost_ok = False
    if len(trace.records) >= 2:
        prev = trace.records[-2]
        cost_ok = abs(last.local_cost_wbd - prev.local_cost_wbd) <= criteria.eps_cost
    if residuals_ok and cost_ok:
        return Decision.CONVERGED
    if last.iteration >= criteria.max_iterations:
        return Decision.MAX_ITER
    return Decision.CONTINUE


@dataclass
class AdmmBlocks:
    """Callbacks wiring concrete models into the splitting scheme.

    solve_centroidal/solve_wholebody run one warm-started DDP sub-solve and
    return (trajectory, info dict with 'local_cost', 'iterations',
    'converged'). primal_values exposes the quantities tied to projection
    copies (s, u, g_lambda); consensus_residuals evaluates r_c, r_h, r_lam;
    project maps targets (relaxed primal + dual) to new copies.
    """

    projection_ids: Sequence[ConstraintId]
    solve_wholebody: Callable
    primal_values: Callable
    project: Callable
    consensus_ids: Sequence[ConstraintId] = ()
    solve_centroidal: Optional[Callable] = None
    consensus_residuals: Optional[Callable] = None


@dataclass
class AdmmResult:
    phi_cen: Optional[Trajectory]
    phi_wbd: Trajectory
    copies: Dict[ConstraintId, np.ndarray]
    coupling: CouplingState
    trace: AdmmTrace
    decision: Decision


def compute_residuals(blocks: AdmmBlocks, phi_cen, phi_wbd,
                      copies: Dict[ConstraintId, np.ndarray]
                      ) -> Dict[ConstraintId, np.ndarray]:
    """Primal residuals for every active coupling constraint."""
    res: Dict[ConstraintId, np.ndarray] = {}
    if blocks.consensus_ids:
        res.update(blocks.consensus_residuals(phi_cen, phi_wbd))
    primal = blocks.primal_values(phi_cen, phi_wbd)
    for i in blocks.projection_ids:
        res[i] = primal[i] - copies[i]
    return res


def solve_admm(blocks: AdmmBlocks, phi_cen: Optional[Trajectory],
               phi_wbd: Trajectory, coupling: CouplingState,
               cfg: AccelerationConfig, criteria: StoppingCriteria,
               copies: Optional[Dict[ConstraintId, np.ndarray]] = None,
               monitor: Optional[Callable] = None) -> AdmmResult:
    """Gauss-Seidel multi-block loop: centroidal DDP, whole-body DDP,
    relaxation, projection, dual ascent, penalty adaptation, stopping test.

    Warm starts flow through: each iteration reuses the previous iteration's
    trajectories and copies. Sub-solver stalls are tolerated and recorded.
    monitor, when given, is called as monitor(iteration, phi_cen, phi_wbd)
    after every completed iteration.
    """
    active = tuple(blocks.consensus_ids) + tuple(blocks.projection_ids)
    for i in active:
        if i not in coupling.duals or i not in coupling.rho:
            raise ValueError(f"coupling state missing constraint {i.value}")
    coupling = coupling.copy()
    if copies is None:
        primal0 = blocks.primal_values(phi_cen, phi_wbd)
        copies = blocks.project({i: primal0[i] + coupling.duals[i]
                                 for i in blocks.projection_ids})
    trace = AdmmTrace()
    decision = Decision.CONTINUE
    for it in range(1, criteria.max_iterations + 1):
        t0 = time.perf_counter()
        order = []
        info_cen = {"local_cost": 0.0, "iterations": 0, "converged": True}
        if blocks.solve_centroidal is not None:
            phi_cen, info_cen = blocks.solve_centroidal(
                phi_cen, phi_wbd, copies, coupling)
            order.append("centroidal")
        phi_wbd, info_wbd = blocks.solve_wholebody(
            phi_wbd, phi_cen, copies, coupling)
        order.append("wholebody")

        primal = blocks.primal_values(phi_cen, phi_wbd)
        relaxed = relax(primal, copies, cfg.effective_alpha)
        prev_copies = copies
        copies = blocks.project({i: relaxed[i] + coupling.duals[i]
                                 for i in blocks.projection_ids})
        order.append("projection")

        residuals: Dict[ConstraintId, np.ndarray] = {}
        if blocks.consensus_ids:
            residuals.update(blocks.consensus_residuals(phi_cen, phi_wbd))
        true_proj = {i: primal[i] - copies[i] for i in blocks.projection_ids}
        relaxed_proj = {i: relaxed[i] - copies[i] for i in blocks.projection_ids}
        residuals.update(true_proj)

        coupling.primal_residuals = residuals
        coupling.dual_residuals = {
            i: coupling.rho[i] * (copies[i] - prev_copies[i])
            for i in blocks.projection_ids}
        coupling = dual_update(coupling, {**{i: residuals[i]
                                             for i in blocks.consensus_ids},
                                          **relaxed_proj})
        order.append("dual")
        coupling = adapt_penalty(coupling, cfg, it)

        trace.records.append(IterationRecord(
            iteration=it,
            residual_norms={i: float(np.linalg.norm(residuals[i]))
                            for i in active},
            local_cost_cen=float(info_cen["local_cost"]),
            local_cost_wbd=float(info_wbd["local_cost"]),
            rho={i: coupling.rho[i] for i in active},
            wall_time=time.perf_counter() - t0,
            block_order=tuple(order),
            subsolver_iterations={"centroidal": info_cen["iterations"],
                                  "wholebody": info_wbd["iterations"]},
            subsolver_stalled={"centroidal": not info_cen["converged"],
                               "wholebody": not info_wbd["converged"]},
        ))
        if monitor is not None:
            monitor(it, phi_cen, phi_wbd)
        decision = check_stopping(trace, criteria)
        if decision != Decision.CONTINUE:
            break
    return AdmmResult(phi_cen, phi_wbd, copies, coupling, trace, decision)
