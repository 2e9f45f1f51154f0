import numpy as np
import pytest

from admm_trajopt.admm import (AccelerationConfig, AdmmBlocks, ConstraintId,
                               CouplingState, Decision, IterationRecord,
                               AdmmTrace, StoppingCriteria, Variant,
                               adapt_penalty, check_stopping, compute_residuals,
                               dual_update, relax, solve_admm)
from admm_trajopt.core import Trajectory

T1 = 4
DT = 0.1


def _traj(controls):
    controls = np.asarray(controls, dtype=float).reshape(-1, 1)
    return Trajectory(np.zeros((len(controls) + 1, 1)), controls, DT)


def toy_blocks(u_star, lo=-1.0, hi=1.0, with_centroidal=False):
    """A scalar consensus problem: the 'whole-body' block pulls its controls
    toward u_star against the control-consistency penalty; the projection
    clamps to [lo, hi]; the optional 'centroidal' block tracks the controls
    through a CoM-style consensus constraint."""

    def solve_wholebody(phi_wbd, phi_cen, copies, coupling):
        rho = coupling.rho[ConstraintId.T]
        target = copies[ConstraintId.T] - coupling.duals[ConstraintId.T]
        u = (2.0 * u_star + rho * target) / (2.0 + rho)
        if with_centroidal:
            rho_c = coupling.rho[ConstraintId.C]
            c_tgt = phi_cen.controls + coupling.duals[ConstraintId.C]
            u = (2.0 * u_star + rho * target + rho_c * c_tgt) \
                / (2.0 + rho + rho_c)
        traj = _traj(u)
        cost = float(np.sum((u - u_star) ** 2))
        return traj, {"local_cost": cost, "iterations": 1, "converged": True}

    def solve_centroidal(phi_cen, phi_wbd, copies, coupling):
        rho_c = coupling.rho[ConstraintId.C]
        c = (rho_c * (phi_wbd.controls - coupling.duals[ConstraintId.C])) \
            / (0.1 + rho_c)
        traj = _traj(c)
        return traj, {"local_cost": float(np.sum(0.05 * c ** 2)),
                      "iterations": 1, "converged": True}

    def primal_values(phi_cen, phi_wbd):
        return {ConstraintId.T: phi_wbd.controls}

    def consensus_residuals(phi_cen, phi_wbd):
        return {ConstraintId.C: phi_wbd.controls - phi_cen.controls}

    def project(targets):
        return {ConstraintId.T: np.clip(targets[ConstraintId.T], lo, hi)}

    kwargs = {}
    if with_centroidal:
        kwargs = dict(consensus_ids=(ConstraintId.C,),
                      solve_centroidal=solve_centroidal,
                      consensus_residuals=consensus_residuals)
    return AdmmBlocks(projection_ids=(ConstraintId.T,),
                      solve_wholebody=solve_wholebody,
                      primal_values=primal_values,
                      project=project, **kwargs)


def toy_coupling(with_centroidal=False, rho_t=1.0, rho_c=1.0):
    duals = {ConstraintId.T: np.zeros((T1, 1))}
    rho = {ConstraintId.T: rho_t}
    if with_centroidal:
        duals[ConstraintId.C] = np.zeros((T1, 1))
        rho[ConstraintId.C] = rho_c
    return CouplingState(duals=duals, rho=rho)


def toy_criteria(**kw):
    eps = {ConstraintId.T: 1e-8}
    eps.update(kw.pop("eps_pri", {}))
    return StoppingCriteria(eps_pri=eps, eps_cost=kw.pop("eps_cost", 1e-10),
                            max_iterations=kw.pop("max_iterations", 200))


class TestConfigValidation:
    def test_alpha_range(self):
        with pytest.raises(ValueError):
            AccelerationConfig(alpha=2.0)
        with pytest.raises(ValueError):
            AccelerationConfig(alpha=0.0)

    def test_mu_tau_ranges(self):
        for kw in ({"mu": 1.0}, {"tau_incr": 0.5}, {"tau_decr": 1.0}):
            with pytest.raises(ValueError):
                AccelerationConfig(**kw)

    def test_k_sw_nonnegative(self):
        with pytest.raises(ValueError):
            AccelerationConfig(k_sw=-1)

    def test_effective_alpha_by_variant(self):
        assert AccelerationConfig(Variant.VANILLA, alpha=1.65).effective_alpha == 1.0
        assert AccelerationConfig(Variant.VARYING_PENALTY,
                                  alpha=1.65).effective_alpha == 1.0
        assert AccelerationConfig(Variant.OVER_RELAXED,
                                  alpha=1.65).effective_alpha == 1.65
        assert AccelerationConfig(Variant.SWA, alpha=1.65).effective_alpha == 1.65

    def test_penalty_adaptation_stage(self):
        assert not AccelerationConfig(Variant.VANILLA).penalty_adaptation_active(99)
        assert not AccelerationConfig(Variant.OVER_RELAXED).penalty_adaptation_active(99)
        assert AccelerationConfig(Variant.VARYING_PENALTY).penalty_adaptation_active(1)
        swa = AccelerationConfig(Variant.SWA, k_sw=16)
        assert not swa.penalty_adaptation_active(16)
        assert swa.penalty_adaptation_active(17)

    def test_stopping_criteria_validation(self):
        with pytest.raises(ValueError):
            StoppingCriteria(eps_pri={ConstraintId.T: 0.0})
        with pytest.raises(ValueError):
            StoppingCriteria(eps_pri={ConstraintId.T: 1.0}, eps_cost=-1.0)
        with pytest.raises(ValueError):
            StoppingCriteria(eps_pri={ConstraintId.T: 1.0}, max_iterations=0)

    def test_coupling_requires_positive_rho(self):
        with pytest.raises(ValueError):
            CouplingState(duals={ConstraintId.T: np.zeros((1, 1))},
                          rho={ConstraintId.T: 0.0})


class TestRelax:
    def test_alpha_one_is_identity(self):
        p = {ConstraintId.T: np.array([[1.0], [2.0]])}
        c = {ConstraintId.T: np.array([[5.0], [5.0]])}
        out = relax(p, c, 1.0)
        assert np.array_equal(out[ConstraintId.T], p[ConstraintId.T])

    def test_scalar_example(self):
        out = relax({ConstraintId.T: np.array([[1.0]])},
                    {ConstraintId.T: np.array([[0.0]])}, 1.65)
        assert out[ConstraintId.T][0, 0] == pytest.approx(1.65)

    def test_consensus_fixed_point(self):
        v = np.array([[0.7], [-0.3]])
        out = relax({ConstraintId.T: v}, {ConstraintId.T: v.copy()}, 1.65)
        assert np.allclose(out[ConstraintId.T], v)

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            relax({}, {}, 2.0)


class TestDualUpdate:
    def test_zero_residuals_fixed_point(self):
        c = toy_coupling()
        out = dual_update(c, {ConstraintId.T: np.zeros((T1, 1))})
        assert np.array_equal(out.duals[ConstraintId.T],
                              c.duals[ConstraintId.T])

    def test_accumulates_residual(self):
        c = toy_coupling()
        r = np.zeros((T1, 1))
        r[2, 0] = 1.0
        out = dual_update(c, {ConstraintId.T: r})
        assert np.array_equal(out.duals[ConstraintId.T], r)
        out2 = dual_update(out, {ConstraintId.T: r})
        assert np.array_equal(out2.duals[ConstraintId.T], 2 * r)

    def test_does_not_mutate_input(self):
        c = toy_coupling()
        dual_update(c, {ConstraintId.T: np.ones((T1, 1))})
        assert np.array_equal(c.duals[ConstraintId.T], np.zeros((T1, 1)))


def _coupling_with_residuals(r_sq, d_sq, rho=4.0, w=3.0):
    c = toy_coupling(rho_t=rho)
    c.duals[ConstraintId.T] = np.full((T1, 1), w)
    c.primal_residuals = {ConstraintId.T:
                          np.sqrt(r_sq / T1) * np.ones((T1, 1))}
    c.dual_residuals = {ConstraintId.T:
                        np.sqrt(d_sq / T1) * np.ones((T1, 1))}
    return c


class TestAdaptPenalty:
    CFG = AccelerationConfig(Variant.VARYING_PENALTY, mu=10.0,
                             tau_incr=2.0, tau_decr=2.0)

    def test_increase_branch_rescales_dual(self):
        c = _coupling_with_residuals(r_sq=100.0, d_sq=1.0)
        out = adapt_penalty(c, self.CFG, iteration=1)
        assert out.rho[ConstraintId.T] == pytest.approx(8.0)
        assert np.allclose(out.duals[ConstraintId.T], 1.5)

    def test_decrease_branch_rescales_dual(self):
        c = _coupling_with_residuals(r_sq=1.0, d_sq=100.0)
        out = adapt_penalty(c, self.CFG, iteration=1)
        assert out.rho[ConstraintId.T] == pytest.approx(2.0)
        assert np.allclose(out.duals[ConstraintId.T], 6.0)

    def test_dead_band_unchanged(self):
        c = _coupling_with_residuals(r_sq=5.0, d_sq=1.0)
        out = adapt_penalty(c, self.CFG, iteration=1)
        assert out.rho[ConstraintId.T] == 4.0
        assert np.allclose(out.duals[ConstraintId.T], 3.0)

    @pytest.mark.parametrize("r_sq,d_sq", [(100.0, 1.0), (1.0, 100.0)])
    def test_unscaled_dual_invariant(self, r_sq, d_sq):
        c = _coupling_with_residuals(r_sq=r_sq, d_sq=d_sq)
        before = c.rho[ConstraintId.T] * c.duals[ConstraintId.T]
        out = adapt_penalty(c, self.CFG, iteration=1)
        after = out.rho[ConstraintId.T] * out.duals[ConstraintId.T]
        assert np.allclose(before, after)

    def test_vanilla_is_noop(self):
        c = _coupling_with_residuals(r_sq=100.0, d_sq=1.0)
        out = adapt_penalty(c, AccelerationConfig(Variant.VANILLA), 1)
        assert out.rho[ConstraintId.T] == 4.0

    def test_swa_stage_gating(self):
        cfg = AccelerationConfig(Variant.SWA, mu=10.0, k_sw=16)
        c = _coupling_with_residuals(r_sq=100.0, d_sq=1.0)
        assert adapt_penalty(c, cfg, 16).rho[ConstraintId.T] == 4.0
        assert adapt_penalty(c, cfg, 17).rho[ConstraintId.T] == 8.0

    def test_only_projection_ids_adapted(self):
        c = toy_coupling(with_centroidal=True)
        c.primal_residuals = {i: np.full((T1, 1), 10.0) for i in c.duals}
        c.dual_residuals = {i: np.full((T1, 1), 0.1) for i in c.duals}
        out = adapt_penalty(c, self.CFG, 1)
        assert out.rho[ConstraintId.C] == 1.0
        assert out.rho[ConstraintId.T] == 2.0


def _record(it, res, cost):
    return IterationRecord(iteration=it,
                           residual_norms={ConstraintId.T: res},
                           local_cost_cen=0.0, local_cost_wbd=cost,
                           rho={ConstraintId.T: 1.0}, wall_time=0.0,
                           block_order=("wholebody", "projection", "dual"))


class TestCheckStopping:
    CRIT = StoppingCriteria(eps_pri={ConstraintId.T: 1e-3}, eps_cost=1e-3,
                            max_iterations=50)

    def test_empty_trace_rejected(self):
        with pytest.raises(ValueError):
            check_stopping(AdmmTrace(), self.CRIT)

    def test_first_iteration_continues_without_cost_history(self):
        trace = AdmmTrace([_record(1, 1e-9, 1.0)])
        assert check_stopping(trace, self.CRIT) == Decision.CONTINUE

    def test_residuals_ok_cost_change_too_large(self):
        trace = AdmmTrace([_record(1, 1e-9, 1.0), _record(2, 1e-9, 0.5)])
        assert check_stopping(trace, self.CRIT) == Decision.CONTINUE

    def test_cost_ok_residuals_too_large(self):
        trace = AdmmTrace([_record(1, 1.0, 1.0), _record(2, 1.0, 1.0)])
        assert check_stopping(trace, self.CRIT) == Decision.CONTINUE

    def test_both_ok_converged(self):
        trace = AdmmTrace([_record(1, 1e-9, 1.0), _record(2, 1e-9, 1.0 - 1e-4)])
        assert check_stopping(trace, self.CRIT) == Decision.CONVERGED

    def test_iteration_cap(self):
        trace = AdmmTrace([_record(50, 1.0, 1.0)])
        assert check_stopping(trace, self.CRIT) == Decision.MAX_ITER

    def test_convergence_beats_cap(self):
        trace = AdmmTrace([_record(49, 1e-9, 1.0), _record(50, 1e-9, 1.0)])
        assert check_stopping(trace, self.CRIT) == Decision.CONVERGED


class TestSolveAdmm:
    def test_missing_coupling_entry_rejected(self):
        blocks = toy_blocks(u_star=2.0)
        coupling = CouplingState(duals={}, rho={})
        with pytest.raises(ValueError):
            solve_admm(blocks, None, _traj(np.zeros(T1)), coupling,
                       AccelerationConfig(), toy_criteria())

    def test_converges_to_clamped_optimum(self):
        res = solve_admm(toy_blocks(u_star=2.0), None, _traj(np.zeros(T1)),
                         toy_coupling(), AccelerationConfig(), toy_criteria())
        assert res.decision == Decision.CONVERGED
        assert np.allclose(res.copies[ConstraintId.T], 1.0, atol=1e-6)
        assert np.allclose(res.phi_wbd.controls, 1.0, atol=1e-6)
        # active bound leaves a positive multiplier behind
        assert np.all(res.coupling.duals[ConstraintId.T] > 0)

    def test_block_order_two_block(self):
        res = solve_admm(toy_blocks(u_star=0.5), None, _traj(np.zeros(T1)),
                         toy_coupling(), AccelerationConfig(), toy_criteria())
        for rec in res.trace.records:
            assert rec.block_order == ("wholebody", "projection", "dual")

    def test_block_order_three_block_gauss_seidel(self):
        res = solve_admm(toy_blocks(u_star=0.5, with_centroidal=True),
                         _traj(np.zeros(T1)), _traj(np.zeros(T1)),
                         toy_coupling(with_centroidal=True),
                         AccelerationConfig(), toy_criteria(
                             eps_pri={ConstraintId.C: 1e-6}))
        for rec in res.trace.records:
            assert rec.block_order == ("centroidal", "wholebody",
                                       "projection", "dual")

    def test_trace_has_one_record_per_iteration(self):
        res = solve_admm(toy_blocks(u_star=2.0), None, _traj(np.zeros(T1)),
                         toy_coupling(), AccelerationConfig(),
                         toy_criteria(max_iterations=7))
        assert [r.iteration for r in res.trace.records] == list(range(1, 8))
        assert res.decision == Decision.MAX_ITER

    def test_feasible_start_keeps_copies_equal_to_primal(self):
        # interior optimum, started at it: projection never truncates and
        # residuals stay identically zero
        res = solve_admm(toy_blocks(u_star=0.5), None,
                         _traj(np.full(T1, 0.5)), toy_coupling(),
                         AccelerationConfig(), toy_criteria())
        assert res.decision == Decision.CONVERGED
        for rec in res.trace.records:
            assert rec.residual_norms[ConstraintId.T] == 0.0
        assert np.array_equal(res.copies[ConstraintId.T],
                              res.phi_wbd.controls)

    def test_dual_fixed_point_after_zero_residual(self):
        duals_seen = []

        def spy(it, phi_cen, phi_wbd):
            duals_seen.append(it)

        res = solve_admm(toy_blocks(u_star=0.5), None,
                         _traj(np.full(T1, 0.5)), toy_coupling(),
                         AccelerationConfig(), toy_criteria(), monitor=spy)
        assert np.array_equal(res.coupling.duals[ConstraintId.T],
                              np.zeros((T1, 1)))
        assert duals_seen == [r.iteration for r in res.trace.records]

    def test_compute_residuals_unit_perturbation(self):
        blocks = toy_blocks(u_star=0.0)
        phi = _traj(np.zeros(T1))
        copies = {ConstraintId.T: np.zeros((T1, 1))}
        copies[ConstraintId.T][1, 0] = -1.0
        res = compute_residuals(blocks, None, phi, copies)
        assert np.linalg.norm(res[ConstraintId.T]) == pytest.approx(1.0)

    def test_over_relaxation_converges_same_fixed_point(self):
        plain = solve_admm(toy_blocks(u_star=2.0), None, _traj(np.zeros(T1)),
                           toy_coupling(), AccelerationConfig(),
                           toy_criteria())
        relaxed = solve_admm(toy_blocks(u_star=2.0), None,
                             _traj(np.zeros(T1)), toy_coupling(),
                             AccelerationConfig(Variant.OVER_RELAXED,
                                                alpha=1.65),
                             toy_criteria())
        assert relaxed.decision == Decision.CONVERGED
        assert np.allclose(relaxed.phi_wbd.controls, plain.phi_wbd.controls,
                           atol=1e-5)
        assert len(relaxed.trace) <= len(plain.trace)

    def test_varying_penalty_adapts_rho_in_trace(self):
        res = solve_admm(toy_blocks(u_star=2.0), None, _traj(np.zeros(T1)),
                         toy_coupling(),
                         AccelerationConfig(Variant.VARYING_PENALTY),
                         toy_criteria())
        rhos = [r.rho[ConstraintId.T] for r in res.trace.records]
        assert res.decision == Decision.CONVERGED
        assert len(set(rhos)) > 1
