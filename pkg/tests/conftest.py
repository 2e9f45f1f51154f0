"""Session-scoped fixtures for the expensive benchmark runs, shared between
the behavioral tests and the acceptance gate."""

import warnings

import numpy as np
import pytest

from admm_trajopt import AccelerationConfig, StoppingCriteria, Variant
from admm_trajopt.admm import ConstraintId
from admm_trajopt.car import solve_car
from admm_trajopt.walker import walking as wk

warnings.filterwarnings("ignore", category=RuntimeWarning)


def swa_config():
    return AccelerationConfig(variant=Variant.SWA, alpha=1.65, mu=10.0,
                              tau_incr=2.0, tau_decr=2.0, k_sw=16)


@pytest.fixture(scope="session")
def car_swa_result():
    return solve_car(swa_config())


@pytest.fixture(scope="session")
def car_variant_results():
    """All four variants on the identical car problem, run to a fixed
    iteration budget so the traces align."""
    criteria = StoppingCriteria(eps_pri={ConstraintId.T: 1e-2},
                                eps_cost=1e-4, max_iterations=40)
    results = {}
    for variant in Variant:
        cfg = AccelerationConfig(variant=variant, alpha=1.65, mu=10.0,
                                 tau_incr=2.0, tau_decr=2.0, k_sw=16)
        results[variant] = solve_car(cfg, criteria)
    return results


@pytest.fixture(scope="session")
def walker_flat_result():
    scn = wk.flat_scenario(num_steps=3)
    return wk.run_walking(scn, num_steps=3)


@pytest.fixture(scope="session")
def walker_rough_result():
    scn = wk.stairs_scenario(num_steps=6)
    log = []

    def monitor(step, it, phi_cen, phi_wbd):
        log.append((step, it, phi_cen.states.copy(), phi_wbd.states.copy()))

    result = wk.run_walking(scn, num_steps=6, monitor=monitor)
    return scn, result, log
