"""Compare the four acceleration variants on the identical parking problem.

All variants share alpha=1.65, mu=10, tau=2 where applicable; the switched
variant turns penalty adaptation on after iteration 16. Each runs to the same
iteration budget so the residual traces line up column by column.

Run:  python3 demos/variant_comparison.py
"""

from admm_trajopt import AccelerationConfig, StoppingCriteria, Variant
from admm_trajopt.admm import ConstraintId
from admm_trajopt.car import solve_car


def main():
    criteria = StoppingCriteria(eps_pri={ConstraintId.T: 1e-2},
                                eps_cost=1e-4, max_iterations=40)
    results = {}
    for variant in Variant:
        print(f"running {variant.value} ...")
        cfg = AccelerationConfig(variant=variant, alpha=1.65, mu=10.0,
                                 tau_incr=2.0, tau_decr=2.0, k_sw=16)
        results[variant] = solve_car(cfg, criteria)

    common = min(len(r.trace) for r in results.values())
    hists = {v: r.trace.residual_history(ConstraintId.T)
             for v, r in results.items()}
    header = "".join(f"{v.value:>18}" for v in Variant)
    print(f"\n|r_t| per iteration\n{'iter':>4}{header}")
    for k in range(0, common, 4):
        row = "".join(f"{hists[v][k]:>18.3e}" for v in Variant)
        print(f"{k + 1:>4}{row}")
    row = "".join(f"{hists[v][common - 1]:>18.3e}" for v in Variant)
    print(f"{common:>4}{row}")

    swa = hists[Variant.SWA]
    for v in Variant:
        if v is Variant.SWA:
            continue
        hit = next((k + 1 for k in range(common)
                    if swa[k] < hists[v][k]), None)
        print(f"switched variant overtakes {v.value} at iteration {hit}")


if __name__ == "__main__":
    main()
