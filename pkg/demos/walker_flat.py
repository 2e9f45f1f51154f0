"""Walk the planar kneed biped three steps on flat ground.

Each footstep is one consensus solve coordinating a centroidal-momentum block
and a whole-body block with projections for joint limits, torque limits and
the friction cone; steps are chained through stance relabeling and a plastic
impact map.

Run:  python3 demos/walker_flat.py
"""

import numpy as np

from admm_trajopt.admm import ConstraintId
from admm_trajopt.walker import model as wm
from admm_trajopt.walker.walking import flat_scenario, run_walking


def main():
    scn = flat_scenario(num_steps=3)
    print("walking 3 steps on flat ground ...")
    walk = run_walking(scn, num_steps=3)

    for s in walk.steps:
        res = s.result
        rec = res.trace.records[-1]
        xs = res.phi_wbd.states
        com_v = (wm.com_jacobian(scn.model, xs[-1, :6]) @ xs[-1, 6:])[0]
        print(f"step {s.index}: {res.decision.name:>9} "
              f"in {len(res.trace):>2} iterations, "
              f"|r_c|={rec.residual_norms[ConstraintId.C]:.2e}, "
              f"|r_f|={rec.residual_norms[ConstraintId.F]:.2e}, "
              f"landing x={s.target_point[0]:+.3f}, "
              f"CoM speed {com_v:.2f} m/s")

    com = walk.com_path()
    print(f"\nall converged: {walk.all_converged}")
    print(f"CoM travelled {com[-1, 0] - com[0, 0]:.3f} m, "
          f"height range [{com[:, 1].min():.3f}, {com[:, 1].max():.3f}] m")


if __name__ == "__main__":
    main()
