"""Climb a staircase: six steps with footholds pinned to the tread centers.

On stairs the friction cone actually binds (the stance force needs a
tangential component to climb), so the force residual settles at a small
nonzero floor instead of vanishing; the rough-terrain stopping tolerances
account for that. Swing-foot clearance keeps the foot above the step edges.

Run:  python3 demos/walker_stairs.py   (takes a few minutes)
"""

import numpy as np

from admm_trajopt.admm import ConstraintId
from admm_trajopt.walker import model as wm
from admm_trajopt.walker.walking import run_walking, stairs_scenario


def main():
    scn = stairs_scenario(num_steps=6)
    print(f"climbing 6 steps, rise {scn.terrain.rise} m, "
          f"run {scn.terrain.run} m ...")
    walk = run_walking(scn, num_steps=6)

    for s in walk.steps:
        res = s.result
        rec = res.trace.records[-1]
        xs = res.phi_wbd.states
        worst = np.inf
        for leg in (1, 2):
            fp = wm.foot_position(scn.model, xs[:, :6], leg)
            worst = min(worst, float(np.min(
                fp[:, 1] - scn.terrain.height(fp[:, 0]))))
        print(f"step {s.index}: {res.decision.name:>9} "
              f"in {len(res.trace):>2} iterations, "
              f"|r_c|={rec.residual_norms[ConstraintId.C]:.2e}, "
              f"landing z={s.target_point[1]:+.3f}, "
              f"worst clearance {worst * 1e3:+.1f} mm")

    com = walk.com_path()
    print(f"\nall converged: {walk.all_converged}")
    print(f"CoM climbed {com[-1, 1] - com[0, 1]:.3f} m over "
          f"{com[-1, 0] - com[0, 0]:.3f} m forward")


if __name__ == "__main__":
    main()
