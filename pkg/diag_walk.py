import sys, warnings
import numpy as np
warnings.filterwarnings("ignore")
from admm_trajopt.walker import walking as wk, model as wm
from admm_trajopt.admm import StoppingCriteria, AccelerationConfig

kw = dict(arg.split("=") for arg in sys.argv[1:])
stride = float(kw.pop("stride", 0.03))
num = int(kw.pop("num", 3))
eps_cost = float(kw.pop("eps_cost", 0.1))
scn_kw = {k: float(v) for k, v in kw.items()}
scn = wk.flat_scenario(num_steps=num, stride=stride, **scn_kw)
crit = StoppingCriteria(eps_pri=dict(wk.DEFAULT_EPS_PRI),
                        eps_cost=eps_cost, max_iterations=50)
res = wk.run_walking(scn, criteria=crit, num_steps=num)
for s in res.steps:
    r = s.result
    xs = r.phi_wbd.states
    com = wm.com_position(scn.model, xs[:, :6])
    comd = wm.com_jacobian(scn.model, xs[-1, :6]) @ xs[-1, 6:]
    land = wm.foot_position(scn.model, xs[-1, :6], 2)
    fz = np.array([wm.foot_position(scn.model, q, 2)[1] for q in xs[:, :6]])
    knees = xs[:, 4:6]
    tr = r.trace.records[-1]
    print(f"step {s.index}: {r.decision.name} it={len(r.trace)} "
          f"com0={com[0,0]-s.stance_point[0]:+.3f} "
          f"comE={com[-1,0]-s.stance_point[0]:+.3f} vE={comd[0]:+.3f} "
          f"land=[{land[0]:.3f},{land[1]:+.4f}] tgt={s.target_point[0]:.3f} "
          f"minswz={fz.min():+.4f} knees=[{knees.min():.2f},{knees.max():.2f}]")
    print("   res:", {k.name: round(float(v), 6)
                      for k, v in tr.residual_norms.items()})
print("all converged:", res.all_converged)
