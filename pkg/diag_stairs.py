import numpy as np, warnings, sys, time
warnings.filterwarnings("ignore")
from admm_trajopt.walker import walking as wk, model as wm
from admm_trajopt.admm import ConstraintId as CID, StoppingCriteria

kw = dict(arg.split("=") for arg in sys.argv[1:])
num = int(kw.pop("num", 6))
max_iter = int(kw.pop("max_iter", 100))
eps = dict(wk.ROUGH_EPS_PRI)
for cid in CID:
    key = f"eps_{cid.value}"
    if key in kw:
        eps[cid] = float(kw.pop(key))
scn_kw = {k: (int(v) if k == "horizon" else float(v))
          for k, v in kw.items()}
scn = wk.stairs_scenario(num_steps=num, **scn_kw)
crit = StoppingCriteria(eps_pri=eps, eps_cost=wk.DEFAULT_EPS_COST,
                        max_iterations=100)
t0 = time.time()

last = [0, 0]
def monitor(j, it, pc, pw):
    last[0], last[1] = j, it
    if it % 10 == 0:
        print(f"  [{time.time()-t0:5.0f}s] step {j} it {it}", flush=True)

_orig_solve_step = wk.solve_step
def _patched(scn_, x0_, stance_pt, swing_start, target_pt, cfg_, crit_,
             monitor=None):
    res = _orig_solve_step(scn_, x0_, stance_pt, swing_start, target_pt,
                           cfg_, crit_, monitor=monitor)
    xs = res.phi_wbd.states
    land = wm.foot_position(scn_.model, xs[-1, :6], 2)
    pen = min(float((wm.foot_position(scn_.model, xs[:, :6], leg)[:, 1]
                     - scn_.terrain.height(
                         wm.foot_position(scn_.model, xs[:, :6], leg)[:, 0])
                     ).min()) for leg in (1, 2))
    x_next = wm.swap_stance_coordinates(xs[-1])
    qd_next = wm.impact_velocity_projection(scn_.model, x_next[:6],
                                            x_next[6:], 1)
    v_plus = (wm.com_jacobian(scn_.model, x_next[:6]) @ qd_next)[0]
    com0 = wm.com_position(scn_.model, x0_[:6])[0]
    print(f"  pass: {res.decision.name} it={len(res.trace)} "
          f"stance=[{stance_pt[0]:+.3f},{stance_pt[1]:+.3f}] "
          f"tgt=[{target_pt[0]:+.3f},{target_pt[1]:+.3f}] "
          f"x0_rel={com0-stance_pt[0]:+.3f} "
          f"land=[{land[0]:+.3f},{land[1]:+.3f}] pen={pen:+.4f} "
          f"v+={v_plus:+.3f} knees=[{xs[:,4:6].min():.2f},"
          f"{xs[:,4:6].max():.2f}]", flush=True)
    return res
wk.solve_step = _patched

try:
    res = wk.run_walking(scn, criteria=crit, num_steps=num, monitor=monitor)
except ValueError as e:
    print(f"CRASHED after step {last[0]} it {last[1]}: {e}", flush=True)
    sys.exit(1)
for s in res.steps:
    r = s.result
    xs = r.phi_wbd.states
    pen = []
    for leg in (1, 2):
        fp = wm.foot_position(scn.model, xs[:, :6], leg)
        pen.append(float((fp[:, 1] - scn.terrain.height(fp[:, 0])).min()))
    land = wm.foot_position(scn.model, xs[-1, :6], 2)
    tr = r.trace.records[-1]
    x_next = wm.swap_stance_coordinates(xs[-1])
    qd_next = wm.impact_velocity_projection(scn.model, x_next[:6],
                                            x_next[6:], 1)
    v_plus = (wm.com_jacobian(scn.model, x_next[:6]) @ qd_next)[0]
    print(f"step {s.index}: {r.decision.name} it={len(r.trace)} "
          f"land=[{land[0]:+.3f},{land[1]:+.3f}] "
          f"tgt=[{s.target_point[0]:+.3f},{s.target_point[1]:+.3f}] "
          f"pen={min(pen):+.4f} v+={v_plus:+.3f} "
          f"knees=[{xs[:,4:6].min():.2f},{xs[:,4:6].max():.2f}]", flush=True)
    print("   res:", {k.name: round(float(v), 5)
                      for k, v in tr.residual_norms.items()}, flush=True)
print("all converged:", res.all_converged, f"({time.time()-t0:.0f}s)")
