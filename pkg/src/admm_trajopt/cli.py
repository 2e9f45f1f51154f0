"""Scenario runner: loads key=value configs, dispatches the car and walker
benchmarks across splitting variants, and writes CSV tables plus a JSON
summary for downstream plotting."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import os
import sys
import time
from dataclasses import fields, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .admm import (AccelerationConfig, ConstraintId, Decision,
                   StoppingCriteria, Variant)
from .car import CarScenario, solve_car
from .walker import model as wm
from .walker.walking import (DEFAULT_EPS_COST, DEFAULT_EPS_PRI,
                             ROUGH_EPS_PRI, flat_scenario, run_walking,
                             stairs_scenario)

log = logging.getLogger("admm_trajopt")

SCENARIO_IDS = ("car", "walker-flat", "walker-rough")
# fields that may legitimately differ between configs handed to `compare`
VARIANT_KEYS = {("scenario", "variant"), ("scenario", "out"),
                ("admm", "alpha"), ("admm", "mu"), ("admm", "tau_incr"),
                ("admm", "tau_decr"), ("admm", "k_sw")}


class ConfigError(Exception):
    pass


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_config(path: str) -> Dict[str, Dict[str, object]]:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"{path}: config file not found or unreadable")
    cfg = {section: {k: _parse_value(v) for k, v in parser.items(section)}
           for section in parser.sections()}
    scenario = cfg.get("scenario", {})
    sid = scenario.get("id")
    if sid not in SCENARIO_IDS:
        raise ConfigError(
            f"{path}: [scenario] id must be one of {SCENARIO_IDS}, got {sid!r}")
    variant = scenario.get("variant", "vanilla")
    if variant not in tuple(v.value for v in Variant):
        raise ConfigError(f"{path}: unknown variant {variant!r}")
    return cfg


def acceleration_config(cfg: Dict) -> AccelerationConfig:
    admm = cfg.get("admm", {})
    return AccelerationConfig(
        variant=Variant(cfg["scenario"].get("variant", "vanilla")),
        alpha=float(admm.get("alpha", 1.65)),
        mu=float(admm.get("mu", 10.0)),
        tau_incr=float(admm.get("tau_incr", 2.0)),
        tau_decr=float(admm.get("tau_decr", 2.0)),
        k_sw=int(admm.get("k_sw", 0)))


def stopping_criteria(cfg: Dict, sid: str) -> StoppingCriteria:
    admm = cfg.get("admm", {})
    tol = cfg.get("tolerances", {})
    if sid == "car":
        eps = {ConstraintId.T: float(tol.get("t", 1e-2))}
        eps_cost = float(admm.get("eps_cost", 1e-4))
        max_it = int(admm.get("max_iterations", 100))
    else:
        eps = dict(ROUGH_EPS_PRI if sid == "walker-rough"
                   else DEFAULT_EPS_PRI)
        for cid in ConstraintId:
            if cid.value in tol:
                eps[cid] = float(tol[cid.value])
        eps_cost = float(admm.get("eps_cost", DEFAULT_EPS_COST))
        max_it = int(admm.get("max_iterations", 50))
    return StoppingCriteria(eps_pri=eps, eps_cost=eps_cost,
                            max_iterations=max_it)


def _scenario_overrides(cfg: Dict, cls) -> Dict:
    model = dict(cfg.get("model", {}))
    names = {f.name for f in fields(cls)}
    unknown = set(model) - names
    if unknown:
        raise ConfigError(f"[model] unknown keys: {sorted(unknown)}")
    return model


def _write_csv(path: Path, header: List[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v
                             for v in row])


def _resolved(cfg: Dict) -> Dict:
    return {section: dict(values) for section, values in cfg.items()}


def run_scenario(cfg: Dict, out_dir: Path) -> Dict:
    """Execute one configured scenario; returns the summary dict."""
    sid = cfg["scenario"]["id"]
    seed = int(cfg["scenario"].get("seed", 0))
    rng = np.random.default_rng(seed)  # reserved for warm-start jitter
    accel = acceleration_config(cfg)
    criteria = stopping_criteria(cfg, sid)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    if sid == "car":
        scn = CarScenario(**_scenario_overrides(cfg, CarScenario))
        rho0 = float(cfg.get("admm", {}).get("rho0", 0.01))
        result = solve_car(accel, criteria, scn, rho0=rho0)
        converged = result.decision == Decision.CONVERGED
        traces = [result.trace]
        _write_car_tables(out_dir, scn, result)
        final_cost = result.trace.records[-1].local_cost_wbd
        steps_summary = None
    else:
        from .walker.blocks import WalkerScenario

        mk = flat_scenario if sid == "walker-flat" else stairs_scenario
        scn_cfg = cfg["scenario"]
        num_steps = int(scn_cfg.get(
            "num_steps", 3 if sid == "walker-flat" else 6))
        mk_kwargs = {}
        if "stride" in scn_cfg:
            mk_kwargs["stride"] = float(scn_cfg["stride"])
        if sid == "walker-rough":
            for key in ("rise", "run"):
                if key in scn_cfg:
                    mk_kwargs[key] = float(scn_cfg[key])
        scn = mk(num_steps=num_steps, **mk_kwargs,
                 **_scenario_overrides(cfg, WalkerScenario))
        consensus_log: List[tuple] = []

        def monitor(step, it, phi_cen, phi_wbd):
            com = wm.com_position(scn.model, phi_wbd.states[:, :6])
            consensus_log.append((step, it, phi_cen.states[:, :2], com))

        walk = run_walking(scn, accel, criteria, num_steps=num_steps,
                           monitor=monitor)
        converged = walk.all_converged
        traces = [s.result.trace for s in walk.steps]
        _write_walker_tables(out_dir, scn, walk, consensus_log)
        final_cost = sum(s.result.trace.records[-1].local_cost_wbd
                         for s in walk.steps)
        steps_summary = [{"step": s.index,
                          "decision": s.result.decision.value,
                          "iterations": len(s.result.trace)}
                         for s in walk.steps]

    _write_residual_table(out_dir / "residuals.csv", traces)
    summary = {
        "scenario": sid,
        "variant": accel.variant.value,
        "converged": bool(converged),
        "iterations": sum(len(t) for t in traces),
        "final_cost": float(final_cost),
        "wall_time_s": time.perf_counter() - t0,
        "seed": seed,
        "config": _resolved(cfg),
    }
    if steps_summary is not None:
        summary["steps"] = steps_summary
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _write_residual_table(path: Path, traces) -> None:
    ids = [c.value for c in ConstraintId]
    header = (["step", "iteration"] + [f"r_{i}" for i in ids]
              + ["cost_cen", "cost_wbd"] + [f"rho_{i}" for i in ids])
    rows = []
    for step, trace in enumerate(traces, start=1):
        for rec in trace.records:
            norms = [float(rec.residual_norms.get(c, np.nan))
                     for c in ConstraintId]
            rhos = [float(rec.rho.get(c, np.nan)) for c in ConstraintId]
            rows.append([step, rec.iteration] + norms
                        + [rec.local_cost_cen, rec.local_cost_wbd] + rhos)
    _write_csv(path, header, rows)


def _write_car_tables(out_dir: Path, scn: CarScenario, result) -> None:
    xs = result.phi_wbd.states
    us = result.phi_wbd.controls
    copies = result.copies[ConstraintId.T]
    header = ["k", "x", "y", "heading", "speed",
              "u_steer", "u_accel", "copy_steer", "copy_accel"]
    rows = []
    for k in range(len(xs)):
        row = [k] + [float(v) for v in xs[k]]
        if k < len(us):
            row += [float(us[k, 0]), float(us[k, 1]),
                    float(copies[k, 0]), float(copies[k, 1])]
        else:
            row += [np.nan] * 4
        rows.append(row)
    _write_csv(out_dir / "trajectory.csv", header, rows)


def _write_walker_tables(out_dir: Path, scn, walk, consensus_log) -> None:
    from .walker.blocks import assemble_generalized_state

    srows, header = [], None
    for s in walk.steps:
        res = s.result
        gen = assemble_generalized_state(res.phi_cen, res.phi_wbd)
        us = res.phi_wbd.controls
        cop_j = res.copies[ConstraintId.J]
        cop_t = res.copies[ConstraintId.T]
        if header is None:
            header = (["step", "k"] + [f"s{i}" for i in range(gen.shape[1])]
                      + [f"u{i}" for i in range(us.shape[1])]
                      + [f"copy_s{i}" for i in range(cop_j.shape[1])]
                      + [f"copy_u{i}" for i in range(cop_t.shape[1])])
        for k in range(len(gen)):
            row = [s.index, k] + [float(v) for v in gen[k]]
            if k < len(us):
                row += [float(v) for v in us[k]]
            else:
                row += [np.nan] * us.shape[1]
            row += [float(v) for v in cop_j[k]]
            if k < len(cop_t):
                row += [float(v) for v in cop_t[k]]
            else:
                row += [np.nan] * cop_t.shape[1]
            srows.append(row)
    _write_csv(out_dir / "trajectory.csv", header, srows)

    crows = []
    for step, it, cen, com in consensus_log:
        for k in range(len(cen)):
            crows.append([step, it, k, float(cen[k, 0]), float(cen[k, 1]),
                          float(com[k, 0]), float(com[k, 1])])
    _write_csv(out_dir / "com_consensus.csv",
               ["step", "iteration", "k", "cen_x", "cen_z",
                "wbd_x", "wbd_z"], crows)


def _apply_overrides(cfg: Dict, args) -> Dict:
    cfg = {sec: dict(vals) for sec, vals in cfg.items()}
    if args.variant:
        cfg["scenario"]["variant"] = args.variant
    if args.max_iter is not None:
        cfg.setdefault("admm", {})["max_iterations"] = args.max_iter
    if args.out:
        cfg["scenario"]["out"] = args.out
    return cfg


def _out_dir(cfg: Dict, path: str) -> Path:
    out = cfg["scenario"].get("out")
    if out is None:
        out = Path(path).with_suffix("").name
    return Path(str(out))


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out_dir = _out_dir(cfg, args.config)
    summary = run_scenario(cfg, out_dir)
    log.info("run %s variant=%s converged=%s iterations=%d -> %s",
             summary["scenario"], summary["variant"], summary["converged"],
             summary["iterations"], out_dir)
    print(f"{summary['scenario']} [{summary['variant']}] "
          f"converged={summary['converged']} "
          f"iterations={summary['iterations']} out={out_dir}")
    return 0 if summary["converged"] else 1


def _check_comparable(cfgs: List[Dict], paths: List[str]) -> None:
    base = cfgs[0]
    for cfg, path in zip(cfgs[1:], paths[1:]):
        sections = set(base) | set(cfg)
        for sec in sections:
            keys = set(base.get(sec, {})) | set(cfg.get(sec, {}))
            for key in keys:
                if (sec, key) in VARIANT_KEYS:
                    continue
                if base.get(sec, {}).get(key) != cfg.get(sec, {}).get(key):
                    raise ConfigError(
                        f"{path}: [{sec}] {key} differs from {paths[0]}; "
                        "compare configs may differ only in variant fields")


def cmd_compare(args) -> int:
    if len(args.configs) < 2:
        raise ConfigError("compare needs at least two configs")
    cfgs = [load_config(p) for p in args.configs]
    _check_comparable(cfgs, args.configs)
    out_root = Path(args.out or "compare")
    columns, variants = [], []
    for cfg, path in zip(cfgs, args.configs):
        if args.max_iter is not None:
            cfg.setdefault("admm", {})["max_iterations"] = args.max_iter
        variant = cfg["scenario"].get("variant", "vanilla")
        variants.append(variant)
        sub = out_root / variant
        run_scenario(cfg, sub)
        sid = cfg["scenario"]["id"]
        key = "r_t" if sid == "car" else "r_c"
        with open(sub / "residuals.csv") as fh:
            rows = list(csv.DictReader(fh))
        columns.append([float(r[key]) for r in rows])

    depth = min(len(c) for c in columns)
    header = ["iteration"] + [f"residual_{v}" for v in variants]
    rows = [[k + 1] + [col[k] for col in columns] for k in range(depth)]
    _write_csv(out_root / "comparison.csv", header, rows)

    crossover: Dict[str, Optional[int]] = {}
    if "swa" in variants:
        swa = columns[variants.index("swa")]
        for v, col in zip(variants, columns):
            if v == "swa":
                continue
            hit = next((k + 1 for k in range(depth) if swa[k] < col[k]), None)
            crossover[v] = hit
    with open(out_root / "comparison.json", "w") as fh:
        json.dump({"variants": variants, "common_iterations": depth,
                   "swa_crossover": crossover}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for v, hit in crossover.items():
        print(f"swa drops below {v} at iteration "
              f"{hit if hit is not None else 'never (within horizon)'}")
    print(f"comparison table: {out_root / 'comparison.csv'}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.environ.get("ADMM_TRAJOPT_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="admm-trajopt",
        description="Trajectory optimization by multi-block operator "
                    "splitting: car parking and biped walking benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured scenario")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare",
                           help="run several configs differing only in "
                                "variant and align their residuals")
    p_cmp.add_argument("configs", nargs="+")
    p_cmp.set_defaults(func=cmd_compare)

    for p in (p_run, p_cmp):
        p.add_argument("--out", help="output directory override")
        p.add_argument("--max-iter", type=int, default=None,
                       help="maximum splitting iterations override")
        p.add_argument("--variant",
                       choices=[v.value for v in Variant], default=None,
                       help="acceleration variant override")

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
