"""Command-line runner.

    shewta trace [PRESET]       one column run, trace CSV + JSON sidecar
    shewta sweep-predictive     ensemble over input x advantage
    shewta sweep-burst          ensemble over input at advantage 1
    shewta energy               settling time and energy versus advantage
    shewta calibrate            isolated-cell response and derived constants

Exit codes: 0 success, 1 configuration error, 2 simulation failure.
"""

import argparse
from dataclasses import replace
import json
import os
import sys

import numpy as np

from . import __version__
from . import config as C
from .analysis import power_crossbar, power_divider
from .column import (classify_outcome, config_hash, detect_steady, final_outputs,
                     isolated_response, simulate, write_metadata, write_trace_csv, _jsonable)
from .devices import divider_voltage
from .magnetics import IntegrationError
from .montecarlo import EnsembleConfig, run_ensemble


def _parser():
    ap = argparse.ArgumentParser(prog="shewta", description="Spin-Hall MTJ WTA column simulator")
    ap.add_argument("command", choices=["trace", "sweep-predictive", "sweep-burst", "energy",
                                        "calibrate"])
    ap.add_argument("preset", nargs="?", help="trace preset: " + ", ".join(C.PRESETS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--rounds", type=int)
    ap.add_argument("--threads", type=int, default=1, help="worker threads (results unchanged)")
    ap.add_argument("--no-thermal", action="store_true")
    ap.add_argument("--no-variation", action="store_true")
    return ap


def resolve(args):
    raw = {}
    if args.config:
        raw = C.load(args.config).raw
    raw = json.loads(json.dumps(raw))
    if args.seed is not None:
        raw["seed"] = args.seed
        raw.get("column", {}).pop("seed", None)
        raw.get("ensemble", {}).pop("master_seed", None)
    if args.out:
        raw["out"] = args.out
    if args.rounds is not None:
        if args.rounds < 1:
            raise C.ConfigError("field 'rounds' must be >= 1")
        raw.setdefault("ensemble", {})["rounds"] = args.rounds
    if args.no_thermal:
        raw.setdefault("column", {})["thermal"] = False
    if args.no_variation:
        raw.setdefault("variation", {})["enabled"] = False
    if args.preset:
        if args.command != "trace":
            raise C.ConfigError("presets apply to the trace command only")
        raw["scenario"] = args.preset
    if args.threads < 1:
        raise C.ConfigError("field 'threads' must be >= 1")
    return C.from_dict(raw)


def _echo(exp):
    return {"circuit": _jsonable(exp.circuit), "column": _jsonable(exp.column),
            "variation": _jsonable(exp.variation), "ensemble": _jsonable(exp.ensemble),
            "power": _jsonable(exp.power), "sweep": exp.sweep, "scenario": exp.scenario,
            "seed": exp.seed}


def _sidecar(exp, command, path, extra=None):
    echo = _echo(exp)
    meta = {"command": command, "version": __version__, "config": echo,
            "config_hash": config_hash(echo)}
    meta.update(extra or {})
    write_metadata(meta, path)
    return meta["config_hash"]


def cmd_trace(exp):
    cfg = exp.column
    name = exp.scenario or "custom"
    if exp.scenario:
        cfg = replace(cfg, **C.PRESETS[exp.scenario])
        exp.column = cfg
    tr = simulate(cfg, exp.circuit)
    base = os.path.join(exp.out, "trace_%s" % name)
    write_trace_csv(tr, base + ".csv")
    v = final_outputs(tr)
    out = classify_outcome(tr, cfg, exp.circuit.cell.V_S1)
    tau = detect_steady(tr, duration_max=cfg.duration_max)
    h = _sidecar(exp, "trace", base + ".json",
                 {"converged": tr.converged, "tau": tau, "outcome": out.kind,
                  "winner": out.index, "final_outputs": v.tolist()})
    print("trace %s: I_prox=%.3g A advantage=%.3g" % (name, np.mean(cfg.currents()), cfg.advantage))
    print("  final outputs (V): " + " ".join("%.4f" % x for x in v))
    print("  outcome %s%s, tau %.3g s, converged %s" % (
        out.kind, "" if out.index is None else "(%d)" % out.index, tau, tr.converged))
    print("  wrote %s.csv (config %s)" % (base, h[:12]))


def _ensemble(exp, grid, threads):
    cfg = EnsembleConfig(exp.ensemble.rounds, grid, exp.column, exp.variation,
                         exp.ensemble.master_seed)
    exp.ensemble = cfg
    return run_ensemble(cfg, exp.circuit, exp.power, threads)


def _report(stats, path, h):
    print("%10s %9s %10s %10s %10s" % ("I_prox/uA", "advantage", "sep/mV", "excess/mV", "tau/ns"))
    for row in stats.rows():
        print("%10.3g %9.3g %10.1f %10.1f %10.2f" % (
            row["I_prox"] * 1e6, row["advantage"], row["separation_mean"] * 1e3,
            row["v_avg_excess_mean"] * 1e3, row["tau_mean"] * 1e9))
    print("wrote %s (config %s)" % (path, h[:12]))


def cmd_sweep_predictive(exp, threads):
    sw = exp.sweep_for("predictive")
    grid = [(i, a) for i in sw["currents"] for a in sw["advantages"]]
    st = _ensemble(exp, grid, threads)
    path = os.path.join(exp.out, "predictive.csv")
    st.write_csv(path)
    _report(st, path, _sidecar(exp, "sweep-predictive", path[:-4] + ".json"))


def cmd_sweep_burst(exp, threads):
    grid = [(i, 1.0) for i in exp.sweep_for("burst")["currents"]]
    st = _ensemble(exp, grid, threads)
    path = os.path.join(exp.out, "burst.csv")
    st.write_csv(path)
    _report(st, path, _sidecar(exp, "sweep-burst", path[:-4] + ".json"))


def cmd_energy(exp, threads):
    sw = exp.sweep_for("energy")
    grid = [(sw["current"], a) for a in sw["advantages"]]
    st = _ensemble(exp, grid, threads)
    path = os.path.join(exp.out, "energy.csv")
    with open(path, "w", newline="\n") as f:
        f.write("advantage,tau_mean,tau_std,energy_mean,energy_std\n")
        for g in range(len(grid)):
            f.write("%.10g,%.10g,%.10g,%.10g,%.10g\n" % (
                st.advantage[g], st.mean["tau"][g], st.std["tau"][g],
                st.mean["energy"][g], st.std["energy"][g]))
    h = _sidecar(exp, "energy", path[:-4] + ".json",
                 {"P_CB": power_crossbar(exp.power), "P_VD": power_divider(exp.power)})
    print("%9s %10s %10s" % ("advantage", "tau/ns", "E/pJ"))
    for g in range(len(grid)):
        print("%9.3g %10.2f %10.2f" % (st.advantage[g], st.mean["tau"][g] * 1e9,
                                       st.mean["energy"][g] * 1e12))
    print("wrote %s (config %s)" % (path, h[:12]))


def cmd_calibrate(exp):
    c = exp.circuit
    mp = c.magnet
    sw = exp.sweep_for("calibrate")
    I = np.asarray(sw["currents"], float)
    my_up, v_up = isolated_response(c, I, sw["hold"], exp.column.dt, seed=exp.seed,
                                    thermal=exp.column.thermal)
    my_dn, v_dn = isolated_response(c, I[::-1], sw["hold"], exp.column.dt, seed=exp.seed,
                                    thermal=exp.column.thermal)
    path = os.path.join(exp.out, "calibrate.csv")
    with open(path, "w", newline="\n") as f:
        f.write("I_prox,my_up,vout_up,my_down,vout_down\n")
        for row in zip(I, my_up, v_up, my_dn[::-1], v_dn[::-1]):
            f.write(",".join("%.10g" % x for x in row) + "\n")
    node_p = divider_voltage(1 / c.mtj.R_P, c.cell)
    node_ap = divider_voltage(1 / c.mtj.R_AP, c.cell)
    slope = c.inverter.gain * abs(node_ap - node_p) / 2 * mp.she_coeff / mp.stiffness  # V/A
    report = {
        "demag_factors": list(mp.demag), "H_k": mp.H_k, "stiffness": mp.stiffness,
        "she_coeff": mp.she_coeff, "I_sat": mp.I_sat, "I_bias": c.cell.I_bias,
        "R_P": c.mtj.R_P, "R_AP": c.mtj.R_AP, "R_R": c.cell.R_R,
        "node_P": node_p, "node_AP": node_ap, "cell_V_ref": c.inverter.V_ref,
        "cell_gain": c.inverter.gain, "cell_slope_V_per_A": slope,
        "loop_gain_per_neighbour": slope * exp.column.G_inh,
        "max_hysteresis_V": float(np.max(np.abs(v_up - v_dn[::-1]))),
    }
    h = _sidecar(exp, "calibrate", path[:-4] + ".json", {"report": report})
    for k, v in report.items():
        print("%-24s %s" % (k, v))
    print("wrote %s (config %s)" % (path, h[:12]))


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        exp = resolve(args)
        if args.command == "trace" and exp.scenario is None and args.preset is None and not args.config:
            raise C.ConfigError("trace needs a preset or a config file")
        os.makedirs(exp.out, exist_ok=True)
    except C.ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 1
    try:
        if args.command == "trace":
            cmd_trace(exp)
        elif args.command == "sweep-predictive":
            cmd_sweep_predictive(exp, args.threads)
        elif args.command == "sweep-burst":
            cmd_sweep_burst(exp, args.threads)
        elif args.command == "energy":
            cmd_energy(exp, args.threads)
        else:
            cmd_calibrate(exp)
    except (IntegrationError, FloatingPointError, RuntimeError) as e:
        print("simulation failure: %s" % e, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
