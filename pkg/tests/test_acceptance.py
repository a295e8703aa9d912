"""Acceptance criteria, one test and one PASS/FAIL line per criterion."""

import json
import math
import time

import numpy as np

from conftest import RESULTS
from shewta.cli import main
from shewta.column import ColumnConfig, final_outputs, simulate
from shewta.config import DEFAULT_SWEEPS, PRESETS
from shewta.devices import CircuitParams, MtjParams, mtj_conductance
from shewta.magnetics import (MagnetParams, ThermalConfig, effective_field, llg_rhs,
                              magnetic_energy, rk4_step, thermal_field, thermal_sigma)
from shewta.montecarlo import (EnsembleConfig, VariationSpec, advantage_threshold, run_ensemble,
                               sweep_burst)
from shewta.analysis import PowerModel, power_crossbar, power_divider, total_energy

US = 1e-6
C = CircuitParams()


def record(n, ok, detail):
    line = "CRITERION %d: %s  %s" % (n, "PASS" if ok else "FAIL", detail)
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_physics_core():
    p = MagnetParams(alpha=1e-30)
    H0, T = 1e5, 2e-10
    w = p.gamma * p.mu0 * H0
    errs = []
    for dt in (4e-12, 2e-12, 1e-12):
        m = np.array([1.0, 0, 0])
        n = int(round(T / dt))
        for _ in range(n):
            m = rk4_step(m, lambda x: np.array([0, 0, H0]), dt, p)
        errs.append(np.linalg.norm(m - [math.cos(w * n * dt), math.sin(w * n * dt), 0]))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok_order = all(abs(o - 4) <= 0.3 for o in orders)

    rng = np.random.default_rng(0)
    pd = MagnetParams()
    drift, ortho = 0.0, 0.0
    m = np.array([0.3, 0.9, 0.1]) / np.linalg.norm([0.3, 0.9, 0.1])
    for _ in range(2000):
        h = effective_field(m, pd, 1e-6) + rng.normal(0, 1e3, 3)
        d = llg_rhs(m, h, pd)
        ortho = max(ortho, abs(d @ m) / (abs(pd.gamma * pd.mu0) * np.linalg.norm(h)))
        m = rk4_step(m, lambda x: effective_field(x, pd, 1e-6) + h * 0, 0.5e-12, pd)
        drift = max(drift, abs(np.linalg.norm(m) - 1))
    ok_norm = drift < 1e-9
    ok_ortho = ortho < 1e-14

    tc = ThermalConfig()
    s = thermal_sigma(tc, pd)
    hs = thermal_field(np.random.default_rng(1), tc, pd, size=1_000_000)
    var_err = np.abs(hs.var(0) / s ** 2 - 1).max()
    ok_var = var_err < 0.02 and np.all(np.abs(hs.mean(0)) < 3 * s / 1000)

    pr = MagnetParams(dims=(60e-9, 30e-9, 1e-9), alpha=0.05)
    m = np.array([0.5, 0.6, 0.3]) / np.linalg.norm([0.5, 0.6, 0.3])
    E = [magnetic_energy(m, pr)]
    for _ in range(4000):
        m = rk4_step(m, lambda x: effective_field(x, pr), 0.5e-12, pr)
        E.append(magnetic_energy(m, pr))
    ok_energy = bool(np.all(np.diff(E) <= 1e-9 * np.abs(E).max()))

    ok = ok_order and ok_norm and ok_ortho and ok_var and ok_energy
    record(1, ok, "RK4 order %.2f/%.2f, norm drift %.1e, m.dm/dt %.1e, thermal var err %.2f%%, "
           "energy monotone %s" % (orders[0], orders[1], drift, ortho, 100 * var_err, ok_energy))


def test_criterion_2_conductance_exactness():
    mtj = MtjParams()
    pl = np.array(mtj.pl_axis)
    gp, gap = 1 / mtj.R_P, 1 / mtj.R_AP
    x = np.array([1.0, 0, 0])
    errs = [abs(mtj_conductance(pl, mtj) - gp) / gp,
            abs(mtj_conductance(-pl, mtj) - gap) / gap,
            abs(mtj_conductance(x, mtj) - 0.5 * (gp + gap)) / (0.5 * (gp + gap)),
            abs(mtj.R_AP / mtj.R_P - 2.5) / 2.5]
    record(2, max(errs) <= 1e-12, "max relative error %.1e" % max(errs))


def test_criterion_3_fig4_cases():
    res, ok, slow = {}, True, 0.0
    for name, kw in PRESETS.items():
        t0 = time.time()
        v = final_outputs(simulate(ColumnConfig(**kw), C))
        slow = max(slow, time.time() - t0)
        res[name] = v
    v = res["fig4-insufficient"]
    ok1 = bool(np.all(np.abs(v + 0.5) <= 0.010))
    v = res["fig4-equal"]
    ok2 = bool(np.ptp(v) <= 0.010 and v.min() > -0.5 + 0.070)
    v = res["fig4-advantage"]
    sep = v[0] - v[1:].mean()
    ok3 = bool(sep >= 0.070 and np.all(np.abs(v[1:] + 0.5) <= 0.010))
    ok = ok1 and ok2 and ok3 and slow < 60
    record(3, ok, "insufficient max |v+0.5| %.1f mV; equal spread %.2f mV at %.0f mV above V_S1; "
           "advantage sep %.0f mV, losers within %.2f mV; slowest %.1f s" % (
               1e3 * np.abs(res["fig4-insufficient"] + 0.5).max(),
               1e3 * np.ptp(res["fig4-equal"]), 1e3 * (res["fig4-equal"].mean() + 0.5),
               1e3 * sep, 1e3 * np.abs(res["fig4-advantage"][1:] + 0.5).max(), slow))


def test_criterion_4_predictive_thresholds():
    windows = {("ideal", 1 * US): (1.4, 1.8), ("ideal", 0.0): (1.05, 1.2),
               ("variation", 1 * US): (1.8, 2.2), ("variation", 0.0): (1.1, 1.35)}
    parts, ok = [], True
    for (kind, I), (lo, hi) in windows.items():
        spec = VariationSpec(enabled=(kind == "variation"))
        a = advantage_threshold(I, rounds=100, variation=spec, circuit=C)
        good = lo <= a <= hi
        ok &= good
        parts.append("%s %+g uA: %.3f in [%g, %g] %s" % (kind, I / US, a, lo, hi,
                                                         "ok" if good else "MISS"))
    record(4, ok, "; ".join(parts))


def test_criterion_5_bursting():
    above, below = (-3 * US, -2 * US, -1 * US), (2 * US, 3 * US)
    cfg = EnsembleConfig(100, tuple((i, 1.0) for i in above + below), ColumnConfig(),
                         VariationSpec(enabled=False))
    tab = sweep_burst(cfg, C)
    ex = dict(zip(tab[:, 0], tab[:, 1]))
    ok = all(ex[i] >= 0.070 for i in above) and all(abs(ex[i]) < 0.010 for i in below)
    record(5, ok, " ".join("%+g uA: %.1f mV" % (i / US, 1e3 * ex[i]) for i in above + below))


def test_criterion_6_delay_energy():
    sw = DEFAULT_SWEEPS["energy"]
    cfg = EnsembleConfig(100, tuple((sw["current"], a) for a in sw["advantages"]), ColumnConfig(),
                         VariationSpec(enabled=False))
    st = run_ensemble(cfg, C)
    tau, E = st.mean["tau"], st.mean["energy"]
    ok_a1 = 1.5e-9 <= tau[0] <= 6e-9
    ok_max = tau.max() < 60e-9
    ok_tau = bool(np.all(np.diff(tau[1:]) <= 0))
    ok_E = bool(np.all(np.diff(E[1:]) <= 0))
    e60 = total_energy(60e-9, PowerModel())
    ok_e60 = abs(e60 - 99.0e-12) <= 0.1e-12 and e60 <= 120e-12
    ok = ok_a1 and ok_max and ok_tau and ok_E and ok_e60
    record(6, ok, "tau(a=1) %.2f ns, max tau %.2f ns, tau(a>1) ns %s, E(a>1) pJ %s, "
           "E(60 ns) %.2f pJ" % (tau[0] * 1e9, tau.max() * 1e9,
                                 "/".join("%.2f" % t for t in tau[1:] * 1e9),
                                 "/".join("%.1f" % e for e in E[1:] * 1e12), e60 * 1e12))


def test_criterion_7_power_constants():
    m = PowerModel()
    pcb, pvd = power_crossbar(m), power_divider(m)
    ok = abs(pcb - 1.2e-6) <= 1e-18 and abs(pvd - 30.4e-6) <= 1e-18
    record(7, ok, "P_CB %.6g uW, P_VD %.6g uW" % (pcb * 1e6, pvd * 1e6))


def test_criterion_8_reproducibility(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sweep": {"predictive": {"currents": [0.0, 1e-6],
                                                        "advantages": [1.0, 1.5]}}}))
    outs = []
    for threads in (1, 2, 4):
        d = tmp_path / ("t%d" % threads)
        assert main(["sweep-predictive", "--config", str(cfg), "--rounds", "4", "--seed", "3",
                     "--threads", str(threads), "--out", str(d)]) == 0
        outs.append((d / "predictive.csv").read_bytes())
    for k in range(2):
        d = tmp_path / ("trace%d" % k)
        assert main(["trace", "fig4-advantage", "--seed", "3", "--out", str(d)]) == 0
    same_trace = ((tmp_path / "trace0" / "trace_fig4-advantage.csv").read_bytes()
                  == (tmp_path / "trace1" / "trace_fig4-advantage.csv").read_bytes())
    ok = outs[0] == outs[1] == outs[2] and same_trace
    record(8, ok, "ensemble CSV identical for 1/2/4 threads: %s; repeated trace identical: %s" % (
        outs[0] == outs[1] == outs[2], same_trace))
