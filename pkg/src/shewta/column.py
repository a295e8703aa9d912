"""N-cell winner-take-all column: coupling, integration, settling, outcome."""

from dataclasses import asdict, dataclass, field, is_dataclass
import hashlib
import json

import numpy as np

from . import _kernel as K
from .devices import (CircuitParams, divider_voltage, gate_update, inverter_transfer,
                      mtj_conductance, output_update)
from .magnetics import IntegrationError, ThermalConfig, effective_field, rk4_step, thermal_sigma

SEPARATION_MIN = 0.070  # smallest output gap a digital inverter resolves, V
G_BASE = 1.0 / 280e3
# an output within this of its final value can no longer flip the comparator,
# whose reference sits half the separation margin above V_S1
TAU_TOL = 0.020


@dataclass(frozen=True)
class ColumnConfig:
    """One column run.

    I_prox : proximal current, scalar or one value per cell, A.
    G_inh : baseline inhibitory conductance of every source cell, S.  The
        predictive cell's conductance is G_inh * advantage.
    settle_window, settle_tol : the run stops early once every output has
        varied by less than settle_tol over the last settle_window.
    record_every : trace decimation in steps (1 keeps the full dt grid).
    """

    n_cells: int = 9
    I_prox: object = 0.0
    G_inh: float = G_BASE
    advantage: float = 1.0
    predictive_index: int = 0
    duration_max: float = 80e-9
    dt: float = 0.5e-12
    seed: int = 0
    thermal: bool = True
    si_noise: bool = False
    record_every: int = 1
    stop_early: bool = True
    settle_window: float = 3e-9
    settle_tol: float = 0.5e-3
    m0_tilt: float = 0.05

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("n_cells must be at least 2")
        if self.advantage < 1:
            raise ValueError("advantage must be >= 1")
        if self.G_inh <= 0:
            raise ValueError("G_inh must be positive")
        if self.dt <= 0 or self.duration_max <= 0:
            raise ValueError("dt and duration_max must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.predictive_index is not None and not 0 <= self.predictive_index < self.n_cells:
            raise ValueError("predictive_index out of range")
        if np.ndim(self.I_prox) and len(self.I_prox) != self.n_cells:
            raise ValueError("I_prox needs one value per cell")
        if np.ndim(self.I_prox):
            object.__setattr__(self, "I_prox", tuple(float(v) for v in self.I_prox))

    def currents(self):
        return np.broadcast_to(np.asarray(self.I_prox, float), (self.n_cells,)).copy()

    def conductances(self):
        g = np.full(self.n_cells, self.G_inh)
        if self.predictive_index is not None:
            g[self.predictive_index] *= self.advantage
        return g


@dataclass(frozen=True)
class CellDevices:
    """Per-cell device values; nominal unless drawn with process variation."""

    R_P: np.ndarray
    R_AP: np.ndarray
    she_scale: np.ndarray
    V_th: np.ndarray

    @classmethod
    def nominal(cls, circuit, n):
        return cls(np.full(n, circuit.mtj.R_P), np.full(n, circuit.mtj.R_AP),
                   np.ones(n), np.zeros(n))


@dataclass
class CellState:
    """State of every cell in a column, one row per cell."""

    m: np.ndarray
    V_gate: np.ndarray
    V_out: np.ndarray
    t: float = 0.0

    def copy(self):
        return CellState(self.m.copy(), self.V_gate.copy(), self.V_out.copy(), self.t)


@dataclass
class ColumnTrace:
    times: np.ndarray
    v_out: np.ndarray      # (samples, cells)
    m_x: np.ndarray
    m_y: np.ndarray
    converged: bool = True
    metadata: dict = field(default_factory=dict)

    @property
    def n_cells(self):
        return self.v_out.shape[1]


def initial_state(n, circuit, tilt=0.05):
    """Resting column: free layers on the antiparallel side, outputs at -V_DD.

    The exact antiparallel direction is a zero-torque point, so each layer is
    tilted by `tilt` rad toward +x to let the dynamics start.  Gates start at
    the divider voltage of that orientation.
    """
    ap = -np.asarray(circuit.mtj.pl_axis, float)
    m0 = np.cos(tilt) * ap + np.sin(tilt) * np.array([1.0, 0.0, 0.0])
    m = np.tile(m0 / np.linalg.norm(m0), (n, 1))
    node = divider_voltage(mtj_conductance(m, circuit.mtj), circuit.cell)
    return CellState(m, node, np.full(n, -circuit.inverter.V_DD))


def inhibitory_current(V_out_source, G, cell):
    """Current injected into a neighbour's heavy metal by a source output."""
    return G * (np.asarray(V_out_source, float) - cell.V_S1)


def hm_current(i, state, cfg, circuit):
    g = cfg.conductances()
    inh = inhibitory_current(state.V_out, g, circuit.cell)
    return cfg.currents()[i] + circuit.cell.I_bias + inh.sum() - inh[i]


def _device_circuit(circuit, devices, i):
    from dataclasses import replace
    mtj = replace(circuit.mtj, R_P=float(devices.R_P[i]), R_AP=float(devices.R_AP[i]))
    inv = replace(circuit.inverter, V_th_offset=circuit.inverter.V_th_offset + float(devices.V_th[i]))
    return mtj, inv


def step_column(state, cfg, circuit, devices=None, h_thermal=None):
    """Advance every cell by one dt with explicit (previous-step) coupling.

    Reference implementation built from the public device functions; the
    compiled loop in ``simulate`` follows the same sequence.
    """
    n = cfg.n_cells
    if devices is None:
        devices = CellDevices.nominal(circuit, n)
    if h_thermal is None:
        h_thermal = np.zeros((n, 3))
    currents = np.array([hm_current(i, state, cfg, circuit) for i in range(n)])
    new = state.copy()
    dt = cfg.dt
    for i in range(n):
        fn = (lambda m, I=currents[i], h=h_thermal[i], s=devices.she_scale[i]:
              effective_field(m, circuit.magnet, I, h, s))
        new.m[i] = rk4_step(state.m[i], fn, dt, circuit.magnet)
        mtj, inv = _device_circuit(circuit, devices, i)
        g = mtj_conductance(new.m[i], mtj)
        node = divider_voltage(g, circuit.cell)
        new.V_gate[i] = gate_update(state.V_gate[i], node, g, circuit.cell, inv, dt)
        target = inverter_transfer(new.V_gate[i], inv)
        new.V_out[i] = output_update(state.V_out[i], target, inv, dt)
    new.t = state.t + dt
    return new


def pack_params(circuit):
    mp, mtj, cell, inv = circuit.magnet, circuit.mtj, circuit.cell, circuit.inverter
    p = np.zeros(K.N_PARAMS)
    p[K.P_MS], p[K.P_ALPHA], p[K.P_HK] = mp.Ms, mp.alpha, mp.H_k
    p[K.P_EX:K.P_EZ + 1] = mp.easy_axis
    p[K.P_NX:K.P_NZ + 1] = mp.demag
    p[K.P_C], p[K.P_GMU0] = mp.she_coeff, mp.gamma * mp.mu0
    p[K.P_VS1], p[K.P_VS2], p[K.P_RR] = cell.V_S1, cell.V_S2, cell.R_R
    p[K.P_CG], p[K.P_TAU], p[K.P_VREF] = inv.C_g, inv.tau_inv, inv.V_ref + inv.V_th_offset
    p[K.P_GAIN], p[K.P_VDD] = inv.gain, inv.V_DD
    p[K.P_PLX:K.P_PLZ + 1] = mtj.pl_axis
    p[K.P_TO_S1] = 1.0 if cell.mtj_to_s1 else 0.0
    return p


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def config_hash(echo):
    """Git blob hash of the canonical JSON config echo."""
    body = json.dumps(_jsonable(echo), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def simulate(cfg, circuit=None, devices=None, chunk_steps=2000, state=None):
    """Integrate a column until it settles or duration_max is reached.

    Raises IntegrationError on a non-finite state.  A run that has not met
    the settling test by duration_max returns with converged=False.
    """
    circuit = circuit or CircuitParams()
    n = cfg.n_cells
    devices = devices or CellDevices.nominal(circuit, n)
    state = state.copy() if state is not None else initial_state(n, circuit, cfg.m0_tilt)
    p = pack_params(circuit)
    tc = ThermalConfig(dt=cfg.dt, rng_seed=cfg.seed, enabled=cfg.thermal, si_units=cfg.si_noise)
    sigma = thermal_sigma(tc, circuit.magnet)
    rng = np.random.default_rng(cfg.seed)
    I_in = cfg.currents() + circuit.cell.I_bias
    G = cfg.conductances()
    R_P = np.ascontiguousarray(devices.R_P, float)
    R_AP = np.ascontiguousarray(devices.R_AP, float)
    she = np.ascontiguousarray(devices.she_scale, float)
    vth = np.ascontiguousarray(devices.V_th, float)

    total = int(round(cfg.duration_max / cfg.dt))
    every = cfg.record_every
    nrec_max = total // every
    rec_v = np.empty((nrec_max, n))
    rec_mx = np.empty((nrec_max, n))
    rec_my = np.empty((nrec_max, n))
    zeros = np.zeros((chunk_steps, n, 3))
    win = max(1, int(round(cfg.settle_window / (cfg.dt * every))))

    done, nrec, phase, converged = 0, 0, 0, False
    while done < total:
        steps = min(chunk_steps, total - done)
        noise = sigma * rng.standard_normal((steps, n, 3)) if sigma > 0 else zeros[:steps]
        k, phase, status = K.advance(state.m, state.V_gate, state.V_out, I_in, G, she, R_P, R_AP,
                                     vth, p, noise, cfg.dt, every, rec_v[nrec:], rec_mx[nrec:],
                                     rec_my[nrec:], phase)
        if status:
            raise IntegrationError("non-finite magnetization at t=%.3g s" % ((done + steps) * cfg.dt))
        nrec += k
        done += steps
        if nrec >= win and nrec * every * cfg.dt >= 2 * cfg.settle_window:
            tail = rec_v[nrec - win:nrec]
            if np.all(tail.max(0) - tail.min(0) < cfg.settle_tol):
                converged = True
                if cfg.stop_early:
                    break
    state.t = done * cfg.dt
    times = (np.arange(nrec) + 1) * every * cfg.dt
    meta = {"config": _jsonable(cfg), "circuit": _jsonable(circuit), "seed": cfg.seed,
            "converged": converged, "t_end": state.t}
    meta["config_hash"] = config_hash({"config": meta["config"], "circuit": meta["circuit"]})
    return ColumnTrace(times, rec_v[:nrec].copy(), rec_mx[:nrec].copy(), rec_my[:nrec].copy(),
                       converged, meta)


def detect_steady(trace, tol=TAU_TOL, duration_max=None):
    """Earliest time after which every cell output stays within tol of its final value.

    A trace that never settled reports duration_max (default: its end time).
    """
    if not trace.converged:
        return float(duration_max if duration_max is not None else trace.times[-1])
    dev = np.abs(trace.v_out - trace.v_out[-1]).max(axis=1)
    bad = np.nonzero(dev > tol)[0]
    if len(bad) == 0:
        return 0.0
    return float(trace.times[bad[-1]])


def final_outputs(trace, window=0.5e-9):
    """Per-cell output averaged over the last `window` seconds."""
    dt = trace.times[1] - trace.times[0] if len(trace.times) > 1 else 1.0
    k = max(1, int(round(window / dt)))
    return trace.v_out[-k:].mean(axis=0)


def separation(trace, index=0, window=0.5e-9):
    v = final_outputs(trace, window)
    return float(v[index] - np.delete(v, index).mean())


@dataclass(frozen=True)
class Outcome:
    kind: str                # "Inactive", "PredictiveWin" or "Burst"
    index: int = None
    ambiguous: bool = False


def classify_outcome(trace, cfg=None, V_S1=-0.5, margin=SEPARATION_MIN):
    v = final_outputs(trace)
    if np.all(np.abs(v - V_S1) < margin):
        return Outcome("Inactive")
    n = len(v)
    gaps = np.array([v[i] - (v.sum() - v[i]) / (n - 1) for i in range(n)])
    winners = np.nonzero(gaps >= margin)[0]
    if len(winners):
        best = int(winners[np.argmax(v[winners])])
        return Outcome("PredictiveWin", best, len(winners) > 1)
    if v.mean() - V_S1 >= margin:
        return Outcome("Burst")
    return Outcome("Inactive")


def write_trace_csv(trace, path):
    n = trace.n_cells
    header = ",".join(["t"] + ["vout_%d" % i for i in range(n)] + ["mx_%d" % i for i in range(n)])
    data = np.column_stack([trace.times, trace.v_out, trace.m_x])
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        np.savetxt(f, data, fmt="%.10g", delimiter=",")


def write_metadata(meta, path):
    with open(path, "w", newline="\n") as f:
        json.dump(_jsonable(meta), f, indent=2, sort_keys=True)
        f.write("\n")


def isolated_response(circuit, currents, hold=5e-9, dt=0.5e-12, tilt=0.05, seed=0,
                      thermal=True):
    """Quasi-static response of one uncoupled cell.

    Steps through `currents` (proximal, bias added internally), holding each
    for `hold` seconds and carrying the state over.  Returns arrays of final
    m_y and V_out.
    """
    st = initial_state(1, circuit, tilt)
    p = pack_params(circuit)
    one = np.ones(1)
    steps = int(round(hold / dt))
    sigma = thermal_sigma(ThermalConfig(dt=dt, enabled=thermal), circuit.magnet)
    rng = np.random.default_rng(seed)
    rec = np.empty((1, 1))
    my, vo = [], []
    for I in currents:
        I_in = np.array([I + circuit.cell.I_bias])
        noise = sigma * rng.standard_normal((steps, 1, 3))
        _, _, status = K.advance(st.m, st.V_gate, st.V_out, I_in, np.zeros(1), one,
                                 np.array([circuit.mtj.R_P]), np.array([circuit.mtj.R_AP]),
                                 np.zeros(1), p, noise, dt, steps + 1, rec, rec, rec, 0)
        if status:
            raise IntegrationError("non-finite magnetization")
        my.append(st.m[0, 1])
        vo.append(st.V_out[0])
    return np.array(my), np.array(vo)
