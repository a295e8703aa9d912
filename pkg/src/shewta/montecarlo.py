"""Process variation and ensemble runs over (input, advantage) grids."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import math

import numpy as np

from .analysis import PowerModel, total_energy
from .column import (SEPARATION_MIN, CellDevices, ColumnConfig, detect_steady, final_outputs,
                     simulate)
from .devices import CircuitParams
from .magnetics import IntegrationError


@dataclass(frozen=True)
class VariationSpec:
    sigma_RP_frac: float = 0.05
    sigma_RAP_frac: float = 0.05
    sigma_Ic0_frac: float = 0.05
    sigma_Vth: float = 0.020
    enabled: bool = True

    def __post_init__(self):
        if min(self.sigma_RP_frac, self.sigma_RAP_frac, self.sigma_Ic0_frac, self.sigma_Vth) < 0:
            raise ValueError("variation sigmas must be non-negative")


def _positive_normal(rng, mean, sd, n, tries=100):
    out = rng.normal(mean, sd, n)
    for _ in range(tries):
        bad = out <= 0
        if not bad.any():
            return out
        out[bad] = rng.normal(mean, sd, bad.sum())
    raise RuntimeError("could not draw positive values")


def sample_devices(spec, rng, circuit, n):
    """Independent per-cell draws of R_P, R_AP, spin-Hall scale and V_th."""
    if not spec.enabled:
        return CellDevices.nominal(circuit, n)
    rp = _positive_normal(rng, circuit.mtj.R_P, spec.sigma_RP_frac * circuit.mtj.R_P, n)
    rap = _positive_normal(rng, circuit.mtj.R_AP, spec.sigma_RAP_frac * circuit.mtj.R_AP, n)
    she = _positive_normal(rng, 1.0, spec.sigma_Ic0_frac, n)
    vth = rng.normal(0.0, spec.sigma_Vth, n)
    return CellDevices(rp, rap, she, vth)


@dataclass(frozen=True)
class EnsembleConfig:
    """grid : sequence of (I_prox, advantage) points."""

    rounds: int = 100
    grid: tuple = ((0.0, 1.0),)
    base: ColumnConfig = field(default_factory=ColumnConfig)
    variation: VariationSpec = field(default_factory=VariationSpec)
    master_seed: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        object.__setattr__(self, "grid", tuple((float(i), float(a)) for i, a in self.grid))


def round_seeds(master_seed, r):
    """(device seed, noise seed) for round r.  Shared by every grid point."""
    ss = np.random.SeedSequence([master_seed, r])
    dev, noise = ss.spawn(2)
    return dev, int(noise.generate_state(1, np.uint64)[0])


@dataclass
class RoundResult:
    winner: float
    others: float
    separation: float
    v_avg_excess: float
    tau: float
    energy: float
    converged: bool


def run_round(base, circuit, spec, power, I_prox, advantage, master_seed, r):
    dev_seed, noise_seed = round_seeds(master_seed, r)
    devices = sample_devices(spec, np.random.default_rng(dev_seed), circuit, base.n_cells)
    cfg = replace(base, I_prox=I_prox, advantage=advantage, seed=noise_seed)
    tr = simulate(cfg, circuit, devices)
    v = final_outputs(tr)
    k = cfg.predictive_index or 0
    others = float(np.delete(v, k).mean())
    tau = detect_steady(tr, duration_max=cfg.duration_max)
    return RoundResult(float(v[k]), others, float(v[k]) - others,
                       float(v.mean() - circuit.cell.V_S1), tau, total_energy(tau, power),
                       tr.converged)


STAT_FIELDS = ("winner", "others", "separation", "v_avg_excess", "tau", "energy")


@dataclass
class EnsembleStats:
    """One row per grid point: means and standard deviations over rounds."""

    I_prox: np.ndarray
    advantage: np.ndarray
    mean: dict
    std: dict
    n_ok: np.ndarray
    n_failed: np.ndarray
    n_unsettled: np.ndarray

    def rows(self):
        for g in range(len(self.I_prox)):
            row = {"I_prox": self.I_prox[g], "advantage": self.advantage[g]}
            for f in STAT_FIELDS:
                row[f + "_mean"] = self.mean[f][g]
                row[f + "_std"] = self.std[f][g]
            row.update(n_ok=int(self.n_ok[g]), n_failed=int(self.n_failed[g]),
                       n_unsettled=int(self.n_unsettled[g]))
            yield row

    def write_csv(self, path):
        rows = list(self.rows())
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(list(rows[0]))
            for row in rows:
                w.writerow([v if isinstance(v, int) else "%.10g" % v for v in row.values()])


def run_ensemble(cfg, circuit=None, power=None, threads=1):
    """Run rounds x grid simulations and aggregate per grid point.

    Results do not depend on `threads`: every task has a fixed seed and the
    reduction runs in grid/round order.
    """
    circuit = circuit or CircuitParams()
    power = power or PowerModel()
    tasks = [(g, r) for g in range(len(cfg.grid)) for r in range(cfg.rounds)]

    def work(task):
        g, r = task
        I, a = cfg.grid[g]
        try:
            return run_round(cfg.base, circuit, cfg.variation, power, I, a, cfg.master_seed, r)
        except IntegrationError:
            return None

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    ng = len(cfg.grid)
    mean = {f: np.full(ng, np.nan) for f in STAT_FIELDS}
    std = {f: np.full(ng, np.nan) for f in STAT_FIELDS}
    n_ok, n_failed, n_unsettled = np.zeros(ng, int), np.zeros(ng, int), np.zeros(ng, int)
    for g in range(ng):
        res = [x for x in results[g * cfg.rounds:(g + 1) * cfg.rounds] if x is not None]
        n_ok[g], n_failed[g] = len(res), cfg.rounds - len(res)
        n_unsettled[g] = sum(not x.converged for x in res)
        for f in STAT_FIELDS:
            vals = np.array([getattr(x, f) for x in res])
            if len(vals):
                mean[f][g] = vals.mean()
                std[f][g] = vals.std()
    grid = np.array(cfg.grid)
    return EnsembleStats(grid[:, 0], grid[:, 1], mean, std, n_ok, n_failed, n_unsettled)


def sweep_burst(cfg, circuit=None, threads=1):
    """Mean column-average excess over V_S1 per input, advantage fixed at 1.

    Returns an (n, 3) array of I_prox, mean excess, std of excess.
    """
    if any(a != 1.0 for _, a in cfg.grid):
        raise ValueError("bursting sweeps need advantage = 1")
    st = run_ensemble(cfg, circuit, threads=threads)
    return np.column_stack([st.I_prox, st.mean["v_avg_excess"], st.std["v_avg_excess"]])


def mean_separation(I_prox, advantage, rounds=100, variation=None, circuit=None, base=None,
                    master_seed=0, threads=1):
    variation = variation or VariationSpec(enabled=False)
    cfg = EnsembleConfig(rounds, ((I_prox, advantage),), base or ColumnConfig(), variation,
                         master_seed)
    return float(run_ensemble(cfg, circuit, threads=threads).mean["separation"][0])


def advantage_threshold(I_prox, rounds=100, variation=None, circuit=None, base=None,
                        master_seed=0, a_max=2.6, step=0.1, tol=0.01, threads=1,
                        target=SEPARATION_MIN):
    """Smallest advantage whose ensemble-mean separation reaches `target`.

    Scans upward in `step` from 1 and bisects inside the first bracket.
    Returns inf if a_max is not enough.
    """
    def sep(a):
        return mean_separation(I_prox, a, rounds, variation, circuit, base, master_seed, threads)

    lo = 1.0
    if sep(lo) >= target:
        return lo
    n = int(math.ceil((a_max - 1.0) / step - 1e-9))
    hi = None
    for k in range(1, n + 1):
        a = min(1.0 + k * step, a_max)
        if sep(a) >= target:
            hi = a
            break
        lo = a
    if hi is None:
        return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sep(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi
