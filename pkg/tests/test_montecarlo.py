import numpy as np
import pytest

from shewta.column import ColumnConfig, final_outputs, simulate
from shewta.devices import CircuitParams
from shewta.montecarlo import (EnsembleConfig, VariationSpec, run_ensemble, sample_devices,
                               sweep_burst)

C = CircuitParams()
FAST = ColumnConfig(duration_max=30e-9)


def test_disabled_gives_nominal():
    d = sample_devices(VariationSpec(enabled=False), np.random.default_rng(0), C, 9)
    assert np.all(d.R_P == C.mtj.R_P) and np.all(d.she_scale == 1) and np.all(d.V_th == 0)


def test_sample_statistics():
    d = sample_devices(VariationSpec(), np.random.default_rng(1), C, 100_000)
    assert abs(d.R_P.std() / (0.05 * C.mtj.R_P) - 1) < 0.02
    assert abs(d.R_AP.std() / (0.05 * C.mtj.R_AP) - 1) < 0.02
    assert abs(d.she_scale.std() / 0.05 - 1) < 0.02
    assert abs(d.V_th.std() / 0.02 - 1) < 0.02
    # independent draws: the ratio is not pinned to 1 + TMR
    assert (d.R_AP / d.R_P).std() > 0.05
    assert abs(np.corrcoef(d.R_P, d.R_AP)[0, 1]) < 0.02


def test_negative_draws_rejected():
    spec = VariationSpec(sigma_RP_frac=2.0, sigma_RAP_frac=2.0, sigma_Ic0_frac=2.0)
    d = sample_devices(spec, np.random.default_rng(2), C, 10_000)
    assert d.R_P.min() > 0 and d.R_AP.min() > 0 and d.she_scale.min() > 0


def test_single_round_matches_direct_simulation():
    cfg = EnsembleConfig(1, ((-1e-6, 1.5),), ColumnConfig(thermal=False),
                         VariationSpec(enabled=False))
    st = run_ensemble(cfg, C)
    tr = simulate(ColumnConfig(I_prox=-1e-6, advantage=1.5, thermal=False), C)
    v = final_outputs(tr)
    assert st.mean["winner"][0] == v[0]
    assert abs(st.mean["separation"][0] - (v[0] - v[1:].mean())) < 1e-15


def test_no_spread_without_variation_or_noise():
    cfg = EnsembleConfig(4, ((0.0, 1.3),), ColumnConfig(thermal=False),
                         VariationSpec(enabled=False))
    st = run_ensemble(cfg, C)
    assert all(st.std[f][0] == 0 for f in st.std)


def test_reproducible_and_thread_independent():
    cfg = EnsembleConfig(4, ((0.0, 1.2), (-1e-6, 1.0)), FAST, VariationSpec(), 5)
    a = run_ensemble(cfg, C)
    b = run_ensemble(cfg, C, threads=3)
    for f in a.mean:
        assert np.array_equal(a.mean[f], b.mean[f])
        assert np.array_equal(a.std[f], b.std[f])


def test_seed_changes_results():
    base = EnsembleConfig(3, ((0.0, 1.2),), FAST, VariationSpec(), 1)
    other = EnsembleConfig(3, ((0.0, 1.2),), FAST, VariationSpec(), 2)
    assert run_ensemble(base, C).mean["separation"][0] != run_ensemble(other, C).mean["separation"][0]


def test_burst_sweep_monotone_and_levels():
    cfg = EnsembleConfig(3, tuple((i * 1e-6, 1.0) for i in (-3, -2, -1, 0, 1, 2, 3)), FAST,
                         VariationSpec(enabled=False))
    tab = sweep_burst(cfg, C)
    assert np.all(np.diff(tab[:, 1]) <= 1e-4)
    assert tab[0, 1] > 0.07 and abs(tab[-1, 1]) < 0.01


def test_burst_sweep_requires_unit_advantage():
    with pytest.raises(ValueError):
        sweep_burst(EnsembleConfig(1, ((0.0, 1.5),)), C)


def test_rows_and_csv(tmp_path):
    cfg = EnsembleConfig(2, ((0.0, 1.0), (0.0, 2.0)), FAST, VariationSpec(enabled=False))
    st = run_ensemble(cfg, C)
    p = tmp_path / "s.csv"
    st.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0].startswith("I_prox,advantage,winner_mean,winner_std")
    assert len(lines) == 3
