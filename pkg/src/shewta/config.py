"""Experiment configuration: JSON files mapped onto the parameter dataclasses.

Every section is optional; missing fields keep their defaults and unknown
fields raise ConfigError naming the offending key.
"""

from dataclasses import dataclass, field, fields, replace
import json

from .analysis import PowerModel
from .column import ColumnConfig
from .devices import CircuitParams, CellParams, InverterParams, MtjParams, cessation_vref
from .magnetics import MagnetParams
from .montecarlo import EnsembleConfig, VariationSpec

US = 1e-6

PRESETS = {
    "fig4-insufficient": {"I_prox": 3 * US, "advantage": 1.0},
    "fig4-equal": {"I_prox": -2 * US, "advantage": 1.0},
    "fig4-advantage": {"I_prox": 0.0, "advantage": 2.0},
}

DEFAULT_SWEEPS = {
    "predictive": {"currents": [v * US for v in (-3, -2, -1, 0, 1, 2, 3)],
                   "advantages": [1.0, 1.1, 1.2, 1.4, 1.6, 1.8, 2.0]},
    "burst": {"currents": [v * US for v in (-4, -3, -2, -1, 0, 1, 2, 3, 4)]},
    "energy": {"current": 0.0, "advantages": [1.0, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0]},
    "calibrate": {"currents": [v * 0.25 * US for v in range(-16, 17)], "hold": 20e-9},
}

SECTIONS = ("magnet", "mtj", "cell", "inverter", "circuit", "column", "variation", "ensemble",
            "power", "sweep")
TOP_LEVEL = ("scenario", "out", "seed")


class ConfigError(ValueError):
    """Invalid configuration; the message names the field."""


def _check_keys(section, given, allowed):
    for key in given:
        if key not in allowed:
            raise ConfigError("unknown field '%s.%s'" % (section, key))


def _names(cls):
    return {f.name for f in fields(cls)}


def _build(section, cls, values, **extra):
    _check_keys(section, values, _names(cls))
    kw = dict(extra)
    kw.update({k: tuple(v) if isinstance(v, list) else v for k, v in values.items()})
    try:
        return cls(**kw)
    except (TypeError, ValueError) as e:
        raise ConfigError("%s: %s" % (section, e)) from None


@dataclass
class ExperimentConfig:
    scenario: str = None
    out: str = "out"
    seed: int = 0
    circuit: CircuitParams = field(default_factory=CircuitParams)
    column: ColumnConfig = field(default_factory=ColumnConfig)
    variation: VariationSpec = field(default_factory=VariationSpec)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    power: PowerModel = field(default_factory=PowerModel)
    sweep: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def sweep_for(self, name):
        d = dict(DEFAULT_SWEEPS[name])
        d.update(self.sweep.get(name, {}))
        return d


def build_circuit(raw):
    mag = _build("magnet", MagnetParams, raw.get("magnet", {}))
    circ = raw.get("circuit", {})
    _check_keys("circuit", circ, {"I_off", "cell_gain"})
    I_off = circ.get("I_off", CircuitParams.I_off)
    gain = circ.get("cell_gain", CircuitParams.cell_gain)
    mtj = _build("mtj", MtjParams, raw.get("mtj", {}), area=mag.dims[0] * mag.dims[1])
    cell_raw = raw.get("cell", {})
    cell = _build("cell", CellParams, cell_raw)
    if "I_bias" not in cell_raw:
        cell = replace(cell, I_bias=mag.I_sat - I_off)
    inv_raw = dict(raw.get("inverter", {}))
    inv_raw.setdefault("gain", gain)
    if "V_ref" not in inv_raw:
        inv_raw["V_ref"] = cessation_vref(mtj, cell, inv_raw["gain"], inv_raw.get("V_DD", 0.5))
    inv = _build("inverter", InverterParams, inv_raw)
    return CircuitParams(mag, mtj, cell, inv, I_off, gain)


def from_dict(raw):
    raw = dict(raw or {})
    _check_keys("config", raw, set(SECTIONS) | set(TOP_LEVEL))
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("field 'seed' must be an integer")
    circuit = build_circuit(raw)
    col = dict(raw.get("column", {}))
    col.setdefault("seed", seed)
    column = _build("column", ColumnConfig, col)
    variation = _build("variation", VariationSpec, raw.get("variation", {}))
    ens = dict(raw.get("ensemble", {}))
    _check_keys("ensemble", ens, {"rounds", "grid", "master_seed"})
    ens.setdefault("master_seed", seed)
    if "grid" in ens:
        ens["grid"] = [tuple(p) for p in ens["grid"]]
    ensemble = _build("ensemble", EnsembleConfig, ens, base=column, variation=variation)
    power = _build("power", PowerModel, raw.get("power", {}))
    sweep = raw.get("sweep", {})
    _check_keys("sweep", sweep, DEFAULT_SWEEPS)
    for name, d in sweep.items():
        _check_keys("sweep." + name, d, DEFAULT_SWEEPS[name])
    scenario = raw.get("scenario")
    if scenario is not None and scenario not in PRESETS:
        raise ConfigError("unknown field value 'scenario': %s" % scenario)
    return ExperimentConfig(scenario, raw.get("out", "out"), seed, circuit, column, variation,
                            ensemble, power, sweep, raw)


def load(path):
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError("cannot read config: %s" % e) from None
    except json.JSONDecodeError as e:
        raise ConfigError("config is not valid JSON: %s" % e) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(raw)
