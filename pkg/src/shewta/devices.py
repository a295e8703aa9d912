"""Electrical models: MTJ conductance, divider cell, inverter and gate RC."""

from dataclasses import dataclass, field
import math

import numpy as np

from .conventions import PINNED_AXIS
from .magnetics import MagnetParams

R_R_RANGE = (3.25e3, 140e3)

# Cell inverter slope and the proximal current at which an isolated cell
# turns fully off.  Chosen by the calibration sweep in the cli; small loop
# gain keeps the inhibitory feedback loop stable against the gate RC lag.
CELL_GAIN = 1.2
I_OFF = 1.5e-6


@dataclass(frozen=True)
class MtjParams:
    """Tunnel junction.  RA in ohm*m^2, area in m^2.

    R_P and R_AP default to RA/area and R_P*(1+TMR); pass them explicitly to
    model a mismatched device.
    """

    RA: float = 8e-12
    TMR: float = 1.5
    area: float = MagnetParams().dims[0] * MagnetParams().dims[1]
    pl_axis: tuple = PINNED_AXIS
    R_P: float = None
    R_AP: float = None

    def __post_init__(self):
        if self.R_P is None:
            object.__setattr__(self, "R_P", self.RA / self.area)
        if self.R_AP is None:
            object.__setattr__(self, "R_AP", self.R_P * (1.0 + self.TMR))
        if not self.R_AP > self.R_P > 0:
            raise ValueError("need R_AP > R_P > 0")

    @classmethod
    def for_magnet(cls, mp, **kw):
        return cls(area=mp.dims[0] * mp.dims[1], **kw)


@dataclass(frozen=True)
class CellParams:
    """Divider and heavy-metal constants.

    I_bias : constant current added to the heavy-metal input, A.  It sets the
        proximal current at which the column turns on.
    mtj_to_s1 : True puts the MTJ between the node and V_S1 (parallel state
        pulls the node low); False swaps the MTJ and R_R.
    """

    R_R: float = 3.25e3
    V_S1: float = -0.5
    V_S2: float = 0.4
    R_HM: float = 50.0
    I_bias: float = 0.0
    mtj_to_s1: bool = True

    def __post_init__(self):
        if not self.V_S2 > self.V_S1:
            raise ValueError("need V_S2 > V_S1")
        lo, hi = R_R_RANGE
        if not lo * (1 - 1e-9) <= self.R_R <= hi * (1 + 1e-9):
            raise ValueError("R_R outside %g-%g ohm" % R_R_RANGE)


@dataclass(frozen=True)
class InverterParams:
    """First-order inverter: linear slope between the rails.

    The defaults describe the detection comparator: V_S1 and V_S1 + 70 mV map
    to outputs 500 mV apart.
    """

    V_DD: float = 0.5
    tau_inv: float = 4.5e-12
    C_g: float = 6.6e-15
    R_T: float = 10.8e3
    V_ref: float = -0.5 + 0.035
    gain: float = 0.5 / 0.07
    V_th_offset: float = 0.0

    def __post_init__(self):
        if self.gain <= 0 or self.V_DD <= 0:
            raise ValueError("gain and V_DD must be positive")


def mtj_conductance(m, mtj):
    """G = (G_P+G_AP)/2 + (G_P-G_AP)/2 * cos(phi), cos(phi) = m . pl_axis."""
    gp, gap = 1.0 / mtj.R_P, 1.0 / mtj.R_AP
    c = np.asarray(m, float) @ np.asarray(mtj.pl_axis)
    return 0.5 * (gp + gap) + 0.5 * (gp - gap) * c


def divider_voltage(G_mtj, cell):
    g_r = 1.0 / cell.R_R
    if cell.mtj_to_s1:
        return (cell.V_S1 * G_mtj + cell.V_S2 * g_r) / (G_mtj + g_r)
    return (cell.V_S2 * G_mtj + cell.V_S1 * g_r) / (G_mtj + g_r)


def thevenin_resistance(G_mtj, cell):
    return 1.0 / (G_mtj + 1.0 / cell.R_R)


def inverter_transfer(V_in, inv):
    v = -inv.gain * (np.asarray(V_in, float) - (inv.V_ref + inv.V_th_offset))
    return np.clip(v, -inv.V_DD, inv.V_DD)


def gate_update(V_gate, V_node, G_mtj, cell, inv, dt):
    """Relax the gate toward V_node over dt with tau = R_thevenin * C_g."""
    tau = thevenin_resistance(G_mtj, cell) * inv.C_g
    return V_node + (V_gate - V_node) * np.exp(-dt / tau)


def output_update(V_out, V_target, inv, dt):
    """Intrinsic inverter delay as a first-order lag on the output."""
    if inv.tau_inv <= 0:
        return V_target
    return V_target + (V_out - V_target) * math.exp(-dt / inv.tau_inv)


def cessation_vref(mtj, cell, gain, V_DD=0.5):
    """Inverter reference that maps the antiparallel node exactly to -V_DD."""
    G_off = 1.0 / mtj.R_AP if cell.mtj_to_s1 else 1.0 / mtj.R_P
    node = divider_voltage(G_off, cell)
    return node - V_DD / gain if cell.mtj_to_s1 else node + V_DD / gain


@dataclass(frozen=True)
class CircuitParams:
    """Everything one cell needs.  Omitted parts get the calibrated defaults.

    The heavy-metal bias defaults to I_sat - I_off so that an isolated cell
    is fully antiparallel for proximal currents at or above I_off.  The cell
    inverter defaults to gain cell_gain with its reference at the cessation
    point.
    """

    magnet: MagnetParams = field(default_factory=MagnetParams)
    mtj: MtjParams = None
    cell: CellParams = None
    inverter: InverterParams = None
    I_off: float = I_OFF
    cell_gain: float = CELL_GAIN

    def __post_init__(self):
        if self.mtj is None:
            object.__setattr__(self, "mtj", MtjParams.for_magnet(self.magnet))
        if self.cell is None:
            object.__setattr__(self, "cell", CellParams(I_bias=self.magnet.I_sat - self.I_off))
        if self.inverter is None:
            vref = cessation_vref(self.mtj, self.cell, self.cell_gain)
            object.__setattr__(self, "inverter", InverterParams(gain=self.cell_gain, V_ref=vref))
