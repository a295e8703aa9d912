"""Power, delay and energy bookkeeping for a column."""

from dataclasses import dataclass

import numpy as np

from .column import TAU_TOL, detect_steady

# Operands behind the quoted nominal powers: the mean squared crossbar swing
# and the series resistance of one divider stack, back-computed so that the
# nominal crossbar and divider powers come out at 1.2 uW and 30.4 uW.
NOMINAL_VIN_SQ = 1.2e-6 * 280e3          # V^2
NOMINAL_R_DIVIDER = 0.9 ** 2 / 30.4e-6   # ohm, R_R + E[R_MTJ]


@dataclass(frozen=True)
class PowerModel:
    """Leakage model.

    v_in_sq : E[(V_in - V_S1)^2] across a crossbar connection, V^2.
    R_divider : R_R + E[R_MTJ] of one divider stack, ohm.
    """

    P_I: float = 7.3e-6
    R_inh_avg: float = 280e3
    N_I: int = 162
    N_VD: int = 9
    V_S1: float = -0.5
    V_S2: float = 0.4
    v_in_sq: float = NOMINAL_VIN_SQ
    R_divider: float = NOMINAL_R_DIVIDER

    def __post_init__(self):
        if min(self.P_I, self.v_in_sq) < 0 or min(self.R_inh_avg, self.R_divider) <= 0:
            raise ValueError("powers must be non-negative and resistances positive")
        if self.N_I < 0 or self.N_VD < 0:
            raise ValueError("device counts must be non-negative")


def power_crossbar(model):
    return model.v_in_sq / model.R_inh_avg


def power_divider(model):
    return (model.V_S2 - model.V_S1) ** 2 / model.R_divider


def total_energy(tau, model):
    """E = tau * (N_I*(P_I + P_CB) + N_VD*P_VD)."""
    return tau * (model.N_I * (model.P_I + power_crossbar(model))
                  + model.N_VD * power_divider(model))


def model_from_circuit(circuit, **kw):
    """Power model whose divider resistance comes from the simulated devices."""
    r = circuit.cell.R_R + 0.5 * (circuit.mtj.R_P + circuit.mtj.R_AP)
    return PowerModel(V_S1=circuit.cell.V_S1, V_S2=circuit.cell.V_S2, R_divider=r, **kw)


def crossbar_swing_from_trace(trace, V_S1=-0.5):
    """E[(V - V_S1)^2] over time and cells of a trace's outputs."""
    return float(np.mean((trace.v_out - V_S1) ** 2))


def delay_energy(trace, model=None, from_trace=False, tol=TAU_TOL):
    """Settling time and energy of one run.

    from_trace : take the crossbar swing from the trace instead of the
        nominal operand.
    """
    model = model or PowerModel()
    if from_trace:
        from dataclasses import replace
        model = replace(model, v_in_sq=crossbar_swing_from_trace(trace, model.V_S1))
    tau = detect_steady(trace, tol)
    return tau, total_energy(tau, model)
