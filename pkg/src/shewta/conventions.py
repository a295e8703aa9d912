"""Physical constants and the sign conventions used across the package.

Axes
    x  free-layer length, the direction of charge flow in the heavy metal.
    y  in-plane width; spin polarization of the spin-Hall current.
    z  film normal.

Signs
    Positive charge current in the heavy metal produces a spin-Hall field
    along +y.  The pinned layer points along -y, so positive current pushes
    the free layer toward the antiparallel (high resistance) state and
    negative current pushes it toward parallel.  Negative proximal current
    therefore excites a cell.

    The gyromagnetic ratio is the signed electron value (negative).  With
    that sign the LLG form ``-gamma*mu0*(m x H - alpha*m x (m x H))`` gives
    right-handed damped precession toward H.

Circuit
    The MTJ sits between the divider node and V_S1, the reference resistor
    between the node and V_S2.  A parallel free layer pulls the node down,
    so the inverter output goes high: parallel means excited.  A cell in the
    antiparallel state outputs -V_DD = V_S1 and sources no inhibition.
"""

import math

MU0 = 4e-7 * math.pi
HBAR = 1.054571817e-34
Q_E = 1.602176634e-19
KB = 1.380649e-23
GAMMA_E = -1.760859e11  # rad/(s*T), electron (signed)

X_HAT = (1.0, 0.0, 0.0)
Y_HAT = (0.0, 1.0, 0.0)
Z_HAT = (0.0, 0.0, 1.0)
PINNED_AXIS = (0.0, -1.0, 0.0)
