"""Macrospin Landau-Lifshitz-Gilbert dynamics for the spin-Hall free layer.

Vectors are plain numpy arrays with a trailing axis of length 3, so every
field function also works on stacks of magnetizations.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .conventions import GAMMA_E, HBAR, KB, MU0, Q_E, Y_HAT


class IntegrationError(RuntimeError):
    """Raised when the integrator produces a non-finite state."""


def _prism_nz(a, b, c):
    # Aharoni's closed form for a prism with half-sides a, b, c; factor along c
    r = math.sqrt(a * a + b * b + c * c)
    ab = math.sqrt(a * a + b * b)
    bc = math.sqrt(b * b + c * c)
    ac = math.sqrt(a * a + c * c)
    t = ((b * b - c * c) / (2 * b * c) * math.log((r - a) / (r + a))
         + (a * a - c * c) / (2 * a * c) * math.log((r - b) / (r + b))
         + b / (2 * c) * math.log((ab + a) / (ab - a))
         + a / (2 * c) * math.log((ab + b) / (ab - b))
         + c / (2 * a) * math.log((bc - b) / (bc + b))
         + c / (2 * b) * math.log((ac - a) / (ac + a))
         + 2 * math.atan(a * b / (c * r))
         + (a ** 3 + b ** 3 - 2 * c ** 3) / (3 * a * b * c)
         + (a * a + b * b - 2 * c * c) / (3 * a * b * c) * r
         + c / (a * b) * (ac + bc)
         - (ab ** 3 + bc ** 3 + ac ** 3) / (3 * a * b * c))
    return t / math.pi


def demag_factors(length, width, thickness):
    """Demagnetizing factors (Nx, Ny, Nz) of a uniformly magnetized prism.

    length, width, thickness : edge lengths along x, y, z (any common unit)
    """
    a, b, c = 0.5 * length, 0.5 * width, 0.5 * thickness
    return (_prism_nz(b, c, a), _prism_nz(c, a, b), _prism_nz(a, b, c))


# Free layer of about 53 x 34 x 1 nm.  Shape anisotropy holds m along x while
# the crystalline axis along y nearly cancels it, leaving a soft linear
# response to the spin-Hall field (see calibrate in the cli).
DEFAULT_DIMS = (53.45e-9, 33.676e-9, 1.0e-9)


@dataclass(frozen=True)
class MagnetParams:
    """Free-layer constants.  SI units throughout."""

    Ms: float = 1.0e6
    alpha: float = 0.01
    K: float = 1.0e4
    dims: tuple = DEFAULT_DIMS
    easy_axis: tuple = Y_HAT
    theta_sh: float = 0.3
    t_hm: float = 5.0e-9
    L_fm: float = None
    gamma: float = GAMMA_E
    mu0: float = MU0
    hbar: float = HBAR
    q: float = Q_E
    kB: float = KB
    T: float = 300.0
    demag: tuple = None

    def __post_init__(self):
        if self.Ms <= 0 or self.alpha <= 0:
            raise ValueError("Ms and alpha must be positive")
        if min(self.dims) <= 0:
            raise ValueError("dims must be positive")
        e = np.asarray(self.easy_axis, float)
        n = np.linalg.norm(e)
        if n == 0:
            raise ValueError("easy_axis must be nonzero")
        object.__setattr__(self, "easy_axis", tuple(float(v) for v in e / n))
        object.__setattr__(self, "dims", tuple(float(v) for v in self.dims))
        if self.L_fm is None:
            object.__setattr__(self, "L_fm", self.dims[0])
        if self.demag is None:
            object.__setattr__(self, "demag", demag_factors(*self.dims))
        if abs(sum(self.demag) - 1.0) > 1e-6:
            raise ValueError("demag factors must sum to 1")

    @property
    def V(self):
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def H_k(self):
        """Crystalline anisotropy field 2K/(mu0 Ms)."""
        return 2.0 * self.K / (self.mu0 * self.Ms)

    @property
    def she_coeff(self):
        """Spin-Hall field per unit charge current, A/m per A."""
        return (self.theta_sh * self.t_hm / self.L_fm / (2.0 * self.q)
                * self.hbar / (self.alpha * self.V * self.Ms) / self.mu0)

    @property
    def stiffness(self):
        """In-plane restoring field for small m_y about the x axis, A/m."""
        Nx, Ny, _ = self.demag
        ex, ey, _ = self.easy_axis
        return self.Ms * (Ny - Nx) + self.H_k * (ex * ex - ey * ey)

    @property
    def I_sat(self):
        """Current at which the spin-Hall field saturates m_y, A."""
        return self.stiffness / self.she_coeff


@dataclass(frozen=True)
class ThermalConfig:
    """Thermal field settings.

    si_units : if True the standard deviation is divided by mu0, giving the
        Brown field in A/m.  The default uses the variance expression as is.
    """

    dt: float = 0.5e-12
    rng_seed: int = 0
    enabled: bool = True
    si_units: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def thermal_sigma(tc, p):
    """Per-component standard deviation of the thermal field."""
    if not tc.enabled or p.T <= 0:
        return 0.0
    s = math.sqrt(2.0 * p.kB * p.T * p.alpha / (abs(p.gamma) * p.Ms * p.V * tc.dt))
    return s / p.mu0 if tc.si_units else s


def demag_field(m, p):
    return -p.Ms * np.asarray(p.demag) * np.asarray(m, float)


def anisotropy_field(m, p):
    e = np.asarray(p.easy_axis)
    proj = np.asarray(m, float) @ e
    return p.H_k * np.multiply.outer(proj, e)


def she_field(I_charge, p, scale=1.0):
    """Spin-Hall field along +y for heavy-metal charge current I_charge (A)."""
    h = scale * p.she_coeff * np.asarray(I_charge, float)
    return np.multiply.outer(h, np.asarray(Y_HAT))


def thermal_field(rng, tc, p, size=None):
    """Draw thermal field vectors from a numpy Generator."""
    shape = (3,) if size is None else tuple(np.atleast_1d(size)) + (3,)
    sigma = thermal_sigma(tc, p)
    if sigma == 0.0:
        return np.zeros(shape)
    return sigma * rng.standard_normal(shape)


def effective_field(m, p, I_charge=0.0, h_thermal=None, she_scale=1.0):
    h = demag_field(m, p) + anisotropy_field(m, p) + she_field(I_charge, p, she_scale)
    if h_thermal is not None:
        h = h + h_thermal
    return h


def llg_rhs(m, H_eff, p):
    """dm/dt = -gamma*mu0*(m x H - alpha*m x (m x H))."""
    m = np.asarray(m, float)
    mxh = np.cross(m, H_eff)
    return -p.gamma * p.mu0 * (mxh - p.alpha * np.cross(m, mxh))


def rk4_step(m, field_fn, dt, p):
    """One classical RK4 step of the LLG equation, then renormalize.

    field_fn : callable m -> H_eff, held fixed over the step (the thermal
        field should be drawn once outside and closed over).
    """
    m = np.asarray(m, float)
    k1 = llg_rhs(m, field_fn(m), p)
    a = m + 0.5 * dt * k1
    k2 = llg_rhs(a, field_fn(a), p)
    a = m + 0.5 * dt * k2
    k3 = llg_rhs(a, field_fn(a), p)
    a = m + dt * k3
    k4 = llg_rhs(a, field_fn(a), p)
    out = m + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite magnetization")
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def magnetic_energy(m, p):
    """Demag plus anisotropy energy density (J/m^3), external fields excluded."""
    m = np.asarray(m, float)
    e = np.asarray(p.easy_axis)
    demag = 0.5 * p.mu0 * p.Ms ** 2 * (np.asarray(p.demag) * m * m).sum(-1)
    return demag - p.K * (m @ e) ** 2
