"""Compiled inner loop for column integration.

The loop mirrors ``column.step_column`` exactly; tests check the two agree.
"""

import math

import numba as nb
import numpy as np

# layout of the packed parameter vector
P_MS, P_ALPHA, P_HK, P_EX, P_EY, P_EZ, P_NX, P_NY, P_NZ, P_C, P_GMU0 = range(11)
P_VS1, P_VS2, P_RR, P_CG, P_TAU, P_VREF, P_GAIN, P_VDD = range(11, 19)
P_PLX, P_PLY, P_PLZ, P_TO_S1 = range(19, 23)
N_PARAMS = 23


@nb.njit(cache=True, nogil=True)
def _rhs(ax, ay, az, hx, hy, hz, gm, alpha):
    cx = ay * hz - az * hy
    cy = az * hx - ax * hz
    cz = ax * hy - ay * hx
    dx = ay * cz - az * cy
    dy = az * cx - ax * cz
    dz = ax * cy - ay * cx
    return -gm * (cx - alpha * dx), -gm * (cy - alpha * dy), -gm * (cz - alpha * dz)


@nb.njit(cache=True, nogil=True)
def _field(ax, ay, az, p, hy_ext, tx, ty, tz):
    ms = p[P_MS]
    ex, ey, ez = p[P_EX], p[P_EY], p[P_EZ]
    proj = p[P_HK] * (ax * ex + ay * ey + az * ez)
    hx = -ms * p[P_NX] * ax + proj * ex + tx
    hy = -ms * p[P_NY] * ay + proj * ey + hy_ext + ty
    hz = -ms * p[P_NZ] * az + proj * ez + tz
    return hx, hy, hz


@nb.njit(cache=True, nogil=True)
def advance(m, v_gate, v_out, I_in, G, she, R_P, R_AP, vth, p, noise, dt,
            rec_every, rec_v, rec_mx, rec_my, phase):
    """Integrate len(noise) steps in place.

    m (n,3), v_gate (n,), v_out (n,) are updated.  Every rec_every-th step
    (counted with the running phase) is written into the rec_* buffers.
    Returns (records written, new phase, status), status 1 on a non-finite
    magnetization.
    """
    n = m.shape[0]
    nsteps = noise.shape[0]
    alpha = p[P_ALPHA]
    gm = p[P_GMU0]
    vs1 = p[P_VS1]
    gr = 1.0 / p[P_RR]
    decay_inv = math.exp(-dt / p[P_TAU]) if p[P_TAU] > 0 else 0.0
    vdd = p[P_VDD]
    I_hm = np.empty(n)
    k = np.empty((4, 3))
    nrec = 0
    for s in range(nsteps):
        tot = 0.0
        for j in range(n):
            tot += G[j] * (v_out[j] - vs1)
        for i in range(n):
            I_hm[i] = I_in[i] + tot - G[i] * (v_out[i] - vs1)
        for i in range(n):
            hy_ext = p[P_C] * she[i] * I_hm[i]
            tx, ty, tz = noise[s, i, 0], noise[s, i, 1], noise[s, i, 2]
            mx, my, mz = m[i, 0], m[i, 1], m[i, 2]
            for st in range(4):
                if st == 0:
                    ax, ay, az = mx, my, mz
                elif st == 3:
                    ax, ay, az = mx + dt * k[2, 0], my + dt * k[2, 1], mz + dt * k[2, 2]
                else:
                    h = 0.5 * dt
                    ax, ay, az = mx + h * k[st - 1, 0], my + h * k[st - 1, 1], mz + h * k[st - 1, 2]
                hx, hy, hz = _field(ax, ay, az, p, hy_ext, tx, ty, tz)
                k[st, 0], k[st, 1], k[st, 2] = _rhs(ax, ay, az, hx, hy, hz, gm, alpha)
            mx += dt / 6.0 * (k[0, 0] + 2.0 * k[1, 0] + 2.0 * k[2, 0] + k[3, 0])
            my += dt / 6.0 * (k[0, 1] + 2.0 * k[1, 1] + 2.0 * k[2, 1] + k[3, 1])
            mz += dt / 6.0 * (k[0, 2] + 2.0 * k[1, 2] + 2.0 * k[2, 2] + k[3, 2])
            nn = math.sqrt(mx * mx + my * my + mz * mz)
            if not (nn > 0.0 and nn < 1e300):
                return nrec, phase, 1
            m[i, 0], m[i, 1], m[i, 2] = mx / nn, my / nn, mz / nn
        for i in range(n):
            cphi = m[i, 0] * p[P_PLX] + m[i, 1] * p[P_PLY] + m[i, 2] * p[P_PLZ]
            gp = 1.0 / R_P[i]
            gap = 1.0 / R_AP[i]
            g = 0.5 * (gp + gap) + 0.5 * (gp - gap) * cphi
            if p[P_TO_S1] > 0.5:
                vn = (vs1 * g + p[P_VS2] * gr) / (g + gr)
            else:
                vn = (p[P_VS2] * g + vs1 * gr) / (g + gr)
            tau_rc = p[P_CG] / (g + gr)
            v_gate[i] = vn + (v_gate[i] - vn) * math.exp(-dt / tau_rc)
            target = -p[P_GAIN] * (v_gate[i] - (p[P_VREF] + vth[i]))
            target = min(vdd, max(-vdd, target))
            v_out[i] = target + (v_out[i] - target) * decay_inv
        phase += 1
        if phase == rec_every:
            phase = 0
            for i in range(n):
                rec_v[nrec, i] = v_out[i]
                rec_mx[nrec, i] = m[i, 0]
                rec_my[nrec, i] = m[i, 1]
            nrec += 1
    return nrec, phase, 0
