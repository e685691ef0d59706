"""Compiled hot loops for the quantum-trajectory engine.

One trajectory = a first-order stochastic loop: per step, either a single
quantum jump (selected by one uniform draw against the three jump
probabilities) or an RK4 Hamiltonian substep followed by the no-jump damping
factors; the state is renormalized every step.
"""
import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_STEP_TOO_LARGE = 1
STATUS_ZERO_NORM = 2

JUMP_GAMMA_E = 0
JUMP_GAMMA_R = 1
JUMP_KAPPA = 2

#: first-order bound on the total jump probability per step
MAX_JUMP_PROB = 0.1


@njit(cache=True)
def _hamiltonian_rhs(cb, ce, cr, db, de_, dr_, sqn, g, om, delta_e, delta_r):
    """Unitary part of the photon-ladder equations of motion."""
    m = cb.shape[0]
    om_c = np.conj(om)
    for k in range(m):
        if k >= 1:
            db[k] = sqn[k] * g * ce[k - 1]
        else:
            db[k] = 0.0j
        if k + 1 < m:
            de_[k] = -sqn[k + 1] * g * cb[k + 1] + 0.5j * om_c * cr[k] + 1j * delta_e * ce[k]
        else:
            de_[k] = 0.5j * om_c * cr[k] + 1j * delta_e * ce[k]
        dr_[k] = 0.5j * om * ce[k] + 1j * delta_r * cr[k]


@njit(cache=True)
def run_trajectory_kernel(
    cb,
    ce,
    cr,
    g,
    om,
    delta_e,
    delta_r,
    gamma_e,
    gamma_r,
    kappa,
    dt,
    n_steps,
    uniforms,
    record_every,
    out_photon,
    out_rydberg,
    jump_times,
    jump_kinds,
):
    """Advance (cb, ce, cr) in place; record observables every record_every steps.

    Returns (status, n_jumps).  jump_times/jump_kinds are filled up to their
    capacity; n_jumps counts all jumps regardless.
    """
    m = cb.shape[0]
    sqn = np.sqrt(np.arange(m).astype(np.float64))
    k1b = np.empty(m, np.complex128); k1e = np.empty(m, np.complex128); k1r = np.empty(m, np.complex128)
    k2b = np.empty(m, np.complex128); k2e = np.empty(m, np.complex128); k2r = np.empty(m, np.complex128)
    k3b = np.empty(m, np.complex128); k3e = np.empty(m, np.complex128); k3r = np.empty(m, np.complex128)
    k4b = np.empty(m, np.complex128); k4e = np.empty(m, np.complex128); k4r = np.empty(m, np.complex128)
    tb = np.empty(m, np.complex128); te = np.empty(m, np.complex128); tr = np.empty(m, np.complex128)

    ph = 0.0
    ry = 0.0
    for k in range(m):
        ph += k * (abs(cb[k]) ** 2 + abs(ce[k]) ** 2 + abs(cr[k]) ** 2)
        ry += abs(cr[k]) ** 2
    out_photon[0] = ph
    out_rydberg[0] = ry
    rec_i = 1
    n_jumps = 0
    cap = jump_times.shape[0]

    for step in range(n_steps):
        # jump probabilities from the current state
        se = 0.0; sr = 0.0; sn = 0.0
        for k in range(m):
            se += abs(ce[k]) ** 2
            sr += abs(cr[k]) ** 2
            sn += k * (abs(cb[k]) ** 2 + abs(ce[k]) ** 2 + abs(cr[k]) ** 2)
        p_e = gamma_e * dt * se
        p_r = gamma_r * dt * sr
        p_k = kappa * dt * sn
        p_tot = p_e + p_r + p_k
        if p_tot >= MAX_JUMP_PROB:
            return STATUS_STEP_TOO_LARGE, n_jumps

        u = uniforms[step]
        if u < p_tot:
            if u < p_e:
                # spontaneous emission from the intermediate state: atom to
                # ground, photon ladder carried over unchanged
                for k in range(m):
                    cb[k] = ce[k]
                    ce[k] = 0.0j
                    cr[k] = 0.0j
                kind = JUMP_GAMMA_E
            elif u < p_e + p_r:
                for k in range(m):
                    cb[k] = cr[k]
                    ce[k] = 0.0j
                    cr[k] = 0.0j
                kind = JUMP_GAMMA_R
            else:
                # cavity emission: photon annihilation on all three branches
                for k in range(m - 1):
                    cb[k] = sqn[k + 1] * cb[k + 1]
                    ce[k] = sqn[k + 1] * ce[k + 1]
                    cr[k] = sqn[k + 1] * cr[k + 1]
                cb[m - 1] = 0.0j
                ce[m - 1] = 0.0j
                cr[m - 1] = 0.0j
                kind = JUMP_KAPPA
            if n_jumps < cap:
                jump_times[n_jumps] = (step + 1) * dt
                jump_kinds[n_jumps] = kind
            n_jumps += 1
        else:
            _hamiltonian_rhs(cb, ce, cr, k1b, k1e, k1r, sqn, g, om, delta_e, delta_r)
            for k in range(m):
                tb[k] = cb[k] + 0.5 * dt * k1b[k]
                te[k] = ce[k] + 0.5 * dt * k1e[k]
                tr[k] = cr[k] + 0.5 * dt * k1r[k]
            _hamiltonian_rhs(tb, te, tr, k2b, k2e, k2r, sqn, g, om, delta_e, delta_r)
            for k in range(m):
                tb[k] = cb[k] + 0.5 * dt * k2b[k]
                te[k] = ce[k] + 0.5 * dt * k2e[k]
                tr[k] = cr[k] + 0.5 * dt * k2r[k]
            _hamiltonian_rhs(tb, te, tr, k3b, k3e, k3r, sqn, g, om, delta_e, delta_r)
            for k in range(m):
                tb[k] = cb[k] + dt * k3b[k]
                te[k] = ce[k] + dt * k3e[k]
                tr[k] = cr[k] + dt * k3r[k]
            _hamiltonian_rhs(tb, te, tr, k4b, k4e, k4r, sqn, g, om, delta_e, delta_r)
            s = dt / 6.0
            for k in range(m):
                cb[k] += s * (k1b[k] + 2 * k2b[k] + 2 * k3b[k] + k4b[k])
                ce[k] += s * (k1e[k] + 2 * k2e[k] + 2 * k3e[k] + k4e[k])
                cr[k] += s * (k1r[k] + 2 * k2r[k] + 2 * k3r[k] + k4r[k])
            # no-jump amplitude damping, first order in dt
            f_e = 1.0 - 0.5 * gamma_e * dt
            f_r = 1.0 - 0.5 * gamma_r * dt
            for k in range(m):
                f_k = 1.0 - 0.5 * kappa * k * dt
                cb[k] *= f_k
                ce[k] *= f_e * f_k
                cr[k] *= f_r * f_k

        nrm = 0.0
        for k in range(m):
            nrm += abs(cb[k]) ** 2 + abs(ce[k]) ** 2 + abs(cr[k]) ** 2
        if nrm <= 0.0:
            return STATUS_ZERO_NORM, n_jumps
        inv = 1.0 / np.sqrt(nrm)
        for k in range(m):
            cb[k] *= inv
            ce[k] *= inv
            cr[k] *= inv

        if (step + 1) % record_every == 0:
            ph = 0.0
            ry = 0.0
            for k in range(m):
                ph += k * (abs(cb[k]) ** 2 + abs(ce[k]) ** 2 + abs(cr[k]) ** 2)
                ry += abs(cr[k]) ** 2
            out_photon[rec_i] = ph
            out_rydberg[rec_i] = ry
            rec_i += 1

    return STATUS_OK, n_jumps
