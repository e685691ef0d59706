"""Single-excitation equations of motion and their adiabatic reduction.

The full three-amplitude dynamics couples the intracavity photon amplitude to
the collective intermediate and Rydberg amplitudes; for a far-detuned
intermediate state the latter is eliminated, leaving an effective two-level
system with complex Stark shifts.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import NORM_EPS, TWO_PI, PhysicalParams, SingleExcState
from .errors import InvalidInput, SingularElimination, StepSizeTooLarge

#: default integrator step (us), resolving detunings up to a few hundred MHz
DEFAULT_DT = 1e-4

#: require at least this many steps per period of the fastest frequency
MIN_STEPS_PER_PERIOD = 50

#: warn about the adiabatic reduction below this detuning-to-coupling ratio
ADIABATIC_RATIO = 5.0


def eom_full(state: SingleExcState, p: PhysicalParams) -> tuple[complex, complex, complex]:
    """Time derivative (dC_b, dC_e, dC_r) of the full three-level dynamics."""
    cb, ce, cr = state.c_b, state.c_e, state.c_r
    om = p.omega_rabi
    dcb = p.g_collective * ce - 0.5 * p.kappa * cb
    dce = (
        -p.g_collective * cb
        + 0.5j * om.conjugate() * cr
        + 1j * p.delta_e * ce
        - 0.5 * p.gamma_e * ce
    )
    dcr = 0.5j * om * ce + 1j * p.delta_r * cr - 0.5 * p.gamma_r * cr
    return dcb, dce, dcr


def _elimination_denominator(p: PhysicalParams) -> complex:
    if p.delta_e == 0.0 and p.gamma_e == 0.0:
        raise SingularElimination(
            "cannot eliminate the intermediate state with delta_e = 0 and gamma_e = 0"
        )
    return p.delta_e + 0.5j * p.gamma_e


def effective_coupling(p: PhysicalParams) -> complex:
    """Dressed photon-Rydberg coupling G*conj(Omega) / (2*(delta_e + i*gamma_e/2))."""
    den = _elimination_denominator(p)
    return p.g_collective * p.omega_rabi.conjugate() / (2.0 * den)


def eliminated_intermediate_amplitude(c_b: complex, c_r: complex, p: PhysicalParams) -> complex:
    """Quasi-steady intermediate amplitude implied by (C_b, C_r)."""
    den = 1j * p.delta_e - 0.5 * p.gamma_e
    if den == 0.0:
        raise SingularElimination(
            "cannot eliminate the intermediate state with delta_e = 0 and gamma_e = 0"
        )
    return (p.g_collective * c_b - 0.5j * p.omega_rabi.conjugate() * c_r) / den


def eom_adiabatic(
    state: tuple[complex, complex], p: PhysicalParams, _warn: bool = True
) -> tuple[complex, complex]:
    """Time derivative (dC_b, dC_r) after eliminating the intermediate state.

    Includes both Stark-shift terms and the cavity kappa/2 decay; the small
    Rydberg linewidth does not appear in this reduction.
    """
    den = _elimination_denominator(p)
    if _warn and abs(p.delta_e) < ADIABATIC_RATIO * max(p.g_collective, abs(p.omega_rabi)):
        warnings.warn(
            "adiabatic reduction used outside its validity regime: "
            f"|delta_e|={abs(p.delta_e):.3g} < {ADIABATIC_RATIO}*max(G, |Omega|)",
            stacklevel=2,
        )
    cb, cr = state
    g, om = p.g_collective, p.omega_rabi
    dcb = (-1j * g * g / den) * cb - (g * om.conjugate() / (2 * den)) * cr - 0.5 * p.kappa * cb
    dcr = (g * om / (2 * den)) * cb - 1j * (abs(om) ** 2 / (4 * den)) * cr + 1j * p.delta_r * cr
    return dcb, dcr


@dataclass(frozen=True)
class Trajectory:
    """Sampled amplitudes of a single-excitation integration."""

    times: np.ndarray = field(repr=False)
    c_b: np.ndarray = field(repr=False)
    c_e: np.ndarray = field(repr=False)
    c_r: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInput("trajectory times must be strictly increasing")
        for pop in (self.pop_b, self.pop_e, self.pop_r):
            if np.any(pop > 1.0 + NORM_EPS) or np.any(pop < 0.0):
                raise InvalidInput("trajectory populations must stay within [0, 1]")

    @property
    def pop_b(self) -> np.ndarray:
        return np.abs(self.c_b) ** 2

    @property
    def pop_e(self) -> np.ndarray:
        return np.abs(self.c_e) ** 2

    @property
    def pop_r(self) -> np.ndarray:
        return np.abs(self.c_r) ** 2

    def norm_sq(self) -> np.ndarray:
        return self.pop_b + self.pop_e + self.pop_r

    def to_csv(self, path) -> None:
        header = "t_us,pop_b,pop_e,pop_r,re_cb,im_cb,re_ce,im_ce,re_cr,im_cr"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for i, t in enumerate(self.times):
                cb, ce, cr = self.c_b[i], self.c_e[i], self.c_r[i]
                row = (
                    t,
                    abs(cb) ** 2,
                    abs(ce) ** 2,
                    abs(cr) ** 2,
                    cb.real,
                    cb.imag,
                    ce.real,
                    ce.imag,
                    cr.real,
                    cr.imag,
                )
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def max_frequency(p: PhysicalParams) -> float:
    """Largest dynamical frequency (rad/us) limiting the integrator step."""
    return max(abs(p.delta_e), abs(p.omega_rabi), p.g_collective, p.kappa)


def check_step(p: PhysicalParams, dt: float) -> None:
    if dt <= 0:
        raise StepSizeTooLarge(f"dt must be positive, got {dt}")
    f_max = max_frequency(p)
    if f_max == 0.0:
        return
    # at least MIN_STEPS_PER_PERIOD steps per fastest oscillation period
    dt_max = TWO_PI / (MIN_STEPS_PER_PERIOD * f_max)
    if dt > dt_max * (1 + 1e-12):
        raise StepSizeTooLarge(
            f"dt={dt} too coarse for the fastest frequency present; need dt <= {dt_max:.3e}"
        )


def integrate(
    state0: SingleExcState,
    p: PhysicalParams,
    t_end: float,
    dt: float = DEFAULT_DT,
    model: str = "full",
    record_every: int = 1,
) -> Trajectory:
    """Fixed-step RK4 integration of the full or adiabatically reduced dynamics.

    Samples every ``record_every`` steps (always including t=0).  For the
    adiabatic model the intermediate amplitude is reconstructed from its
    quasi-steady value so both models share one trajectory schema.
    """
    check_step(p, dt)
    if record_every < 1:
        raise InvalidInput("record_every must be >= 1")
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise InvalidInput("t_end must cover at least one step")

    times = [0.0]
    if model == "full":
        # unpack once; dataclass construction inside the hot loop would dominate
        om = p.omega_rabi
        omc = om.conjugate()
        g, de, dr = p.g_collective, p.delta_e, p.delta_r
        ge2, gr2, k2 = 0.5 * p.gamma_e, 0.5 * p.gamma_r, 0.5 * p.kappa

        def deriv(cb, ce, cr):
            return (
                g * ce - k2 * cb,
                -g * cb + 0.5j * omc * cr + 1j * de * ce - ge2 * ce,
                0.5j * om * ce + 1j * dr * cr - gr2 * cr,
            )

        cb, ce, cr = state0.c_b, state0.c_e, state0.c_r
        out = [(cb, ce, cr)]
        for step in range(n_steps):
            k1 = deriv(cb, ce, cr)
            k2_ = deriv(cb + 0.5 * dt * k1[0], ce + 0.5 * dt * k1[1], cr + 0.5 * dt * k1[2])
            k3 = deriv(cb + 0.5 * dt * k2_[0], ce + 0.5 * dt * k2_[1], cr + 0.5 * dt * k2_[2])
            k4 = deriv(cb + dt * k3[0], ce + dt * k3[1], cr + dt * k3[2])
            s = dt / 6.0
            cb += s * (k1[0] + 2 * k2_[0] + 2 * k3[0] + k4[0])
            ce += s * (k1[1] + 2 * k2_[1] + 2 * k3[1] + k4[1])
            cr += s * (k1[2] + 2 * k2_[2] + 2 * k3[2] + k4[2])
            if (step + 1) % record_every == 0:
                out.append((cb, ce, cr))
                times.append((step + 1) * dt)
        arr = np.array(out, dtype=complex)
        return Trajectory(np.array(times), arr[:, 0], arr[:, 1], arr[:, 2])

    if model == "adiabatic":
        # validity warning / singularity check once up front
        eom_adiabatic((state0.c_b, state0.c_r), p)
        den = _elimination_denominator(p)
        g, om = p.g_collective, p.omega_rabi
        a_bb = -1j * g * g / den - 0.5 * p.kappa
        a_br = -(g * om.conjugate()) / (2 * den)
        a_rb = (g * om) / (2 * den)
        a_rr = -1j * (abs(om) ** 2 / (4 * den)) + 1j * p.delta_r

        def deriv2(cb, cr):
            return (a_bb * cb + a_br * cr, a_rb * cb + a_rr * cr)

        cb, cr = state0.c_b, state0.c_r
        out2 = [(cb, cr)]
        for step in range(n_steps):
            k1 = deriv2(cb, cr)
            k2_ = deriv2(cb + 0.5 * dt * k1[0], cr + 0.5 * dt * k1[1])
            k3 = deriv2(cb + 0.5 * dt * k2_[0], cr + 0.5 * dt * k2_[1])
            k4 = deriv2(cb + dt * k3[0], cr + dt * k3[1])
            s = dt / 6.0
            cb += s * (k1[0] + 2 * k2_[0] + 2 * k3[0] + k4[0])
            cr += s * (k1[1] + 2 * k2_[1] + 2 * k3[1] + k4[1])
            if (step + 1) % record_every == 0:
                out2.append((cb, cr))
                times.append((step + 1) * dt)
        arr = np.array(out2, dtype=complex)
        c_e = np.array(
            [eliminated_intermediate_amplitude(b, r, p) for b, r in zip(arr[:, 0], arr[:, 1])]
        )
        return Trajectory(np.array(times), arr[:, 0], c_e, arr[:, 1])

    raise InvalidInput(f"unknown model {model!r}; expected 'full' or 'adiabatic'")
