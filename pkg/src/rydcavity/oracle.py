"""Brute-force dense validation models on small Hilbert spaces.

Everything here exists to certify the reduced models: the full multi-atom
Hamiltonian with explicit pair interactions, the gate Hamiltonian with its
two-Rydberg exchange channel, a dense master-equation solver, and weak-probe
steady-state reflection extracted by a linear solve on the one-excitation
sector.  Hard dimension caps keep these solvers trivially correct, not fast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .core import PhysicalParams, SingleExcState, TWO_PI, angular
from .dynamics import integrate
from .errors import DimensionExceeded, InvalidInput, TraceError

MAX_ATOMS = 4
MAX_CUTOFF = 8
MAX_DIM = 729
MAX_GATE_DIM = 1152

_TRACE_TOL = 1e-8
_EIG_FLOOR = -1e-6


@dataclass(frozen=True)
class FullSystemSpec:
    """Dense-model description: per-atom couplings and pair interactions."""

    n_atoms: int
    g_n: np.ndarray = field(repr=False)
    v_nm: np.ndarray = field(repr=False)
    fock_cutoff: int = 1

    def __post_init__(self):
        if not (1 <= self.n_atoms <= MAX_ATOMS):
            raise DimensionExceeded(f"n_atoms must be in [1, {MAX_ATOMS}], got {self.n_atoms}")
        if not (1 <= self.fock_cutoff <= MAX_CUTOFF):
            raise DimensionExceeded(
                f"fock_cutoff must be in [1, {MAX_CUTOFF}], got {self.fock_cutoff}"
            )
        g = np.asarray(self.g_n, dtype=complex).copy()
        if g.shape != (self.n_atoms,):
            raise InvalidInput(f"g_n must have shape ({self.n_atoms},)")
        v = np.asarray(self.v_nm, dtype=float).copy()
        if v.shape != (self.n_atoms, self.n_atoms):
            raise InvalidInput(f"v_nm must have shape ({self.n_atoms}, {self.n_atoms})")
        if not np.allclose(v, v.T) or np.any(np.diag(v) != 0.0):
            raise InvalidInput("v_nm must be symmetric with zero diagonal")
        dim = (3**self.n_atoms) * (self.fock_cutoff + 1)
        if dim > MAX_DIM:
            raise DimensionExceeded(f"dense dimension {dim} exceeds the cap {MAX_DIM}")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "g_n", g)
        object.__setattr__(self, "v_nm", v)

    @classmethod
    def uniform(cls, n_atoms: int, g0: float, v: float, fock_cutoff: int = 1) -> "FullSystemSpec":
        vm = np.full((n_atoms, n_atoms), float(v))
        np.fill_diagonal(vm, 0.0)
        return cls(n_atoms, np.full(n_atoms, complex(g0)), vm, fock_cutoff)


def _digits(code: int, base: int, width: int) -> list[int]:
    return [(code // base**k) % base for k in range(width)]


def build_hamiltonian(spec: FullSystemSpec, p: PhysicalParams) -> np.ndarray:
    """Dense multi-atom Hamiltonian (levels g/e/r per atom, truncated photon mode).

    Couplings carry the -i*g_n photon-exchange phase; pair interactions sit on
    doubly-Rydberg diagonal entries.
    """
    n, mph = spec.n_atoms, spec.fock_cutoff + 1
    dim = (3**n) * mph
    H = np.zeros((dim, dim), complex)
    om = p.omega_rabi
    for a in range(3**n):
        dg = _digits(a, 3, n)
        diag = 0.0
        for q in dg:
            if q == 1:
                diag += -p.delta_e
            elif q == 2:
                diag += -p.delta_r
        for i in range(n):
            for j in range(i + 1, n):
                if dg[i] == 2 and dg[j] == 2:
                    diag += spec.v_nm[i, j]
        for nph in range(mph):
            idx = a * mph + nph
            H[idx, idx] += diag
            for k in range(n):
                if dg[k] == 1:
                    # control drive, -Omega/2 |r><e| + h.c.
                    a2 = a + 3**k
                    H[a2 * mph + nph, idx] += -om / 2
                    H[idx, a2 * mph + nph] += -om.conjugate() / 2
                if dg[k] == 0 and nph >= 1:
                    # photon exchange, -i g_k sqrt(n) |e><g| + h.c.
                    a2 = a + 3**k
                    amp = -1j * spec.g_n[k] * math.sqrt(nph)
                    H[a2 * mph + (nph - 1), idx] += amp
                    H[idx, a2 * mph + (nph - 1)] += amp.conjugate()
    return H


def build_gate_hamiltonian(
    spec: FullSystemSpec, p: PhysicalParams, v_n: np.ndarray
) -> np.ndarray:
    """Dense gate Hamiltonian: ensemble levels g/e/r/p, qubit levels r'/p'.

    ``v_n[k]`` couples the pair state (r_k, r') to (p_k, p'); the pair states
    (p_k, p') carry the small energy penalty ``delta_p``.
    """
    n, mph = spec.n_atoms, spec.fock_cutoff + 1
    v_n = np.asarray(v_n, dtype=complex)
    if v_n.shape != (n,):
        raise InvalidInput(f"v_n must have shape ({n},)")
    dim = (4**n) * 2 * mph
    if dim > MAX_GATE_DIM:
        raise DimensionExceeded(f"gate dense dimension {dim} exceeds the cap {MAX_GATE_DIM}")
    H = np.zeros((dim, dim), complex)
    om = p.omega_rabi

    def idx(a: int, q: int, nph: int) -> int:
        return (a * 2 + q) * mph + nph

    for a in range(4**n):
        dg = _digits(a, 4, n)
        for q in (0, 1):  # 0 = r', 1 = p'
            diag = 0.0
            for d in dg:
                if d == 1:
                    diag += -p.delta_e
                elif d == 2:
                    diag += -p.delta_r
            for k in range(n):
                if dg[k] == 3 and q == 1:
                    diag += p.delta_p
            for nph in range(mph):
                i0 = idx(a, q, nph)
                H[i0, i0] += diag
                for k in range(n):
                    if dg[k] == 1:
                        a2 = a + 4**k  # e -> r
                        H[idx(a2, q, nph), i0] += -om / 2
                        H[i0, idx(a2, q, nph)] += -om.conjugate() / 2
                    if dg[k] == 0 and nph >= 1:
                        a2 = a + 4**k  # g -> e, one photon absorbed
                        amp = -1j * spec.g_n[k] * math.sqrt(nph)
                        H[idx(a2, q, nph - 1), i0] += amp
                        H[i0, idx(a2, q, nph - 1)] += amp.conjugate()
                    if dg[k] == 3 and q == 1:
                        # exchange channel: (p_k, p') -> (r_k, r')
                        a2 = a - 4**k  # p -> r
                        H[idx(a2, 0, nph), i0] += v_n[k]
                        H[i0, idx(a2, 0, nph)] += v_n[k].conjugate()
    return H


def evolve_dense(
    H: np.ndarray, state0: np.ndarray, t_end: float, dt: float, method: str = "expm"
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate a dense state vector; returns (times, states).

    ``expm`` builds the exact one-step propagator once (works for stiff pair
    interactions); ``rk4`` is the fixed-step alternative with a step check.
    For Hermitian H the norm must stay within 1e-8 of its initial value.
    """
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise InvalidInput("t_end must cover at least one step")
    psi = np.asarray(state0, dtype=complex).copy()
    hermitian = np.allclose(H, H.conj().T, atol=1e-12)
    out = np.empty((n_steps + 1, psi.size), complex)
    out[0] = psi
    if method == "expm":
        U = expm(-1j * H * dt)
        for s in range(n_steps):
            psi = U @ psi
            out[s + 1] = psi
    elif method == "rk4":
        hnorm = float(np.linalg.norm(H, 2))
        if hnorm > 0 and dt > TWO_PI / (50.0 * hnorm):
            from .errors import StepSizeTooLarge

            raise StepSizeTooLarge(
                f"dt={dt} too coarse for ||H||={hnorm:.3g}; need dt <= {TWO_PI/(50*hnorm):.3e}"
            )
        for s in range(n_steps):
            k1 = -1j * (H @ psi)
            k2 = -1j * (H @ (psi + 0.5 * dt * k1))
            k3 = -1j * (H @ (psi + 0.5 * dt * k2))
            k4 = -1j * (H @ (psi + dt * k3))
            psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            out[s + 1] = psi
    else:
        raise InvalidInput(f"unknown method {method!r}")
    if hermitian:
        drift = abs(np.linalg.norm(out[-1]) - np.linalg.norm(out[0]))
        if drift > 1e-8:
            raise TraceError(f"norm drifted by {drift:.3e} under Hermitian evolution")
    times = np.arange(n_steps + 1) * dt
    return times, out


def _lindblad_rhs(H: np.ndarray, rho: np.ndarray, cops: list[np.ndarray]) -> np.ndarray:
    d = -1j * (H @ rho - rho @ H)
    for c in cops:
        cd = c.conj().T
        cdc = cd @ c
        d += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return d


def lindblad_evolve(
    H: np.ndarray,
    collapse_ops: list[np.ndarray],
    rho0: np.ndarray,
    t_end: float,
    dt: float,
    record_every: int = 1,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """RK4 master-equation solve; trace and positivity are monitored on samples."""
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise InvalidInput("t_end must cover at least one step")
    rho = np.asarray(rho0, dtype=complex).copy()
    tr0 = float(np.trace(rho).real)
    rhos = [rho.copy()]
    times = [0.0]
    for s in range(n_steps):
        k1 = _lindblad_rhs(H, rho, collapse_ops)
        k2 = _lindblad_rhs(H, rho + 0.5 * dt * k1, collapse_ops)
        k3 = _lindblad_rhs(H, rho + 0.5 * dt * k2, collapse_ops)
        k4 = _lindblad_rhs(H, rho + dt * k3, collapse_ops)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (s + 1) % record_every == 0:
            drift = abs(float(np.trace(rho).real) - tr0)
            if not drift <= _TRACE_TOL:  # catches NaN as well
                raise TraceError(f"trace drifted by {drift:.3e} at t={(s+1)*dt:.4g}")
            lam_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
            if not lam_min >= _EIG_FLOOR:
                raise TraceError(f"positivity violated: min eigenvalue {lam_min:.3e}")
            rhos.append(rho.copy())
            times.append((s + 1) * dt)
    return np.array(times), rhos


# --- collective-ladder oracle (independent route for the trajectory engine) --

def ladder_hamiltonian(p: PhysicalParams, cutoff: int) -> np.ndarray:
    """Photon-ladder Hamiltonian on the basis (branch b/e/r) x (0..cutoff)."""
    m = cutoff + 1
    H = np.zeros((3 * m, 3 * m), complex)
    om = p.omega_rabi
    for n in range(m):
        if n >= 1:
            H[0 * m + n, 1 * m + n - 1] = 1j * math.sqrt(n) * p.g_collective
            H[1 * m + n - 1, 0 * m + n] = -1j * math.sqrt(n) * p.g_collective
        H[1 * m + n, 2 * m + n] = -om.conjugate() / 2
        H[2 * m + n, 1 * m + n] = -om / 2
        H[1 * m + n, 1 * m + n] = -p.delta_e
        H[2 * m + n, 2 * m + n] = -p.delta_r
    return H


def ladder_collapse_ops(p: PhysicalParams, cutoff: int) -> list[np.ndarray]:
    """Collapse operators matching the quantum-jump prescription."""
    m = cutoff + 1
    ops = []
    if p.gamma_e > 0:
        L = np.zeros((3 * m, 3 * m), complex)
        for n in range(m):
            L[0 * m + n, 1 * m + n] = 1.0
        ops.append(math.sqrt(p.gamma_e) * L)
    if p.gamma_r > 0:
        L = np.zeros((3 * m, 3 * m), complex)
        for n in range(m):
            L[0 * m + n, 2 * m + n] = 1.0
        ops.append(math.sqrt(p.gamma_r) * L)
    if p.kappa > 0:
        L = np.zeros((3 * m, 3 * m), complex)
        for br in range(3):
            for n in range(1, m):
                L[br * m + n - 1, br * m + n] = math.sqrt(n)
        ops.append(math.sqrt(p.kappa) * L)
    return ops


def ladder_observables(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of the photon-number and Rydberg-population operators."""
    m = cutoff + 1
    nvec = np.arange(m, dtype=float)
    photon = np.concatenate([nvec, nvec, nvec])
    ryd = np.zeros(3 * m)
    ryd[2 * m :] = 1.0
    return photon, ryd


def ladder_state_vector(state) -> np.ndarray:
    return np.concatenate([state.c_b, state.c_e, state.c_r]).astype(complex)


# --- weak-probe steady-state reflection --------------------------------------

def weak_probe_reflection_unblocked(
    spec: FullSystemSpec, p: PhysicalParams, delta: float
) -> complex:
    """Steady-state reflection of a weak probe, no stored qubit excitation.

    Built by slicing the one-excitation sector out of the dense multi-atom
    Hamiltonian (pair interactions off) and solving the driven linear system
    in the probe rotating frame.
    """
    n = spec.n_atoms
    mph = spec.fock_cutoff + 1
    if spec.fock_cutoff < 1:
        raise InvalidInput("need fock_cutoff >= 1 for one photon")
    spec0 = FullSystemSpec(n, spec.g_n, np.zeros((n, n)), spec.fock_cutoff)
    H = build_hamiltonian(spec0, p)
    idx = [1]  # all ground, one photon
    rates = [p.kappa]
    for k in range(n):
        idx.append((3**k) * mph)
        rates.append(p.gamma_e)
    for k in range(n):
        idx.append((2 * 3**k) * mph)
        rates.append(p.gamma_r)
    return _solve_reflection(H, idx, rates, p.kappa, delta)


def weak_probe_reflection_blocked(
    spec: FullSystemSpec, p: PhysicalParams, v_n: np.ndarray, delta: float
) -> complex:
    """Steady-state weak-probe reflection with the qubit excitation stored."""
    n = spec.n_atoms
    mph = spec.fock_cutoff + 1
    if spec.fock_cutoff < 1:
        raise InvalidInput("need fock_cutoff >= 1 for one photon")
    H = build_gate_hamiltonian(spec, p, v_n)

    def idx(a: int, q: int, nph: int) -> int:
        return (a * 2 + q) * mph + nph

    indices = [idx(0, 0, 1)]  # all ground, qubit stored, one photon
    rates = [p.kappa]
    for k in range(n):
        indices.append(idx(4**k, 0, 0))  # e_k
        rates.append(p.gamma_e)
    for k in range(n):
        indices.append(idx(2 * 4**k, 0, 0))  # r_k with qubit stored
        rates.append(p.gamma_r)
    for k in range(n):
        indices.append(idx(3 * 4**k, 1, 0))  # exchange pair (p_k, p')
        rates.append(p.gamma_p)
    return _solve_reflection(H, indices, rates, p.kappa, delta)


def _solve_reflection(
    H: np.ndarray, indices: list[int], rates: list[float], kappa: float, delta: float
) -> complex:
    block = H[np.ix_(indices, indices)].astype(complex)
    # probe rotating frame: every one-excitation state shifts by -delta
    block -= delta * np.eye(len(indices))
    block -= 0.5j * np.diag(np.asarray(rates, dtype=float))
    eps = 1e-3 * kappa if kappa > 0 else 1e-3
    rhs = np.zeros(len(indices), complex)
    rhs[0] = eps
    amps = np.linalg.solve(1j * block, rhs)
    return complex(1.0 - kappa * amps[0] / eps)


# --- packaged validation suite ------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "documented-deviation"
    detail: str

    @property
    def failed(self) -> bool:
        return self.status == "fail"


def _check(name: str, ok: bool, detail: str) -> CheckResult:
    return CheckResult(name, "pass" if ok else "fail", detail)


def run_oracle_checks(quick: bool = False) -> list[CheckResult]:
    """Cross-validate the reduced models against the dense ones.

    ``quick`` trims evolution times so the suite stays interactive.
    """
    from . import gate, mcwf

    results: list[CheckResult] = []
    t_long = 2.0 if quick else 10.0

    # Hermiticity of randomly drawn dense models
    rng = np.random.default_rng(7)
    ok = True
    for _ in range(3):
        n = int(rng.integers(1, 4))
        v = rng.normal(size=(n, n))
        v = 0.5 * (v + v.T) * angular(50)
        np.fill_diagonal(v, 0.0)
        spec = FullSystemSpec(n, rng.normal(size=n) + 1j * rng.normal(size=n), v, 2)
        p = PhysicalParams(
            omega_rabi=angular(3) * np.exp(0.7j),
            g_collective=collective_norm(spec.g_n),
            delta_e=angular(11),
            delta_r=angular(-2),
        )
        H = build_hamiltonian(spec, p)
        ok &= bool(np.allclose(H, H.conj().T))
    results.append(_check("hermiticity", ok, "3 random dense models"))

    # single-atom dense model vs the three-amplitude dynamics, closed system
    p1 = PhysicalParams(
        omega_rabi=angular(10), g_collective=angular(5), delta_e=angular(200), delta_r=0.0
    )
    spec1 = FullSystemSpec.uniform(1, angular(5), 0.0, fock_cutoff=1)
    H1 = build_hamiltonian(spec1, p1)
    psi0 = np.zeros(6, complex)
    psi0[1] = 1.0  # ground, one photon
    times, states = evolve_dense(H1, psi0, t_long, 0.01)
    traj = integrate(SingleExcState(1.0, 0.0, 0.0), p1, t_long, dt=1e-4, record_every=100)
    pb = np.abs(states[:, 1]) ** 2
    pe = np.abs(states[:, 1 * 2 + 0]) ** 2
    pr = np.abs(states[:, 2 * 2 + 0]) ** 2
    d = max(
        np.max(np.abs(pb - traj.pop_b)),
        np.max(np.abs(pe - traj.pop_e)),
        np.max(np.abs(pr - traj.pop_r)),
    )
    # the dense propagator is exact, the reduced RK4 path carries ~1e-5 of
    # discretization at this detuning; anything above 1e-4 is a model error
    results.append(_check("single-atom-reduction", d < 1e-4, f"max pop diff {d:.2e}"))

    # collective enhancement: N atoms at g0 behave as one emitter at sqrt(N)*g0
    for n in (2, 3, 4):
        g0 = angular(10) / math.sqrt(n)
        pN = PhysicalParams(
            omega_rabi=angular(20),
            g_collective=angular(10),
            delta_e=angular(200),
            delta_r=0.0,
        )
        specN = FullSystemSpec.uniform(n, g0, angular(1e6), fock_cutoff=1)
        HN = build_hamiltonian(specN, pN)
        mph = 2
        psi0 = np.zeros(HN.shape[0], complex)
        psi0[1] = 1.0
        times, states = evolve_dense(HN, psi0, t_long, 0.01)
        traj = integrate(SingleExcState(1.0, 0.0, 0.0), pN, t_long, dt=1e-4, record_every=100)
        pb = np.abs(states[:, 1]) ** 2
        pe = np.zeros_like(pb)
        pr = np.zeros_like(pb)
        for k in range(n):
            pe += np.abs(states[:, (3**k) * mph]) ** 2
            pr += np.abs(states[:, (2 * 3**k) * mph]) ** 2
        d = max(
            np.max(np.abs(pb - traj.pop_b)),
            np.max(np.abs(pe - traj.pop_e)),
            np.max(np.abs(pr - traj.pop_r)),
        )
        results.append(_check(f"collective-enhancement-N{n}", d < 1e-3, f"max pop diff {d:.2e}"))

    # adiabatic elimination at large detuning
    pa = PhysicalParams(
        omega_rabi=angular(10), g_collective=angular(5), delta_e=angular(200), delta_r=0.0
    )
    speca = FullSystemSpec.uniform(1, angular(5), 0.0, fock_cutoff=1)
    Ha = build_hamiltonian(speca, pa)
    psi0 = np.zeros(6, complex)
    psi0[1] = 1.0
    times, states = evolve_dense(Ha, psi0, t_long, 0.01)
    traj = integrate(SingleExcState(1.0, 0.0, 0.0), pa, t_long, dt=1e-4, model="adiabatic", record_every=100)
    d = max(
        np.max(np.abs(np.abs(states[:, 1]) ** 2 - traj.pop_b)),
        np.max(np.abs(np.abs(states[:, 2 * 2]) ** 2 - traj.pop_r)),
    )
    results.append(_check("adiabatic-elimination", d < 0.02, f"max pop diff {d:.2e}"))

    # master equation: pure cavity decay of a two-photon Fock state
    pk = PhysicalParams(kappa=angular(0.5))
    Hk = ladder_hamiltonian(pk, 2)
    cops = ladder_collapse_ops(pk, 2)
    rho0 = np.zeros((9, 9), complex)
    rho0[2, 2] = 1.0  # b-branch, two photons
    tms, rhos = lindblad_evolve(Hk, cops, rho0, 2.0, 1e-3, record_every=100)
    photon, _ = ladder_observables(2)
    nbar = np.array([float(np.real(np.sum(np.diag(r) * photon))) for r in rhos])
    d = float(np.max(np.abs(nbar - 2.0 * np.exp(-pk.kappa * tms))))
    results.append(_check("fock-decay", d < 1e-6, f"max |<n> - 2 exp(-kt)| {d:.2e}"))

    # trajectory engine vs master equation on a small ladder
    pm = PhysicalParams(
        omega_rabi=angular(2),
        g_collective=angular(1),
        delta_e=angular(5),
        gamma_e=angular(0.2),
        gamma_r=angular(0.05),
        kappa=angular(0.3),
    )
    cut = 3
    st0 = mcwf.coherent_ladder(0.8, cut, tail_tol=1e-2)
    res = mcwf.ensemble_average(st0, pm, 3.0, 1e-3, 600, master_seed=11)
    Hm = ladder_hamiltonian(pm, cut)
    copsm = ladder_collapse_ops(pm, cut)
    psi0 = ladder_state_vector(st0)
    tms, rhos = lindblad_evolve(Hm, copsm, np.outer(psi0, psi0.conj()), 3.0, 1e-3, record_every=10)
    photon, ryd = ladder_observables(cut)
    l_ph = np.array([float(np.real(np.sum(np.diag(r) * photon))) for r in rhos])
    l_ry = np.array([float(np.real(np.sum(np.diag(r) * ryd))) for r in rhos])
    zp = np.abs(res.mean_photon - l_ph) / np.maximum(res.stderr_photon, 1e-9)
    zr = np.abs(res.rydberg_pop - l_ry) / np.maximum(res.stderr_rydberg, 1e-9)
    z = max(float(zp.max()), float(zr.max()))
    results.append(_check("trajectories-vs-master-equation", z < 4.0, f"max z-score {z:.2f}"))

    # weak-probe reflection vs the closed-form coefficients at N=2
    p2 = PhysicalParams(
        omega_rabi=angular(100),
        g_collective=angular(5) * math.sqrt(2),
        g_single=angular(5),
        delta_e=angular(1000),
        delta_r=0.0,
        gamma_e=angular(1),
        gamma_r=angular(0.01),
        gamma_p=angular(0.01),
        kappa=angular(1),
        n_atoms=2,
    )
    p2 = gate.auto_two_photon_resonance(p2)
    spec2 = FullSystemSpec.uniform(2, angular(5), 0.0, fock_cutoff=1)
    v2 = np.array([angular(300), angular(200)], complex)
    r_dense_b = weak_probe_reflection_blocked(spec2, p2, v2, 0.0)
    r_dense_u = weak_probe_reflection_unblocked(spec2, p2, 0.0)
    r_form_b = gate.reflection_blocked_from_couplings(p2, 0.0, np.full(2, angular(5)), v2)
    r_form_u = gate.reflection_unblocked(p2, 0.0)
    db = abs(r_dense_b - r_form_b)
    du = abs(r_dense_u - r_form_u)
    results.append(
        _check("weak-probe-reflection-N2", db < 0.01 and du < 0.01, f"|dR| blocked {db:.2e}, unblocked {du:.2e}")
    )

    # exchange-channel doublet
    pd = PhysicalParams(delta_p=0.0)
    specd = FullSystemSpec.uniform(1, 0.0, 0.0, fock_cutoff=1)
    vd = angular(50)
    Hd = build_gate_hamiltonian(specd, pd, np.array([vd]))
    evals = np.linalg.eigvalsh(Hd)
    split = float(evals.max() - evals.min())
    results.append(
        _check("exchange-doublet", abs(split - 2 * vd) < 1e-9 * vd, f"splitting {split:.6g} vs {2*vd:.6g}")
    )

    # pair-interaction discrimination: with the interaction off, the dense
    # model leaks into doubly-Rydberg states absent from the reduced model
    pv = PhysicalParams(omega_rabi=angular(10), g_collective=angular(10) * math.sqrt(2))
    specv0 = FullSystemSpec.uniform(2, angular(10), 0.0, fock_cutoff=2)
    specvb = FullSystemSpec.uniform(2, angular(10), angular(1e5), fock_cutoff=2)
    mph = 3
    psi0 = np.zeros((3**2) * mph, complex)
    psi0[2] = 1.0  # all ground, two photons
    rr = 2 + 2 * 3  # both atoms Rydberg
    prr = []
    for specv in (specv0, specvb):
        Hv = build_hamiltonian(specv, pv)
        _, states = evolve_dense(Hv, psi0, 1.0, 0.001)
        prr.append(float(np.max(np.sum(np.abs(states[:, rr * mph : rr * mph + mph]) ** 2, axis=1))))
    ratio = prr[0] / max(prr[1], 1e-300)
    if ratio > 1e3:
        results.append(
            CheckResult(
                "pair-interaction-discrimination",
                "documented-deviation",
                f"double-Rydberg weight {prr[0]:.2e} (off) vs {prr[1]:.2e} (strong): "
                "reduced single-excitation model is valid only under strong blockade",
            )
        )
    else:
        results.append(_check("pair-interaction-discrimination", False, f"ratio {ratio:.2e} <= 1e3"))

    return results


def collective_norm(g_n: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(g_n) ** 2)))
