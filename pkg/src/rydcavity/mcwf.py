"""Monte-Carlo wave-function engine on the photon-number ladder.

Jump conventions (see also the compiled kernel):

* intermediate-state emission resets the atoms to ground and carries the
  photon ladder over unchanged (``c_b <- c_e``, everything else discarded);
* Rydberg emission is the analogous ``c_b <- c_r`` transfer;
* cavity emission applies the photon annihilation operator across all three
  internal branches (``c_x[n] <- sqrt(n+1) * c_x[n+1]``).

Every step ends with renormalization to unit norm.  Trajectories are seeded
from a master seed through ``numpy.random.SeedSequence(master_seed,
spawn_key=(i,))`` so ensembles are reproducible bit for bit for any worker
count.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from . import _kernels
from .core import FockLadderState, PhysicalParams
from .errors import CutoffTooSmall, ImpossibleJump, InvalidInput, StepTooLarge

#: observables are recorded on this stride (us) unless overridden
DEFAULT_RECORD_INTERVAL = 0.01

#: trajectories per work unit; fixed so the reduction order never depends on
#: the worker count
_CHUNK = 32


class JumpKind(enum.Enum):
    GAMMA_E = "gamma_e"
    GAMMA_R = "gamma_r"
    KAPPA = "kappa"


_KIND_BY_CODE = {
    _kernels.JUMP_GAMMA_E: JumpKind.GAMMA_E,
    _kernels.JUMP_GAMMA_R: JumpKind.GAMMA_R,
    _kernels.JUMP_KAPPA: JumpKind.KAPPA,
}


@dataclass(frozen=True)
class JumpEvent:
    time: float
    kind: JumpKind


@dataclass(frozen=True)
class ObservableTrace:
    """Mean photon number and Rydberg population sampled along one trajectory."""

    times: np.ndarray = field(repr=False)
    mean_photon: np.ndarray = field(repr=False)
    rydberg_pop: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EnsembleResult:
    """Trajectory-averaged observables with standard errors."""

    times: np.ndarray = field(repr=False)
    mean_photon: np.ndarray = field(repr=False)
    stderr_photon: np.ndarray = field(repr=False)
    rydberg_pop: np.ndarray = field(repr=False)
    stderr_rydberg: np.ndarray = field(repr=False)
    n_traj: int = 0
    master_seed: int = 0

    def __post_init__(self):
        if np.any(self.mean_photon < -1e-12):
            raise InvalidInput("mean photon number must be nonnegative")
        if np.any(self.rydberg_pop < -1e-12) or np.any(self.rydberg_pop > 1 + 1e-9):
            raise InvalidInput("Rydberg population must lie in [0, 1]")

    def to_csv(self, path) -> None:
        header = "t_us,mean_photon,stderr_photon,rydberg_pop,stderr_rydberg"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for i, t in enumerate(self.times):
                row = (
                    float(t),
                    float(self.mean_photon[i]),
                    float(self.stderr_photon[i]),
                    float(self.rydberg_pop[i]),
                    float(self.stderr_rydberg[i]),
                )
                fh.write(",".join(repr(v) for v in row) + "\n")


def coherent_ladder(alpha: complex, cutoff: int, tail_tol: float = 1e-6) -> FockLadderState:
    """Coherent state truncated at ``cutoff``, renormalized after truncation.

    Raises :class:`CutoffTooSmall` when the discarded photon-number tail of
    the untruncated distribution exceeds ``tail_tol``.
    """
    if cutoff < 1:
        raise InvalidInput(f"cutoff must be >= 1, got {cutoff}")
    mean_n = abs(alpha) ** 2
    tail = float(poisson.sf(cutoff, mean_n)) if mean_n > 0 else 0.0
    if tail > tail_tol:
        raise CutoffTooSmall(
            f"cutoff {cutoff} keeps only 1-{tail:.3e} of the photon distribution "
            f"for |alpha|^2 = {mean_n:.3g} (tolerance {tail_tol:.1e})"
        )
    n = np.arange(cutoff + 1)
    if alpha == 0:
        c_b = np.zeros(cutoff + 1, complex)
        c_b[0] = 1.0
    else:
        log_mag = -0.5 * mean_n + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
        c_b = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
        c_b = c_b / math.sqrt(float(np.sum(np.abs(c_b) ** 2)))
    zeros = np.zeros(cutoff + 1, complex)
    return FockLadderState(cutoff, c_b, zeros.copy(), zeros.copy())


def eom_fock(
    state: FockLadderState, p: PhysicalParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unitary part of the ladder equations of motion (reference implementation).

    For n >= 1 the amplitudes (c_b[n], c_e[n-1], c_r[n-1]) form a closed loop;
    c_b[0] is constant under the Hamiltonian.
    """
    cb, ce, cr = state.c_b, state.c_e, state.c_r
    m = state.cutoff + 1
    sqn = np.sqrt(np.arange(m, dtype=float))
    om = p.omega_rabi
    db = np.zeros(m, complex)
    db[1:] = sqn[1:] * p.g_collective * ce[:-1]
    de = 0.5j * om.conjugate() * cr + 1j * p.delta_e * ce
    de[:-1] += -sqn[1:] * p.g_collective * cb[1:]
    dr = 0.5j * om * ce + 1j * p.delta_r * cr
    return db, de, dr


def jump_probabilities(
    state: FockLadderState, p: PhysicalParams, dt: float
) -> tuple[float, float, float]:
    """Per-step probabilities of the three jump channels.

    p_e = gamma_e*dt*sum|c_e|^2, p_r likewise, p_kappa = kappa*dt*<n>.
    """
    if dt <= 0:
        raise InvalidInput(f"dt must be positive, got {dt}")
    p_e = p.gamma_e * dt * float(np.sum(np.abs(state.c_e) ** 2))
    p_r = p.gamma_r * dt * float(np.sum(np.abs(state.c_r) ** 2))
    p_k = p.kappa * dt * state.mean_photon()
    if p_e + p_r + p_k >= _kernels.MAX_JUMP_PROB:
        raise StepTooLarge(
            f"total jump probability {p_e + p_r + p_k:.3g} per step exceeds "
            f"{_kernels.MAX_JUMP_PROB}; reduce dt"
        )
    return p_e, p_r, p_k


def apply_jump(state: FockLadderState, kind: JumpKind) -> FockLadderState:
    """Conditional state after one detected jump, renormalized to unit norm."""
    m = state.cutoff + 1
    zeros = np.zeros(m, complex)
    if kind is JumpKind.GAMMA_E:
        cb, ce, cr = state.c_e.copy(), zeros.copy(), zeros.copy()
    elif kind is JumpKind.GAMMA_R:
        cb, ce, cr = state.c_r.copy(), zeros.copy(), zeros.copy()
    elif kind is JumpKind.KAPPA:
        sqn = np.sqrt(np.arange(1, m, dtype=float))
        cb, ce, cr = zeros.copy(), zeros.copy(), zeros.copy()
        cb[:-1] = sqn * state.c_b[1:]
        ce[:-1] = sqn * state.c_e[1:]
        cr[:-1] = sqn * state.c_r[1:]
    else:
        raise InvalidInput(f"unknown jump kind {kind!r}")
    nrm = math.sqrt(float(np.sum(np.abs(cb) ** 2 + np.abs(ce) ** 2 + np.abs(cr) ** 2)))
    if nrm == 0.0:
        raise ImpossibleJump(f"jump {kind.value} applied to a state with no weight in that channel")
    return FockLadderState(state.cutoff, cb / nrm, ce / nrm, cr / nrm)


def _steps_and_stride(t_end: float, dt: float, record_every: int | None) -> tuple[int, int]:
    if dt <= 0:
        raise InvalidInput(f"dt must be positive, got {dt}")
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise InvalidInput("t_end must cover at least one step")
    if record_every is None:
        record_every = max(1, int(round(DEFAULT_RECORD_INTERVAL / dt)))
    if record_every < 1:
        raise InvalidInput("record_every must be >= 1")
    return n_steps, record_every


def _trajectory_arrays(
    state0: FockLadderState,
    p: PhysicalParams,
    n_steps: int,
    dt: float,
    record_every: int,
    uniforms: np.ndarray,
    jump_capacity: int,
):
    n_rec = n_steps // record_every + 1
    out_photon = np.zeros(n_rec)
    out_rydberg = np.zeros(n_rec)
    jump_times = np.zeros(jump_capacity)
    jump_kinds = np.zeros(jump_capacity, np.int64)
    cb = state0.c_b.astype(np.complex128).copy()
    ce = state0.c_e.astype(np.complex128).copy()
    cr = state0.c_r.astype(np.complex128).copy()
    status, n_jumps = _kernels.run_trajectory_kernel(
        cb,
        ce,
        cr,
        float(p.g_collective),
        complex(p.omega_rabi),
        float(p.delta_e),
        float(p.delta_r),
        float(p.gamma_e),
        float(p.gamma_r),
        float(p.kappa),
        float(dt),
        n_steps,
        uniforms,
        record_every,
        out_photon,
        out_rydberg,
        jump_times,
        jump_kinds,
    )
    if status == _kernels.STATUS_STEP_TOO_LARGE:
        raise StepTooLarge(
            f"total jump probability per step exceeded {_kernels.MAX_JUMP_PROB}; reduce dt"
        )
    if status == _kernels.STATUS_ZERO_NORM:
        raise ImpossibleJump("trajectory reached a zero-norm state")
    return out_photon, out_rydberg, jump_times, jump_kinds, n_jumps


def _trajectory_rng(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


def run_trajectory(
    state0: FockLadderState,
    p: PhysicalParams,
    t_end: float,
    dt: float,
    seed,
    record_every: int | None = None,
) -> tuple[ObservableTrace, list[JumpEvent]]:
    """Simulate one quantum trajectory; deterministic for a fixed seed."""
    n_steps, record_every = _steps_and_stride(t_end, dt, record_every)
    rng = _trajectory_rng(seed)
    uniforms = rng.random(n_steps)
    out_photon, out_rydberg, jt, jk, n_jumps = _trajectory_arrays(
        state0, p, n_steps, dt, record_every, uniforms, jump_capacity=n_steps
    )
    times = np.arange(out_photon.shape[0]) * (dt * record_every)
    events = [JumpEvent(float(jt[i]), _KIND_BY_CODE[int(jk[i])]) for i in range(n_jumps)]
    return ObservableTrace(times, out_photon, out_rydberg), events


def _child_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def _run_chunk(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Partial sums for trajectories [lo, hi); summed in index order."""
    (chunk_index, lo, hi, state0, p, t_end, dt, record_every, master_seed) = args
    n_steps, record_every = _steps_and_stride(t_end, dt, record_every)
    n_rec = n_steps // record_every + 1
    s1p = np.zeros(n_rec)
    s2p = np.zeros(n_rec)
    s1r = np.zeros(n_rec)
    s2r = np.zeros(n_rec)
    for i in range(lo, hi):
        rng = _trajectory_rng(_child_seed(master_seed, i))
        uniforms = rng.random(n_steps)
        ph, ry, _, _, _ = _trajectory_arrays(
            state0, p, n_steps, dt, record_every, uniforms, jump_capacity=0
        )
        s1p += ph
        s2p += ph * ph
        s1r += ry
        s2r += ry * ry
    return chunk_index, s1p, s2p, s1r, s2r


def _kahan_add(total: np.ndarray, comp: np.ndarray, term: np.ndarray) -> None:
    y = term - comp
    t = total + y
    comp[:] = (t - total) - y
    total[:] = t


def ensemble_average(
    state0: FockLadderState,
    p: PhysicalParams,
    t_end: float,
    dt: float,
    n_traj: int,
    master_seed: int,
    record_every: int | None = None,
    workers: int = 1,
) -> EnsembleResult:
    """Average observables over ``n_traj`` trajectories.

    Trajectory i always uses the stream ``SeedSequence(master_seed,
    spawn_key=(i,))`` and partial sums are combined in fixed chunk order with
    compensated summation, so the result is identical for any ``workers``.
    """
    if n_traj < 1:
        raise InvalidInput("n_traj must be >= 1")
    n_steps, record_every = _steps_and_stride(t_end, dt, record_every)
    n_rec = n_steps // record_every + 1

    chunks = [
        (ci, lo, min(lo + _CHUNK, n_traj), state0, p, t_end, dt, record_every, master_seed)
        for ci, lo in enumerate(range(0, n_traj, _CHUNK))
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, chunks))
    else:
        results = [_run_chunk(c) for c in chunks]
    results.sort(key=lambda r: r[0])

    s1p = np.zeros(n_rec); c1p = np.zeros(n_rec)
    s2p = np.zeros(n_rec); c2p = np.zeros(n_rec)
    s1r = np.zeros(n_rec); c1r = np.zeros(n_rec)
    s2r = np.zeros(n_rec); c2r = np.zeros(n_rec)
    for _, a, b, c, d in results:
        _kahan_add(s1p, c1p, a)
        _kahan_add(s2p, c2p, b)
        _kahan_add(s1r, c1r, c)
        _kahan_add(s2r, c2r, d)

    mean_ph = s1p / n_traj
    mean_ry = s1r / n_traj
    if n_traj > 1:
        var_ph = np.maximum(s2p - n_traj * mean_ph**2, 0.0) / (n_traj - 1)
        var_ry = np.maximum(s2r - n_traj * mean_ry**2, 0.0) / (n_traj - 1)
        se_ph = np.sqrt(var_ph / n_traj)
        se_ry = np.sqrt(var_ry / n_traj)
    else:
        se_ph = np.zeros(n_rec)
        se_ry = np.zeros(n_rec)
    times = np.arange(n_rec) * (dt * record_every)
    return EnsembleResult(
        times=times,
        mean_photon=mean_ph,
        stderr_photon=se_ph,
        rydberg_pop=mean_ry,
        stderr_rydberg=se_ry,
        n_traj=n_traj,
        master_seed=master_seed,
    )
