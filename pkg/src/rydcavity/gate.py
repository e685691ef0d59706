"""Conditional cavity reflection and controlled-phase gate figures of merit.

The gate is characterised entirely in the frequency domain: complex shifts
(ground-level light shift, dressed-coupling factor, dressed-state offset, and
per-atom exchange-induced blockade shift), the two conditional reflection
coefficients, and the average gate fidelity built from them.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .core import PhysicalParams, to_mhz, angular
from .errors import GeometryError, InvalidInput, SingularElimination, SingularResponse

#: reflection magnitudes may exceed 1 only by numerical rounding
REFLECTION_EPS = 1e-9

#: relative denominator size below which the response is reported as singular
_SINGULAR_REL = 1e-12


@dataclass(frozen=True)
class ForsterModel:
    """Dipole-dipole exchange coupling law V(r, theta) = c3 * f(theta) / r^3.

    ``c3`` is in angular MHz*um^3.  ``angular_factors`` is an optional table
    of (polar angle, factor) pairs, linearly interpolated; omitted means
    isotropic (f = 1).
    """

    c3: float
    angular_factors: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.c3 <= 0:
            raise InvalidInput(f"c3 must be positive, got {self.c3}")
        if self.angular_factors is not None:
            thetas = [t for t, _ in self.angular_factors]
            if len(thetas) < 2 or sorted(thetas) != thetas:
                raise InvalidInput("angular_factors must list >= 2 pairs with increasing angles")

    def factor(self, theta: np.ndarray) -> np.ndarray:
        if self.angular_factors is None:
            return np.ones_like(theta)
        ts = np.array([t for t, _ in self.angular_factors])
        fs = np.array([f for _, f in self.angular_factors])
        return np.interp(theta, ts, fs)


@dataclass(frozen=True)
class GateGeometry:
    """Lattice of ensemble atoms plus the qubit-atom position (um).

    ``v_m`` holds per-atom exchange couplings once a :class:`ForsterModel`
    has been applied; ``g_weights`` is an optional per-atom coupling profile
    (defaults to uniform).
    """

    dims: tuple[int, int, int]
    spacing: float
    qubit_position: np.ndarray = field(repr=False)
    atom_positions: np.ndarray = field(repr=False)
    v_m: np.ndarray | None = field(default=None, repr=False)
    g_weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        nx, ny, nz = self.dims
        pos = np.asarray(self.atom_positions, dtype=float)
        if pos.shape != (nx * ny * nz, 3):
            raise GeometryError(f"expected {nx*ny*nz} atom positions, got {pos.shape}")
        q = np.asarray(self.qubit_position, dtype=float).reshape(3)
        r = np.linalg.norm(pos - q, axis=1)
        if np.any(r == 0.0):
            raise GeometryError("qubit position coincides with a lattice site")
        for name in ("qubit_position", "atom_positions", "v_m", "g_weights"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def n_atoms(self) -> int:
        return self.atom_positions.shape[0]

    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.atom_positions - self.qubit_position, axis=1)

    def polar_angles(self) -> np.ndarray:
        d = self.atom_positions - self.qubit_position
        r = np.linalg.norm(d, axis=1)
        return np.arccos(np.clip(d[:, 2] / r, -1.0, 1.0))

    def with_forster(self, model: ForsterModel) -> "GateGeometry":
        return replace(self, v_m=forster_coupling(self, model))

    def to_csv(self, path) -> None:
        header = "x_um,y_um,z_um,r_um,v_abs_mhz"
        r = self.distances()
        v = self.v_m if self.v_m is not None else np.zeros(self.n_atoms)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for i in range(self.n_atoms):
                x, y, z = self.atom_positions[i]
                fh.write(
                    ",".join(repr(float(val)) for val in (x, y, z, r[i], to_mhz(abs(v[i])))) + "\n"
                )


def build_geometry(
    dims: tuple[int, int, int], spacing: float, qubit_offset_sites: float = 1.5
) -> GateGeometry:
    """Centered cubic lattice with the qubit atom above the top-layer center."""
    nx, ny, nz = dims
    if min(nx, ny, nz) < 1:
        raise GeometryError(f"lattice dims must be positive, got {dims}")
    if spacing <= 0:
        raise GeometryError(f"spacing must be positive, got {spacing}")
    ax = (np.arange(nx) - (nx - 1) / 2) * spacing
    ay = (np.arange(ny) - (ny - 1) / 2) * spacing
    az = (np.arange(nz) - (nz - 1) / 2) * spacing
    pts = np.array(list(itertools.product(ax, ay, az)))
    z_top = az.max()
    qubit = np.array([0.0, 0.0, z_top + qubit_offset_sites * spacing])
    return GateGeometry(dims=tuple(dims), spacing=float(spacing), qubit_position=qubit, atom_positions=pts)


def forster_coupling(geom: GateGeometry, model: ForsterModel) -> np.ndarray:
    """Per-atom exchange couplings V_m = c3 * f(theta_m) / r_m^3."""
    r = geom.distances()
    if np.any(r == 0.0):
        raise GeometryError("zero qubit-atom distance")
    return (model.c3 * model.factor(geom.polar_angles()) / r**3).astype(complex)


@dataclass(frozen=True)
class GateQuantities:
    """Complex shifts entering the reflection coefficients at one probe offset."""

    delta_ac: complex
    eta: complex
    delta_dr: complex
    b_m: np.ndarray = field(repr=False)

    def __post_init__(self):
        # ground-level light shift acquires a nonnegative imaginary part from
        # the intermediate linewidth; anything else signals a sign error
        if self.delta_ac.imag < -1e-12 * max(1.0, abs(self.delta_ac)):
            raise InvalidInput(f"Im(delta_ac) = {self.delta_ac.imag} must be >= 0")
        arr = np.asarray(self.b_m, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "b_m", arr)


def gate_quantities(
    p: PhysicalParams, delta: float, v_m: np.ndarray, b_sign: float = 1.0
) -> GateQuantities:
    """Evaluate the four frequency-domain shifts at probe offset ``delta``.

    ``b_sign`` flips the blockade shift for level schemes pulling the other
    way; the default keeps it positive-real on resonance.
    """
    den = p.delta_e + delta + 0.5j * p.gamma_e
    if den == 0:
        raise SingularElimination("delta_e + delta and gamma_e all vanish")
    g2 = p.g_collective**2
    om2 = abs(p.omega_rabi) ** 2
    delta_ac = -g2 / den
    eta = 0.25 * om2 / (1j * p.delta_e - 0.5 * p.gamma_e + 1j * delta) ** 2
    delta_dr = -p.delta_r - 0.25j * om2 / (0.5 * p.gamma_e - 1j * p.delta_e - 1j * delta)
    v_sq = np.abs(np.asarray(v_m, dtype=complex)) ** 2
    den_b = 0.5 * p.gamma_p + 1j * p.delta_p - 1j * delta
    if den_b == 0:
        if np.any(v_sq > 0):
            raise SingularResponse(
                f"blockade-shift denominator vanished at delta={delta}", delta
            )
        b_m = np.zeros_like(v_sq, dtype=complex)
    else:
        b_m = b_sign * v_sq / den_b
    return GateQuantities(delta_ac=delta_ac, eta=eta, delta_dr=delta_dr, b_m=b_m)


def _per_atom_couplings(p: PhysicalParams, geom: GateGeometry) -> np.ndarray:
    if geom.g_weights is not None:
        return np.asarray(geom.g_weights, dtype=float)
    if p.g_single is None:
        raise InvalidInput("blocked reflection needs p.g_single or geometry g_weights")
    return np.full(geom.n_atoms, p.g_single)


def reflection_unblocked(p: PhysicalParams, delta: float) -> complex:
    """Cavity reflection with no stored qubit excitation (collective channel open)."""
    q = gate_quantities(p, delta, np.zeros(1))
    r_den = 0.5 * p.gamma_r - 1j * delta + 1j * q.delta_dr
    g2 = p.g_collective**2
    if g2 == 0:
        collective = 0.0
    else:
        if abs(r_den) < _SINGULAR_REL * max(abs(q.delta_dr), abs(delta), p.gamma_r, 1.0):
            raise SingularResponse(f"dressed-channel denominator vanished at delta={delta}", delta)
        collective = q.eta * g2 / r_den
    den = 0.5 * p.kappa - 1j * delta - 1j * q.delta_ac - collective
    if abs(den) < _SINGULAR_REL * max(p.kappa, abs(delta), abs(q.delta_ac), 1.0):
        raise SingularResponse(f"reflection denominator vanished at delta={delta}", delta)
    return 1.0 - p.kappa / den


def reflection_blocked_from_couplings(
    p: PhysicalParams, delta: float, g_m: np.ndarray, v_m: np.ndarray, b_sign: float = 1.0
) -> complex:
    """Blocked-channel reflection from explicit per-atom couplings and shifts."""
    q = gate_quantities(p, delta, v_m, b_sign)
    r_den = 0.5 * p.gamma_r - 1j * delta + 1j * q.delta_dr + q.b_m
    scale = max(abs(q.delta_dr), abs(delta), p.gamma_r, float(np.max(np.abs(q.b_m))), 1.0)
    if np.any(np.abs(r_den) < _SINGULAR_REL * scale):
        raise SingularResponse(f"a per-atom denominator vanished at delta={delta}", delta)
    s = complex(np.sum(np.abs(np.asarray(g_m)) ** 2 / r_den))
    den = 0.5 * p.kappa - 1j * delta - 1j * q.delta_ac - q.eta * s
    if abs(den) < _SINGULAR_REL * max(p.kappa, abs(delta), abs(q.delta_ac), 1.0):
        raise SingularResponse(f"reflection denominator vanished at delta={delta}", delta)
    return 1.0 - p.kappa / den


def reflection_blocked(
    p: PhysicalParams, delta: float, geom: GateGeometry, b_sign: float = 1.0
) -> complex:
    """Cavity reflection with the qubit excitation stored (blockade active)."""
    if geom.v_m is None:
        raise InvalidInput("geometry carries no exchange couplings; apply a ForsterModel first")
    return reflection_blocked_from_couplings(p, delta, _per_atom_couplings(p, geom), geom.v_m, b_sign)


def fidelity(r_unblocked: complex, r_blocked: complex) -> float:
    """Average conditional-phase gate fidelity |2 + R_open - R_blocked|^2 / 16."""
    for name, r in (("r_unblocked", r_unblocked), ("r_blocked", r_blocked)):
        if abs(r) > 1.0 + REFLECTION_EPS:
            raise InvalidInput(f"{name} has |R| = {abs(r)} > 1; not a passive reflection")
    return abs(2.0 + r_unblocked - r_blocked) ** 2 / 16.0


def two_photon_resonance_shift(p: PhysicalParams, delta: float = 0.0) -> float:
    """Rydberg detuning that zeroes the real dressed-state offset at ``delta``."""
    q = gate_quantities(p.replace(delta_r=0.0), delta, np.zeros(1))
    return float(q.delta_dr.real)


def auto_two_photon_resonance(
    p: PhysicalParams,
    delta: float = 0.0,
    refine: bool = False,
    geom: GateGeometry | None = None,
    b_sign: float = 1.0,
) -> PhysicalParams:
    """Return params with ``delta_r`` set on two-photon resonance.

    The analytic value zeroes Re(dressed-state offset).  With ``refine`` the
    fidelity at the probe offset is additionally maximized over ``delta_r`` by
    a bounded scalar search (using the supplied geometry for the blocked
    channel, or its infinite-blockade limit when none is given); if the search
    fails the analytic value is kept and a warning emitted.
    """
    dr0 = two_photon_resonance_shift(p, delta)
    out = p.replace(delta_r=dr0)
    if not refine:
        return out

    def objective(dr: float) -> float:
        trial = p.replace(delta_r=dr)
        try:
            ru = reflection_unblocked(trial, delta)
            if geom is not None:
                rb = reflection_blocked(trial, delta, geom, b_sign)
            else:
                q = gate_quantities(trial, delta, np.zeros(1))
                rb = 1.0 - trial.kappa / (0.5 * trial.kappa - 1j * delta - 1j * q.delta_ac)
            return -fidelity(ru, rb)
        except (SingularResponse, InvalidInput):
            return 0.0

    width = 5.0 * max(p.kappa, p.gamma_r, abs(dr0) * 1e-3, angular(0.1))
    res = minimize_scalar(
        objective, bounds=(dr0 - width, dr0 + width), method="bounded", options={"xatol": 1e-12}
    )
    f_analytic = -objective(dr0)
    f_refined = -res.fun if res.success else -1.0
    if f_refined < f_analytic:
        # ties and rounding-level losses fall back silently; a real search
        # failure is worth a warning
        if f_refined < f_analytic - 1e-9 * max(f_analytic, 1e-12):
            warnings.warn(
                "delta_r refinement failed to improve on the analytic value", stacklevel=2
            )
        return out
    return p.replace(delta_r=float(res.x))


# --- parameter scans ---------------------------------------------------------

#: scan axes understood by :func:`scan`; values are MHz in the table
SCAN_AXES = ("g0", "omega", "delta_e", "delta_r", "kappa", "gamma_e", "gamma_r", "gamma_p", "delta_p", "delta")


@dataclass(frozen=True)
class ScanAxis:
    name: str
    values_mhz: tuple[float, ...]

    def __post_init__(self):
        if self.name not in SCAN_AXES:
            raise InvalidInput(f"unknown scan axis {self.name!r}; expected one of {SCAN_AXES}")
        if len(self.values_mhz) < 1:
            raise InvalidInput("scan axis needs at least one value")


@dataclass(frozen=True)
class ScanSpec:
    """Grid scan description: axes sweep params, the geometry stays fixed."""

    base: PhysicalParams
    axes: tuple[ScanAxis, ...]
    geometry: GateGeometry
    delta: float = 0.0
    delta_r_mode: str = "auto"  # auto | auto-analytic | fixed
    b_sign: float = 1.0

    def __post_init__(self):
        if not self.axes:
            raise InvalidInput("scan needs at least one axis")
        if self.delta_r_mode not in ("auto", "auto-analytic", "fixed"):
            raise InvalidInput(f"unknown delta_r_mode {self.delta_r_mode!r}")
        if self.geometry.v_m is None:
            raise InvalidInput("scan geometry carries no exchange couplings")


@dataclass(frozen=True)
class ScanTable:
    axis_names: tuple[str, ...]
    rows: tuple[tuple, ...]  # axis values (MHz), R_unblocked, R_blocked, F_z, status

    def header(self) -> str:
        return ",".join(
            list(self.axis_names)
            + ["re_R_unblocked", "im_R_unblocked", "re_R_blocked", "im_R_blocked", "F_z", "status"]
        )

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.header() + "\n")
            for row in self.rows:
                *axes, ru, rb, fz, status = row
                fields = [repr(float(a)) for a in axes]
                fields += [
                    repr(float(ru.real)),
                    repr(float(ru.imag)),
                    repr(float(rb.real)),
                    repr(float(rb.imag)),
                    repr(float(fz)),
                ]
                fields.append(status)
                fh.write(",".join(fields) + "\n")

    def column(self, name: str) -> np.ndarray:
        names = list(self.axis_names) + ["re_R_unblocked", "im_R_unblocked", "re_R_blocked", "im_R_blocked", "F_z"]
        if name == "F_z":
            return np.array([row[-2] for row in self.rows])
        i = names.index(name)
        if i < len(self.axis_names):
            return np.array([row[i] for row in self.rows])
        ru = np.array([row[-4] for row in self.rows])
        rb = np.array([row[-3] for row in self.rows])
        return {
            "re_R_unblocked": ru.real,
            "im_R_unblocked": ru.imag,
            "re_R_blocked": rb.real,
            "im_R_blocked": rb.imag,
        }[name]


def _apply_axis(p: PhysicalParams, geom: GateGeometry, name: str, value_mhz: float, delta: float):
    w = angular(value_mhz)
    if name == "g0":
        return p.replace(g_single=w, g_collective=w * math.sqrt(geom.n_atoms), n_atoms=geom.n_atoms), delta
    if name == "omega":
        phase = np.angle(p.omega_rabi) if p.omega_rabi != 0 else 0.0
        return p.replace(omega_rabi=w * np.exp(1j * phase)), delta
    if name == "delta":
        return p, w
    return p.replace(**{name: w}), delta


def scan(spec: ScanSpec) -> ScanTable:
    """Evaluate both reflection coefficients and the fidelity on the grid.

    Singular grid points are recorded with a status flag and the scan
    continues; row order follows the axis product order.
    """
    axis_names = tuple(ax.name for ax in spec.axes)
    rows = []
    for combo in itertools.product(*(ax.values_mhz for ax in spec.axes)):
        p = spec.base
        delta = spec.delta
        for name, value in zip(axis_names, combo):
            p, delta = _apply_axis(p, spec.geometry, name, value, delta)
        if p.g_single is None:
            p = p.replace(
                g_single=p.g_collective / math.sqrt(spec.geometry.n_atoms),
                n_atoms=spec.geometry.n_atoms,
            )
        try:
            if spec.delta_r_mode == "auto" and "delta_r" not in axis_names:
                p = auto_two_photon_resonance(p, delta, refine=True, geom=spec.geometry, b_sign=spec.b_sign)
            elif spec.delta_r_mode == "auto-analytic" and "delta_r" not in axis_names:
                p = auto_two_photon_resonance(p, delta)
            ru = reflection_unblocked(p, delta)
            rb = reflection_blocked(p, delta, spec.geometry, spec.b_sign)
            fz = fidelity(ru, rb)
            rows.append(combo + (ru, rb, fz, "ok"))
        except (SingularResponse, SingularElimination, InvalidInput) as exc:
            rows.append(combo + (complex("nan"), complex("nan"), float("nan"), f"singular:{type(exc).__name__}"))
    return ScanTable(axis_names=axis_names, rows=tuple(rows))
