"""Physical parameter sets, state containers and unit conventions.

Configuration files state frequencies in MHz (ordinary frequency); everything
internal is angular (rad/us) with time in us.  Absolute optical frequencies are
never modelled, only detunings.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, InvalidInput

TWO_PI = 2.0 * math.pi

#: numerical slack allowed on norms that can only shrink under decay
NORM_EPS = 1e-9


def angular(freq_mhz: float) -> float:
    """Convert an ordinary frequency in MHz to angular rad/us."""
    return TWO_PI * freq_mhz


def to_mhz(omega: float) -> float:
    """Convert an angular frequency in rad/us back to ordinary MHz."""
    return omega / TWO_PI


def collective_coupling(g_list: Sequence[complex]) -> float:
    """Collective ensemble-photon coupling: (sum of |g_n|^2)^(1/2).

    Invariant under permutations of ``g_list`` and under per-entry phases.
    """
    g = np.asarray(list(g_list), dtype=complex)
    if g.size == 0:
        raise InvalidInput("collective coupling needs at least one per-atom coupling")
    return float(np.sqrt(np.sum(np.abs(g) ** 2)))


@dataclass(frozen=True)
class PhysicalParams:
    """All rates, detunings and couplings in angular units (rad/us).

    ``omega_rabi`` is the (possibly complex) control-laser Rabi frequency,
    ``g_collective`` the collective coupling and ``g_single`` the optional
    uniform per-atom coupling.  When both couplings are set they must satisfy
    g_collective = g_single * sqrt(n_atoms).
    """

    omega_rabi: complex = 0.0
    g_collective: float = 0.0
    g_single: float | None = None
    delta_e: float = 0.0
    delta_r: float = 0.0
    gamma_e: float = 0.0
    gamma_r: float = 0.0
    gamma_p: float = 0.0
    kappa: float = 0.0
    delta_p: float = 0.0
    n_atoms: int = 1

    def __post_init__(self):
        for name in ("gamma_e", "gamma_r", "gamma_p", "kappa"):
            if getattr(self, name) < 0:
                raise InvalidInput(f"decay rate {name} must be >= 0, got {getattr(self, name)}")
        if self.n_atoms < 1:
            raise InvalidInput(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.g_collective < 0:
            raise InvalidInput("g_collective must be >= 0")
        if self.g_single is not None:
            expected = self.g_single * math.sqrt(self.n_atoms)
            scale = max(abs(expected), abs(self.g_collective), 1e-300)
            if abs(self.g_collective - expected) > 1e-9 * scale:
                raise InvalidInput(
                    "inconsistent couplings: g_collective="
                    f"{self.g_collective} but g_single*sqrt(N)={expected}"
                )

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class SingleExcState:
    """Amplitude triple (photon, collective intermediate, collective Rydberg)."""

    c_b: complex = 0.0
    c_e: complex = 0.0
    c_r: complex = 0.0

    def __post_init__(self):
        if self.norm_sq > 1.0 + NORM_EPS:
            raise InvalidInput(f"state norm^2 {self.norm_sq} exceeds 1 (decay can only shrink it)")

    @property
    def norm_sq(self) -> float:
        return abs(self.c_b) ** 2 + abs(self.c_e) ** 2 + abs(self.c_r) ** 2

    def populations(self) -> tuple[float, float, float]:
        return (abs(self.c_b) ** 2, abs(self.c_e) ** 2, abs(self.c_r) ** 2)


def _frozen_complex_array(values, length: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.shape != (length,):
        raise InvalidInput(f"{name} must have shape ({length},), got {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockLadderState:
    """Photon-number-resolved amplitudes for the three internal branches.

    ``c_b[n]`` is the amplitude of n photons with all atoms in the ground
    state; ``c_e[n]`` / ``c_r[n]`` carry n photons plus one collective
    intermediate / Rydberg excitation.
    """

    cutoff: int
    c_b: np.ndarray = field(repr=False)
    c_e: np.ndarray = field(repr=False)
    c_r: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.cutoff < 1:
            raise InvalidInput(f"cutoff must be >= 1, got {self.cutoff}")
        m = self.cutoff + 1
        object.__setattr__(self, "c_b", _frozen_complex_array(self.c_b, m, "c_b"))
        object.__setattr__(self, "c_e", _frozen_complex_array(self.c_e, m, "c_e"))
        object.__setattr__(self, "c_r", _frozen_complex_array(self.c_r, m, "c_r"))
        if self.norm_sq() > 1.0 + NORM_EPS:
            raise InvalidInput(f"ladder norm^2 {self.norm_sq()} exceeds 1")

    @classmethod
    def vacuum(cls, cutoff: int) -> "FockLadderState":
        m = cutoff + 1
        c_b = np.zeros(m, complex)
        c_b[0] = 1.0
        return cls(cutoff, c_b, np.zeros(m, complex), np.zeros(m, complex))

    def norm_sq(self) -> float:
        return float(
            np.sum(np.abs(self.c_b) ** 2)
            + np.sum(np.abs(self.c_e) ** 2)
            + np.sum(np.abs(self.c_r) ** 2)
        )

    def renormalized(self) -> "FockLadderState":
        n = math.sqrt(self.norm_sq())
        if n == 0.0:
            raise InvalidInput("cannot renormalize a zero state")
        return FockLadderState(self.cutoff, self.c_b / n, self.c_e / n, self.c_r / n)

    def mean_photon(self) -> float:
        n = np.arange(self.cutoff + 1)
        return float(
            np.sum(n * (np.abs(self.c_b) ** 2 + np.abs(self.c_e) ** 2 + np.abs(self.c_r) ** 2))
        )

    def rydberg_population(self) -> float:
        return float(np.sum(np.abs(self.c_r) ** 2))


# --- configuration parsing -------------------------------------------------

#: keys interpreted as ordinary frequencies in MHz and converted to rad/us
FREQUENCY_KEYS = (
    "omega",
    "g",
    "g_single",
    "delta_e",
    "delta_r",
    "gamma_e",
    "gamma_r",
    "gamma_p",
    "kappa",
    "delta_p",
)

RATE_KEYS = ("gamma_e", "gamma_r", "gamma_p", "kappa")

REQUIRED_KEYS = ("omega", "delta_e", "delta_r", "gamma_e", "gamma_r", "kappa")


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, blank lines ignored.

    Values are converted to float when possible, otherwise kept as strings.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        try:
            out[key] = float(value)
        except ValueError:
            out[key] = value
    return out


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def params_from_config(config: Mapping) -> PhysicalParams:
    """Build :class:`PhysicalParams` from a MHz-valued key/value mapping."""
    for key in REQUIRED_KEYS:
        if key not in config:
            raise ConfigError(f"missing required key {key!r}")
    if "g" not in config and "g_single" not in config:
        raise ConfigError("missing coupling: provide 'g' or 'g_single'")

    def fnum(key, default=None):
        if key not in config:
            return default
        try:
            return float(config[key])
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} must be numeric, got {config[key]!r}") from None

    for key in RATE_KEYS:
        val = fnum(key, 0.0)
        if val < 0:
            raise ConfigError(f"decay rate {key!r} must be >= 0, got {val}")

    n_atoms = int(fnum("n_atoms", 1))
    g_single_mhz = fnum("g_single")
    g_mhz = fnum("g")
    if g_mhz is None:
        g_mhz = g_single_mhz * math.sqrt(n_atoms)
    elif g_single_mhz is not None:
        expected = g_single_mhz * math.sqrt(n_atoms)
        if abs(g_mhz - expected) > 1e-9 * max(abs(g_mhz), abs(expected), 1e-300):
            raise ConfigError(
                f"inconsistent couplings: g={g_mhz} MHz but g_single*sqrt(n_atoms)={expected} MHz"
            )

    phase = math.radians(fnum("omega_phase_deg", 0.0))
    omega = angular(fnum("omega")) * cmath.exp(1j * phase)
    try:
        return PhysicalParams(
            omega_rabi=omega,
            g_collective=angular(g_mhz),
            g_single=None if g_single_mhz is None else angular(g_single_mhz),
            delta_e=angular(fnum("delta_e")),
            delta_r=angular(fnum("delta_r")),
            gamma_e=angular(fnum("gamma_e")),
            gamma_r=angular(fnum("gamma_r")),
            gamma_p=angular(fnum("gamma_p", 0.0)),
            kappa=angular(fnum("kappa")),
            delta_p=angular(fnum("delta_p", 0.0)),
            n_atoms=n_atoms,
        )
    except InvalidInput as exc:
        raise ConfigError(str(exc)) from exc


def params_to_config(p: PhysicalParams) -> str:
    """Serialize params back to config text (MHz units, full precision)."""
    lines = [
        f"omega = {to_mhz(abs(p.omega_rabi))!r}",
        f"omega_phase_deg = {math.degrees(cmath.phase(p.omega_rabi)) if p.omega_rabi != 0 else 0.0!r}",
        f"g = {to_mhz(p.g_collective)!r}",
    ]
    if p.g_single is not None:
        lines.append(f"g_single = {to_mhz(p.g_single)!r}")
    lines += [
        f"delta_e = {to_mhz(p.delta_e)!r}",
        f"delta_r = {to_mhz(p.delta_r)!r}",
        f"gamma_e = {to_mhz(p.gamma_e)!r}",
        f"gamma_r = {to_mhz(p.gamma_r)!r}",
        f"gamma_p = {to_mhz(p.gamma_p)!r}",
        f"kappa = {to_mhz(p.kappa)!r}",
        f"delta_p = {to_mhz(p.delta_p)!r}",
        f"n_atoms = {p.n_atoms}",
    ]
    return "\n".join(lines) + "\n"
