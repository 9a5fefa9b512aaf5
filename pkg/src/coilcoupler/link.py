"""Phasor analysis of a coupled-coil link.

Every coil is a series loop R_i + j w L_ii + 1/(j w C_i), coupled to the
others through j w M_ij; the receiver loop also carries the load R_L.
Windings are either current sources (their phasor current is imposed) or
passive (current solved from a source-free mesh equation).

Phasors are peak amplitudes, so average power is 1/2 Re(V conj(I)).
RMS quantities are the peak values divided by sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, SolverError
from .geometry import CoilSpec
from .sweep import CouplingField

COPPER_RESISTIVITY = 1.68e-8
"""[ohm m] at 20 C"""

CURRENT_SOURCE = "current"
PASSIVE = "passive"


@dataclass(frozen=True)
class WindingExcitation:
    label: str
    mode: str = PASSIVE
    amplitude: float | None = None
    """[A] peak"""
    phase: float | None = None
    """[deg]"""

    def __post_init__(self):
        if self.mode == CURRENT_SOURCE:
            if self.amplitude is None or not self.amplitude > 0:
                raise ConfigError(f"{self.label}: a current source needs a positive amplitude")
            if self.phase is None:
                object.__setattr__(self, "phase", 0.0)
        elif self.mode == PASSIVE:
            if self.amplitude is not None or self.phase is not None:
                raise ConfigError(f"{self.label}: a passive winding takes no amplitude or phase")
        else:
            raise ConfigError(f"{self.label}: unknown drive mode {self.mode!r}")

    @property
    def phasor(self) -> complex:
        return self.amplitude * complex(math.cos(math.radians(self.phase)), math.sin(math.radians(self.phase)))


@dataclass(frozen=True)
class CircuitSpec:
    labels: tuple[str, ...]
    resistance: tuple[float, ...]
    """[ohm] series resistance per coil"""
    capacitance: tuple[float | None, ...]
    """[F] series tuning capacitor per coil, None for no capacitor"""
    receiver: str
    load_resistance: float
    """[ohm]"""
    frequency: float
    """[Hz]"""

    def __post_init__(self):
        n = len(self.labels)
        if len(self.resistance) != n or len(self.capacitance) != n:
            raise ConfigError("circuit needs one resistance and one capacitance entry per coil")
        if any(not r >= 0 for r in self.resistance):
            raise ConfigError("series resistance must be >= 0")
        if any(c is not None and not c > 0 for c in self.capacitance):
            raise ConfigError("tuning capacitance must be positive")
        if self.receiver not in self.labels:
            raise ConfigError(f"receiver {self.receiver!r} is not a coil")
        if not self.load_resistance > 0:
            raise ConfigError("load resistance must be positive")
        if not self.frequency > 0:
            raise ConfigError("frequency must be positive")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency

    @property
    def receiver_index(self) -> int:
        return self.labels.index(self.receiver)


@dataclass(frozen=True, eq=False)
class LinkReport:
    labels: tuple[str, ...]
    currents: np.ndarray
    """[A] complex peak phasor per coil"""
    source_voltages: np.ndarray
    """[V] complex terminal voltage of each current source (0 for passive coils)"""
    emf: complex
    """[V] EMF induced in the receiver by the other coils"""
    pdl: float
    """[W] power delivered to the load"""
    pte: float
    input_power: float
    """[W] total active power delivered by the sources"""
    dissipated: np.ndarray
    """[W] per-coil loss in the series resistances"""

    @property
    def current_amplitudes(self) -> np.ndarray:
        return np.abs(self.currents)

    @property
    def current_phases(self) -> np.ndarray:
        """[deg]"""
        return np.degrees(np.angle(self.currents))


def coil_resistance(spec: CoilSpec, resistivity: float = COPPER_RESISTIVITY) -> float:
    """DC resistance of the winding: turns * mean circumference / wire area."""
    length = spec.turns * 2.0 * math.pi * spec.mean_radius
    return resistivity * length / (math.pi * spec.wire_radius**2)


def resonant_capacitance(inductance: float, frequency: float) -> float:
    omega = 2.0 * math.pi * frequency
    return 1.0 / (omega * omega * inductance)


def impedance_matrix(L: np.ndarray, circ: CircuitSpec) -> np.ndarray:
    w = circ.omega
    Z = 1j * w * np.asarray(L, dtype=float)
    for i in range(len(circ.labels)):
        Z[i, i] += circ.resistance[i]
        if circ.capacitance[i] is not None:
            Z[i, i] += 1.0 / (1j * w * circ.capacitance[i])
    Z[circ.receiver_index, circ.receiver_index] += circ.load_resistance
    return Z


def solve_link(L, circ: CircuitSpec, exc: Sequence[WindingExcitation]) -> LinkReport:
    """Mesh currents, receiver EMF, PDL and PTE for one inductance matrix.

    `L` may be an InductanceMatrix or a plain (n, n) array ordered like
    `circ.labels`.
    """
    values = np.asarray(getattr(L, "values", L), dtype=float)
    n = len(circ.labels)
    if values.shape != (n, n):
        raise ConfigError(f"inductance matrix shape {values.shape} does not match {n} coils")
    by_label = {e.label: e for e in exc}
    if set(by_label) - set(circ.labels):
        raise ConfigError(f"excitations name unknown coils: {sorted(set(by_label) - set(circ.labels))}")

    Z = impedance_matrix(values, circ)
    driven = [i for i, lbl in enumerate(circ.labels) if lbl in by_label and by_label[lbl].mode == CURRENT_SOURCE]
    passive = [i for i in range(n) if i not in driven]
    if not driven:
        raise SolverError("no current-source winding: the link has no power input")

    I = np.zeros(n, dtype=complex)
    for i in driven:
        I[i] = by_label[circ.labels[i]].phasor
    if passive:
        Zpp = Z[np.ix_(passive, passive)]
        rhs = -Z[np.ix_(passive, driven)] @ I[driven]
        if np.linalg.cond(Zpp) > 1e14:
            raise SolverError("mesh impedance matrix is singular")
        I[passive] = np.linalg.solve(Zpp, rhs)

    V = np.zeros(n, dtype=complex)
    V[driven] = Z[driven] @ I
    input_power = 0.5 * float(np.real(np.sum(V[driven] * np.conj(I[driven]))))
    if input_power == 0.0:
        raise SolverError("sources deliver zero active power")

    rx = circ.receiver_index
    dissipated = 0.5 * np.asarray(circ.resistance) * np.abs(I) ** 2
    pdl = 0.5 * circ.load_resistance * abs(I[rx]) ** 2
    others = [j for j in range(n) if j != rx]
    emf = complex(-1j * circ.omega * np.sum(values[rx, others] * I[others]))
    return LinkReport(circ.labels, I, V, emf, float(pdl), float(pdl / input_power), input_power, dissipated)


def sweep_link(
    field: CouplingField,
    L_diag: Sequence[float],
    circ: CircuitSpec,
    exc: Sequence[WindingExcitation],
) -> list[LinkReport | None]:
    """solve_link at every grid point; absent points map to None.

    The stored inductance matrices are used when the field carries them,
    otherwise M_ij is rebuilt as k_ij sqrt(L_ii L_jj) from `L_diag`.
    """
    if tuple(field.labels) != tuple(circ.labels):
        raise ConfigError("field and circuit must list the same coils in the same order")
    diag = np.asarray(L_diag, dtype=float)
    scale = np.sqrt(np.outer(diag, diag))
    reports: list[LinkReport | None] = []
    for idx in range(field.n_points):
        if not field.valid[idx]:
            reports.append(None)
            continue
        if field.inductance is not None:
            L = field.inductance[idx]
        else:
            L = field.coupling[idx] * scale
        reports.append(solve_link(L, circ, exc))
    return reports
