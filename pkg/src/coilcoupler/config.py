"""Sectioned ``key = value`` configuration files.

Grammar (one statement per line, ``#`` starts a comment)::

    [solver]                 radial_cells, axial_cells, rtol, max_nodes
    [coil]                   one section per coil, see COIL_KEYS
    [sweep]                  moving_coil, nominal_offset, <axis>.start/stop/steps
    [circuit]                frequency, receiver, load_resistance,
                             <label>.resistance/capacitance/drive/amplitude/phase

Lengths are written in mm and angles in degrees; a value may carry its unit
as a trailing token (``160 mm``, ``90 deg``, ``10000 Hz``, ``0.01 A``,
``100 Ω``, ``1e-9 F``). A missing unit means the key's own unit, a different
one is an error. Parsed values are SI.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError
from .geometry import CoilSpec, Pose
from .inductance import SolverSettings
from .link import (
    CURRENT_SOURCE,
    PASSIVE,
    CircuitSpec,
    WindingExcitation,
    coil_resistance,
    resonant_capacitance,
)
from .sweep import AXIS_NAMES, SweepAxis, SweepConfig

PRESETS = ("twocoil", "threecoil", "twocoil_cage")

_UNITS = {"mm", "deg", "Hz", "A", "Ω", "ohm", "F"}
_LABEL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")


@dataclass(frozen=True)
class WindingCircuit:
    label: str
    resistance: float | str = "auto"
    """[ohm], or "auto" for copper DC resistance"""
    capacitance: float | str = "resonant"
    """[F], "resonant" to tune to the frequency, or "none" """
    drive: str = PASSIVE
    amplitude: float | None = None
    """[A]"""
    phase: float | None = None
    """[deg]"""


@dataclass(frozen=True)
class CircuitConfig:
    frequency: float = 10e3
    receiver: str = ""
    load_resistance: float = 100.0
    windings: tuple[WindingCircuit, ...] = ()

    def winding(self, label: str) -> WindingCircuit:
        for w in self.windings:
            if w.label == label:
                return w
        return WindingCircuit(label)


@dataclass(frozen=True)
class SystemConfig:
    coils: tuple[CoilSpec, ...]
    sweep: SweepConfig | None = None
    circuit: CircuitConfig | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.coils)

    def coil(self, label: str) -> CoilSpec:
        return self.coils[self.labels.index(label)]


# -- value parsing -------------------------------------------------------------


def _split_unit(text: str, line: int) -> tuple[str, str | None]:
    parts = text.rsplit(None, 1)
    if len(parts) == 2 and re.fullmatch(r"[A-Za-zΩ°µ]+", parts[1]):
        if parts[1] not in _UNITS:
            raise ConfigError(f"unsupported unit {parts[1]!r}", line)
        return parts[0], parts[1]
    return text, None


def _number(text: str, line: int, key: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", line) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite", line)
    return value


def _quantity(text: str, unit: str, line: int, key: str) -> float:
    body, given = _split_unit(text, line)
    if given is not None and given != unit and {given, unit} != {"Ω", "ohm"}:
        raise ConfigError(f"{key}: expected unit {unit}, got {given}", line)
    return _number(body.strip(), line, key)


def _vector(text: str, unit: str | None, line: int, key: str) -> tuple[float, float, float]:
    body, given = _split_unit(text, line)
    if given is not None and given != unit:
        expected = unit or "no unit"
        raise ConfigError(f"{key}: expected {expected}, got {given}", line)
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 3 comma-separated components", line)
    return tuple(_number(p, line, key) for p in parts)


def _integer(text: str, line: int, key: str) -> int:
    body, given = _split_unit(text, line)
    if given is not None:
        raise ConfigError(f"{key}: takes no unit", line)
    try:
        return int(body.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {body.strip()!r}", line) from None


def _label(text: str, line: int, key: str) -> str:
    if not _LABEL_RE.match(text):
        raise ConfigError(f"{key}: invalid label {text!r}", line)
    return text


# -- sections ------------------------------------------------------------------

COIL_KEYS = ("label", "center", "axis", "inner_diameter", "outer_diameter", "height", "turns", "wire_radius")
COIL_REQUIRED = ("label", "center", "inner_diameter", "outer_diameter", "height", "turns")
SOLVER_KEYS = ("radial_cells", "axial_cells", "rtol", "max_nodes")
WINDING_KEYS = ("resistance", "capacitance", "drive", "amplitude", "phase")


def _tokenize(text: str):
    """Yield (line_no, section or None, key, value)."""
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", no)
            section = line[1:-1].strip()
            if section not in ("solver", "coil", "sweep", "circuit"):
                raise ConfigError(f"unknown section [{section}]", no)
            yield no, section, None, None
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        if section is None:
            raise ConfigError("key outside of any section", no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {line!r}", no)
        yield no, section, key, value


def _parse_coil(entries: dict, header_line: int) -> CoilSpec:
    missing = [k for k in COIL_REQUIRED if k not in entries]
    if missing:
        raise ConfigError(f"[coil] missing keys: {', '.join(missing)}", header_line)
    vals = {}
    for key, (no, value) in entries.items():
        if key == "label":
            vals[key] = _label(value, no, key)
        elif key == "center":
            vals[key] = tuple(v / 1000.0 for v in _vector(value, "mm", no, key))
        elif key == "axis":
            vals[key] = _vector(value, None, no, key)
        elif key == "turns":
            vals[key] = _integer(value, no, key)
        else:
            vals[key] = _quantity(value, "mm", no, key) / 1000.0
    try:
        return CoilSpec(
            pose=Pose(vals["center"], vals.get("axis", (0.0, 0.0, 1.0))),
            inner_radius=vals["inner_diameter"] / 2.0,
            outer_radius=vals["outer_diameter"] / 2.0,
            height=vals["height"],
            turns=vals["turns"],
            wire_radius=vals.get("wire_radius", 1e-4),
            label=vals["label"],
        )
    except ConfigError as exc:
        raise ConfigError(str(exc), header_line) from None


def _parse_solver(entries: dict) -> SolverSettings:
    vals = {}
    for key, (no, value) in entries.items():
        if key == "rtol":
            vals[key] = _number(value, no, key)
            if not 0 < vals[key] < 1:
                raise ConfigError("rtol must lie in (0, 1)", no)
        else:
            vals[key] = _integer(value, no, key)
            if vals[key] < 1:
                raise ConfigError(f"{key} must be >= 1", no)
    return SolverSettings(**vals)


def _parse_sweep(entries: dict, header_line: int) -> SweepConfig:
    moving = None
    offset = (0.0, 0.0, 0.0)
    axes: dict[str, dict] = {}
    for key, (no, value) in entries.items():
        if key == "moving_coil":
            moving = _label(value, no, key)
        elif key == "nominal_offset":
            offset = tuple(v / 1000.0 for v in _vector(value, "mm", no, key))
        else:
            name, _, part = key.partition(".")
            if name not in AXIS_NAMES or part not in ("start", "stop", "steps"):
                raise ConfigError(f"unknown key {key!r} in [sweep]", no)
            if part == "steps":
                axes.setdefault(name, {})[part] = _integer(value, no, key)
            else:
                axes.setdefault(name, {})[part] = _quantity(value, "mm", no, key)
    if moving is None:
        raise ConfigError("[sweep] needs moving_coil", header_line)
    built = []
    for name, parts in axes.items():
        if "start" not in parts:
            raise ConfigError(f"[sweep] axis {name} needs {name}.start", header_line)
        parts.setdefault("stop", parts["start"])
        parts.setdefault("steps", 1)
        try:
            built.append(SweepAxis(name, parts["start"], parts["stop"], parts["steps"]))
        except ConfigError as exc:
            raise ConfigError(str(exc), header_line) from None
    try:
        return SweepConfig(tuple(built), moving, offset)
    except ConfigError as exc:
        raise ConfigError(str(exc), header_line) from None


def _parse_circuit(entries: dict, labels: tuple[str, ...], header_line: int) -> CircuitConfig:
    top = {}
    per_coil: dict[str, dict] = {}
    for key, (no, value) in entries.items():
        if key == "frequency":
            top[key] = _quantity(value, "Hz", no, key)
        elif key == "load_resistance":
            top[key] = _quantity(value, "Ω", no, key)
        elif key == "receiver":
            top[key] = _label(value, no, key)
        else:
            label, _, part = key.rpartition(".")
            if label not in labels or part not in WINDING_KEYS:
                raise ConfigError(f"unknown key {key!r} in [circuit]", no)
            slot = per_coil.setdefault(label, {})
            if part == "resistance":
                slot[part] = value if value == "auto" else _quantity(value, "Ω", no, key)
            elif part == "capacitance":
                slot[part] = value if value in ("resonant", "none") else _quantity(value, "F", no, key)
            elif part == "drive":
                if value not in (CURRENT_SOURCE, PASSIVE):
                    raise ConfigError(f"{key}: drive must be 'current' or 'passive'", no)
                slot[part] = value
            elif part == "amplitude":
                slot[part] = _quantity(value, "A", no, key)
            else:
                slot[part] = _quantity(value, "deg", no, key)
    if "receiver" not in top:
        raise ConfigError("[circuit] needs receiver", header_line)
    if top["receiver"] not in labels:
        raise ConfigError(f"receiver {top['receiver']!r} is not a coil", header_line)
    windings = tuple(WindingCircuit(label, **per_coil[label]) for label in labels if label in per_coil)
    cfg = CircuitConfig(windings=windings, **top)
    try:
        _excitations(cfg, labels)
    except ConfigError as exc:
        raise ConfigError(str(exc), header_line) from None
    if not cfg.frequency > 0 or not cfg.load_resistance > 0:
        raise ConfigError("frequency and load_resistance must be positive", header_line)
    return cfg


def parse_config(text: str) -> SystemConfig:
    """Parse and validate a configuration; raises ConfigError with a line number."""
    blocks: list[tuple[str, int, dict]] = []
    for no, section, key, value in _tokenize(text):
        if key is None:
            blocks.append((section, no, {}))
            continue
        entries = blocks[-1][2]
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", no)
        if section == "coil" and key not in COIL_KEYS:
            raise ConfigError(f"unknown key {key!r} in [coil]", no)
        if section == "solver" and key not in SOLVER_KEYS:
            raise ConfigError(f"unknown key {key!r} in [solver]", no)
        entries[key] = (no, value)

    singles = {}
    for section, no, _ in blocks:
        if section != "coil":
            if section in singles:
                raise ConfigError(f"section [{section}] appears twice", no)
            singles[section] = no

    coils = tuple(_parse_coil(entries, no) for section, no, entries in blocks if section == "coil")
    if not coils:
        raise ConfigError("at least one coil required")
    labels = tuple(c.label for c in coils)
    if len(set(labels)) != len(labels):
        raise ConfigError(f"coil labels must be unique, got {labels}")

    solver = SolverSettings()
    sweep = circuit = None
    for section, no, entries in blocks:
        if section == "solver":
            solver = _parse_solver(entries)
        elif section == "sweep":
            sweep = _parse_sweep(entries, no)
            if sweep.moving_coil not in labels:
                raise ConfigError(f"moving_coil {sweep.moving_coil!r} is not a coil", no)
        elif section == "circuit":
            circuit = _parse_circuit(entries, labels, no)
    return SystemConfig(coils, sweep, circuit, solver)


# -- emission ------------------------------------------------------------------


def _g(x: float) -> str:
    return f"{x:.12g}"


def _mm(x: float) -> str:
    return _g(x * 1000.0)


def _vec_mm(v) -> str:
    return ", ".join(_mm(c) for c in v) + " mm"


def emit_config(cfg: SystemConfig) -> str:
    """Canonical text for a config; parse_config(emit_config(c)) == c."""
    s = cfg.solver
    out = [
        "[solver]",
        f"radial_cells = {s.radial_cells}",
        f"axial_cells = {s.axial_cells}",
        f"rtol = {_g(s.rtol)}",
        f"max_nodes = {s.max_nodes}",
    ]
    for c in cfg.coils:
        out += [
            "",
            "[coil]",
            f"label = {c.label}",
            f"center = {_vec_mm(c.pose.center)}",
            "axis = " + ", ".join(_g(a) for a in c.pose.axis),
            f"inner_diameter = {_mm(2 * c.inner_radius)} mm",
            f"outer_diameter = {_mm(2 * c.outer_radius)} mm",
            f"height = {_mm(c.height)} mm",
            f"turns = {c.turns}",
            f"wire_radius = {_mm(c.wire_radius)} mm",
        ]
    if cfg.sweep is not None:
        sw = cfg.sweep
        out += ["", "[sweep]", f"moving_coil = {sw.moving_coil}", f"nominal_offset = {_vec_mm(sw.nominal_offset)}"]
        for a in sw.axes:
            out += [f"{a.name}.start = {_g(a.start)} mm", f"{a.name}.stop = {_g(a.stop)} mm", f"{a.name}.steps = {a.steps}"]
    if cfg.circuit is not None:
        cc = cfg.circuit
        out += [
            "",
            "[circuit]",
            f"frequency = {_g(cc.frequency)} Hz",
            f"receiver = {cc.receiver}",
            f"load_resistance = {_g(cc.load_resistance)} Ω",
        ]
        for w in cc.windings:
            r = w.resistance if isinstance(w.resistance, str) else f"{_g(w.resistance)} Ω"
            c = w.capacitance if isinstance(w.capacitance, str) else f"{_g(w.capacitance)} F"
            out += [f"{w.label}.resistance = {r}", f"{w.label}.capacitance = {c}", f"{w.label}.drive = {w.drive}"]
            if w.amplitude is not None:
                out.append(f"{w.label}.amplitude = {_g(w.amplitude)} A")
            if w.phase is not None:
                out.append(f"{w.label}.phase = {_g(w.phase)} deg")
    return "\n".join(out) + "\n"


def config_hash(cfg: SystemConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode("utf-8")).hexdigest()[:16]


# -- presets and circuit resolution ----------------------------------------------


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("coilcoupler.presets").joinpath(f"{name}.cfg").read_text(encoding="utf-8")


def load_preset(name: str) -> SystemConfig:
    return parse_config(preset_text(name))


def _excitations(circuit: CircuitConfig, labels) -> list[WindingExcitation]:
    out = []
    for label in labels:
        w = circuit.winding(label)
        out.append(WindingExcitation(label, w.drive, w.amplitude, w.phase))
    return out


def build_link(cfg: SystemConfig, L_diag) -> tuple[CircuitSpec, list[WindingExcitation]]:
    """Resolve "auto"/"resonant" circuit entries against the coil self inductances."""
    if cfg.circuit is None:
        raise ConfigError("configuration has no [circuit] section")
    cc = cfg.circuit
    resistance, capacitance = [], []
    for coil, Lii in zip(cfg.coils, L_diag):
        w = cc.winding(coil.label)
        resistance.append(coil_resistance(coil) if w.resistance == "auto" else float(w.resistance))
        if w.capacitance == "resonant":
            capacitance.append(resonant_capacitance(float(Lii), cc.frequency))
        elif w.capacitance == "none":
            capacitance.append(None)
        else:
            capacitance.append(float(w.capacitance))
    circ = CircuitSpec(cfg.labels, tuple(resistance), tuple(capacitance), cc.receiver, cc.load_resistance, cc.frequency)
    return circ, _excitations(cc, cfg.labels)
