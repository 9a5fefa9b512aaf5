"""Inductance, coupling and link analysis for circular multi-turn air-core coils."""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, SingularityError, SolverError
from .geometry import CoilSpec, FilamentLoop, FilamentSet, Pose, decompose_coil, transform_coil
from .elliptic import elliptic_ke
from .inductance import (
    CouplingMatrix,
    InductanceMatrix,
    SolverSettings,
    coil_mutual,
    coil_self,
    filament_mutual,
    filament_mutual_coaxial,
    loop_self_inductance,
    neumann_mutual_oracle,
    system_matrices,
)
from .sweep import CouplingField, SweepAxis, SweepConfig, field_stats, mirror_check, run_sweep
from .link import CircuitSpec, LinkReport, WindingExcitation, solve_link, sweep_link
from .config import SystemConfig, emit_config, load_preset, parse_config
