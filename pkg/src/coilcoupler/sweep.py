"""Receiver position sweeps over a rectangular grid, and statistics on the result."""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, SolverError
from .geometry import CoilSpec, Vec3, decompose_coil, translate_coil
from .inductance import DEFAULT_SETTINGS, SolverSettings, coil_self, pair_mutual, system_matrices

AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    """[mm] center coordinate of the moving coil at the first step"""
    stop: float
    """[mm]"""
    steps: int = 1

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"sweep axis must be one of x, y, z, got {self.name!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError(f"axis {self.name}: steps must be a positive integer")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError(f"axis {self.name}: start/stop must be finite")
        if self.stop < self.start:
            raise ConfigError(f"axis {self.name}: stop must be >= start")
        if self.steps == 1 and self.start != self.stop:
            raise ConfigError(f"axis {self.name}: a single step needs start == stop")

    def values_mm(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, int(self.steps))


@dataclass(frozen=True)
class SweepConfig:
    axes: tuple[SweepAxis, ...]
    moving_coil: str
    nominal_offset: Vec3 = (0.0, 0.0, 0.0)
    """[m] added to the moving coil's center on axes that are not swept"""

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if not 1 <= len(names) <= 3:
            raise ConfigError("a sweep needs between 1 and 3 axes")
        if len(set(names)) != len(names):
            raise ConfigError("sweep axis names must be distinct")
        object.__setattr__(self, "axes", tuple(sorted(self.axes, key=lambda a: AXIS_NAMES.index(a.name))))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(a.steps) for a in self.axes)

    def grid_positions(self, base_center: Vec3) -> np.ndarray:
        """(P, 3) moving-coil centers in meters, row-major in x, y, z order."""
        base = np.asarray(base_center) + np.asarray(self.nominal_offset)
        per_axis = []
        for i, name in enumerate(AXIS_NAMES):
            axis = next((a for a in self.axes if a.name == name), None)
            per_axis.append(axis.values_mm() / 1000.0 if axis is not None else np.array([base[i]]))
        return np.array(list(itertools.product(*per_axis)), dtype=float)


@dataclass(frozen=True, eq=False)
class CouplingField:
    labels: tuple[str, ...]
    moving_coil: str
    shape: tuple[int, ...]
    points: np.ndarray
    """[m] (P, 3) moving coil center at each grid point"""
    coupling: np.ndarray
    """(P, n, n) signed k; NaN where a point is absent"""
    inductance: np.ndarray | None = None
    """[H] (P, n, n), or None when not stored"""
    provenance: dict = field(default_factory=dict)

    @property
    def valid(self) -> np.ndarray:
        return ~np.isnan(self.coupling[:, 0, 0])

    @property
    def n_points(self) -> int:
        return len(self.points)

    def pairs(self) -> list[tuple[int, int]]:
        n = len(self.labels)
        return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class PairStats:
    min: float
    max: float
    mean: float
    argmin: Vec3
    """[m] first grid point (traversal order) attaining the minimum |k|"""
    argmax: Vec3


# -- point evaluation --------------------------------------------------------

# per-process state for the worker pool
_CONTEXT: dict = {}


def _prepare(coils: Sequence[CoilSpec], moving: int, settings: SolverSettings) -> dict:
    """Entries of L that do not depend on the moving coil's position."""
    sets = [decompose_coil(c, settings.radial_cells, settings.axial_cells) for c in coils]
    known = {}
    for i in range(len(coils)):
        known[(i, i)] = coil_self(sets[i], settings)
    fixed = [i for i in range(len(coils)) if i != moving]
    for a, i in enumerate(fixed):
        for j in fixed[a + 1 :]:
            known[(i, j)] = pair_mutual(coils[i], coils[j], sets[i], sets[j], settings)
    return {"coils": list(coils), "moving": moving, "settings": settings, "known": known}


def _evaluate(ctx: dict, position: np.ndarray, skip_invalid: bool):
    coils = list(ctx["coils"])
    moving = ctx["moving"]
    shift = position - np.asarray(coils[moving].pose.center)
    coils[moving] = translate_coil(coils[moving], shift)
    try:
        L, k = system_matrices(coils, ctx["settings"], known=ctx["known"])
    except SolverError as exc:
        if skip_invalid:
            return None
        mm = ", ".join(f"{v * 1000:.6g}" for v in position)
        raise type(exc)(f"at grid point ({mm}) mm: {exc}") from exc
    return L.values, k.values


def _init_worker(ctx: dict) -> None:
    _CONTEXT.clear()
    _CONTEXT.update(ctx)


def _worker(args):
    position, skip_invalid = args
    return _evaluate(_CONTEXT, position, skip_invalid)


def run_sweep(
    coils: Sequence[CoilSpec],
    cfg: SweepConfig,
    settings: SolverSettings = DEFAULT_SETTINGS,
    jobs: int = 1,
    skip_invalid: bool = False,
    provenance: dict | None = None,
) -> CouplingField:
    """Tabulate L and k with the moving coil placed at every grid point.

    Points are independent, so the output does not depend on `jobs`:
    results are gathered in traversal order whatever the worker count.
    """
    labels = [c.label for c in coils]
    if cfg.moving_coil not in labels:
        raise ConfigError(f"moving coil {cfg.moving_coil!r} is not among {labels}")
    moving = labels.index(cfg.moving_coil)
    positions = cfg.grid_positions(coils[moving].pose.center)
    ctx = _prepare(coils, moving, settings)

    tasks = [(p, skip_invalid) for p in positions]
    if jobs <= 1 or len(tasks) <= 1:
        results = [_evaluate(ctx, p, s) for p, s in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(ctx,)) as pool:
            results = list(pool.map(_worker, tasks, chunksize=chunk))

    n = len(coils)
    L = np.full((len(positions), n, n), np.nan)
    K = np.full((len(positions), n, n), np.nan)
    for idx, res in enumerate(results):
        if res is not None:
            L[idx], K[idx] = res
    info = {
        "radial_cells": settings.radial_cells,
        "axial_cells": settings.axial_cells,
        "rtol": settings.rtol,
        "max_nodes": settings.max_nodes,
    }
    info.update(provenance or {})
    return CouplingField(tuple(labels), cfg.moving_coil, cfg.shape, positions, K, L, info)


def field_stats(f: CouplingField) -> dict[tuple[int, int], PairStats]:
    """Extrema and mean of |k| for every coil pair over the present grid points."""
    valid = f.valid
    if not np.any(valid):
        raise SolverError("field has no valid points")
    out = {}
    for i, j in f.pairs():
        mag = np.abs(f.coupling[:, i, j])
        present = np.where(valid)[0]
        vals = mag[present]
        lo = present[int(np.argmin(vals))]
        hi = present[int(np.argmax(vals))]
        out[(i, j)] = PairStats(
            float(vals.min()),
            float(vals.max()),
            float(np.mean(vals)),
            tuple(float(v) for v in f.points[lo]),
            tuple(float(v) for v in f.points[hi]),
        )
    return out


def mirror_check(f: CouplingField, axis: str) -> float:
    """max |k(+u) - k(-u)| over all pairs and points, mirroring along `axis`."""
    if axis not in AXIS_NAMES:
        raise ConfigError(f"unknown axis {axis!r}")
    col = AXIS_NAMES.index(axis)
    coords = f.points[:, col]
    span = max(float(np.max(np.abs(coords))), 1e-12)
    lines = defaultdict(list)
    for idx, p in enumerate(f.points):
        lines[tuple(np.delete(p, col))].append(idx)
    worst = 0.0
    iu = np.triu_indices(len(f.labels), 1)
    for members in lines.values():
        members = sorted(members, key=lambda i: coords[i])
        for a, b in zip(members, reversed(members)):
            if abs(coords[a] + coords[b]) > 1e-9 * span:
                raise ConfigError(f"grid is not symmetric about 0 along {axis}")
            if not (f.valid[a] and f.valid[b]):
                continue
            diff = np.abs(f.coupling[a][iu] - f.coupling[b][iu])
            if diff.size:
                worst = max(worst, float(diff.max()))
    return worst
