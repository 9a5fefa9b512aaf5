"""Coil descriptions and their decomposition into weighted circular filaments.

All lengths are meters. Vectors are plain 3-tuples of floats so that every
value type here is immutable and hashable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

Vec3 = tuple[float, float, float]

# gmd of a rectangular w x h section ~= 0.2235 (w + h)
RECT_GMD_COEFF = 0.2235


def _vec3(v, name: str) -> Vec3:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ConfigError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite, got {tuple(arr)}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


def _unit(v, name: str) -> Vec3:
    x, y, z = _vec3(v, name)
    norm = math.sqrt(x * x + y * y + z * z)
    if norm == 0.0:
        raise ConfigError(f"{name} must be nonzero")
    if abs(norm - 1.0) > 1e-12:
        x, y, z = x / norm, y / norm, z / norm
    return (x, y, z)


@dataclass(frozen=True)
class Pose:
    center: Vec3
    """[m] coil center (mid-height of the winding pack)"""

    axis: Vec3 = (0.0, 0.0, 1.0)
    """unit symmetry axis; normalized on construction"""

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        object.__setattr__(self, "axis", _unit(self.axis, "axis"))


@dataclass(frozen=True)
class CoilSpec:
    """A multi-turn circular air-core coil with a rectangular winding section."""

    pose: Pose
    inner_radius: float
    """[m]"""
    outer_radius: float
    """[m]"""
    height: float
    """[m] winding extent along the axis"""
    turns: int
    wire_radius: float = 1e-4
    """[m] conductor radius, only used for the default series resistance"""
    label: str = "coil"

    def __post_init__(self):
        for name in ("inner_radius", "outer_radius", "height", "wire_radius"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{self.label}: {name} must be a finite number")
            object.__setattr__(self, name, float(value))
        if isinstance(self.turns, bool) or int(self.turns) != self.turns:
            raise ConfigError(f"{self.label}: turns must be an integer")
        object.__setattr__(self, "turns", int(self.turns))
        if not 0.0 < self.inner_radius < self.outer_radius:
            raise ConfigError(f"{self.label}: need 0 < inner_radius < outer_radius")
        if self.height <= 0.0:
            raise ConfigError(f"{self.label}: height must be positive")
        if self.turns < 1:
            raise ConfigError(f"{self.label}: turns must be >= 1")
        if self.wire_radius <= 0.0:
            raise ConfigError(f"{self.label}: wire_radius must be positive")
        if self.wire_radius > self.outer_radius - self.inner_radius:
            raise ConfigError(f"{self.label}: wire_radius does not fit the winding annulus")

    @property
    def mean_radius(self) -> float:
        return 0.5 * (self.inner_radius + self.outer_radius)


@dataclass(frozen=True)
class FilamentLoop:
    center: Vec3
    normal: Vec3
    radius: float
    """[m]"""
    weight: float = 1.0
    """turns carried by this filament"""
    gmd_radius: float = 1e-3
    """[m] equivalent radius of the section cell, for the self term"""

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        object.__setattr__(self, "normal", _unit(self.normal, "normal"))
        if not (self.radius > 0 and self.weight > 0 and self.gmd_radius > 0):
            raise ConfigError("filament radius, weight and gmd_radius must be positive")


@dataclass(frozen=True)
class FilamentSet:
    loops: tuple[FilamentLoop, ...]
    source: str = ""

    @property
    def total_weight(self) -> float:
        return math.fsum(loop.weight for loop in self.loops)

    def __len__(self) -> int:
        return len(self.loops)


def decompose_coil(spec: CoilSpec, radial_cells: int = 4, axial_cells: int = 1) -> FilamentSet:
    """Split the winding section into a uniform grid of cells, one filament per cell.

    Filaments sit at cell centroids. Every cell carries an equal share of
    the turns, and its self term uses the rectangular-cell GMD.
    """
    if int(radial_cells) != radial_cells or int(axial_cells) != axial_cells:
        raise ConfigError("cell counts must be integers")
    if radial_cells < 1 or axial_cells < 1:
        raise ConfigError("cell counts must be >= 1")

    width = (spec.outer_radius - spec.inner_radius) / radial_cells
    cell_height = spec.height / axial_cells
    gmd = RECT_GMD_COEFF * (width + cell_height)
    weight = spec.turns / (radial_cells * axial_cells)
    c = spec.pose.center
    n = spec.pose.axis

    loops = []
    for i in range(radial_cells):
        radius = spec.inner_radius + (i + 0.5) * width
        for j in range(axial_cells):
            h = -0.5 * spec.height + (j + 0.5) * cell_height
            center = (c[0] + h * n[0], c[1] + h * n[1], c[2] + h * n[2])
            loops.append(FilamentLoop(center, n, radius, weight, gmd))
    return FilamentSet(tuple(loops), spec.label)


def check_rotation(rotation) -> np.ndarray:
    rot = np.asarray(rotation, dtype=float)
    if rot.shape != (3, 3) or not np.all(np.isfinite(rot)):
        raise ConfigError("rotation must be a finite 3x3 matrix")
    if np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-10:
        raise ConfigError("rotation matrix is not orthonormal")
    return rot


def transform_coil(spec: CoilSpec, translation=(0.0, 0.0, 0.0), rotation=None) -> CoilSpec:
    """Rigid motion about the origin: center -> R @ center + t, axis -> R @ axis."""
    t = np.asarray(_vec3(translation, "translation"))
    if rotation is None:
        center = np.asarray(spec.pose.center) + t
        axis = spec.pose.axis
    else:
        rot = check_rotation(rotation)
        center = rot @ np.asarray(spec.pose.center) + t
        axis = rot @ np.asarray(spec.pose.axis)
    return replace(spec, pose=Pose(tuple(center), tuple(axis)))


def translate_coil(spec: CoilSpec, translation) -> CoilSpec:
    return transform_coil(spec, translation)


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for `angle` radians about `axis`."""
    k = np.asarray(_unit(axis, "axis"))
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * kx + (1.0 - math.cos(angle)) * (kx @ kx)


def in_plane_basis(normal: Vec3) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal (u, v) with u x v = normal."""
    n = np.asarray(normal, dtype=float)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(n)))] = 1.0
    u = helper - np.dot(helper, n) * n
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v
