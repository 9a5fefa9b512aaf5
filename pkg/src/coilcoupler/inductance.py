"""Mutual and self inductance of filaments and coils, and system L / k matrices.

Two independent routes compute filament mutual inductance:

* ``filament_mutual`` integrates the closed-form vector potential of one loop
  along the other with composite Gauss-Legendre panels (coaxial pairs use
  Maxwell's closed form directly);
* ``neumann_mutual_oracle`` brute-forces the double line integral with the
  product trapezoidal rule. It exists for cross-checking only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .elliptic import coupling_kernel
from .errors import ConvergenceError, SingularityError, SolverError
from .geometry import CoilSpec, FilamentLoop, FilamentSet, decompose_coil, in_plane_basis

MU0 = 4e-7 * math.pi
"""[H/m]"""

_TOUCH_DISTANCE = 1e-9  # [m]
_COAXIAL_TOL = 1e-9
_PANEL_ORDER = 16


@dataclass(frozen=True)
class SolverSettings:
    radial_cells: int = 4
    axial_cells: int = 1
    rtol: float = 1e-9
    """relative change between successive quadrature levels that ends refinement"""
    max_nodes: int = 8192


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True, eq=False)
class InductanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    """[H] symmetric, L on the diagonal and M off it"""

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    """signed k; diagonal is exactly 1"""

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


# -- filament pairs ---------------------------------------------------------


def filament_mutual_coaxial(r1: float, r2: float, d: float) -> float:
    """Maxwell's formula for two coaxial circular filaments [H].

    With m = kappa^2 = 4 r1 r2 / ((r1 + r2)^2 + d^2),
    M = mu0 sqrt(r1 r2) [(2/kappa - kappa) K(m) - (2/kappa) E(m)], which
    rearranges to mu0 sqrt((r1 + r2)^2 + d^2) [(1 - m/2) K(m) - E(m)].
    """
    if not (r1 > 0 and r2 > 0):
        raise ValueError("filament radii must be positive")
    s2 = (r1 + r2) ** 2 + d * d
    m = 4.0 * r1 * r2 / s2
    if m >= 1.0 - 1e-12:
        raise SingularityError(f"coaxial filaments touch (r1={r1}, r2={r2}, d={d})")
    return MU0 * math.sqrt(s2) * float(coupling_kernel(m))


def _loop_points(loop: FilamentLoop, t: np.ndarray):
    u, v = in_plane_basis(loop.normal)
    cos_t, sin_t = np.cos(t)[:, None], np.sin(t)[:, None]
    pts = np.asarray(loop.center) + loop.radius * (cos_t * u + sin_t * v)
    tangent = loop.radius * (cos_t * v - sin_t * u)
    return pts, tangent


def neumann_mutual_oracle(a: FilamentLoop, b: FilamentLoop, nodes: int = 512) -> float:
    """Brute-force Neumann double integral by the product trapezoidal rule [H]."""
    if nodes < 8:
        raise ValueError("nodes must be >= 8")
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    pa, ta = _loop_points(a, t)
    pb, tb = _loop_points(b, t)
    h2 = (2.0 * np.pi / nodes) ** 2
    total = 0.0
    min_dist = np.inf
    chunk = max(1, 2**20 // nodes)
    for start in range(0, nodes, chunk):
        sl = slice(start, start + chunk)
        diff = pa[sl, None, :] - pb[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        min_dist = min(min_dist, float(dist.min()))
        dots = ta[sl] @ tb.T
        total += float(np.sum(dots / dist))
    if min_dist < _TOUCH_DISTANCE:
        raise SingularityError(f"loops come within {min_dist:.3g} m of each other")
    return MU0 / (4.0 * np.pi) * h2 * total


@lru_cache(maxsize=None)
def _panel_rule(panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_PANEL_ORDER)
    half = np.pi / panels
    mids = (2.0 * np.arange(panels) + 1.0) * half
    t = (mids[:, None] + half * x[None, :]).ravel()
    wt = np.tile(half * w, panels)
    t.flags.writeable = False
    wt.flags.writeable = False
    return t, wt


def _flux_integrand(source: FilamentLoop, path_pts: np.ndarray, path_tangent: np.ndarray) -> np.ndarray:
    """A_phi of `source` (per ampere) dotted with the path tangent, at each node."""
    n = np.asarray(source.normal)
    a = source.radius
    rel = path_pts - np.asarray(source.center)
    z = rel @ n
    rho_vec = rel - z[:, None] * n
    rho = np.sqrt(np.einsum("ij,ij->i", rho_vec, rho_vec))
    gap = np.sqrt((rho - a) ** 2 + z * z)
    if gap.min() < _TOUCH_DISTANCE:
        raise SingularityError(f"filaments come within {gap.min():.3g} m of each other")
    s2 = (a + rho) ** 2 + z * z
    m = 4.0 * a * rho / s2
    if m.max() >= 1.0:
        raise SingularityError("filaments touch")
    # A_phi / I = mu0/(2 pi) * sqrt(s2) / rho * G(m); phi_hat = n x rho_vec / rho
    circ = np.einsum("ij,ij->i", np.cross(n, rho_vec), path_tangent)
    safe_rho2 = np.where(rho > 0.0, rho * rho, 1.0)
    vals = MU0 / (2.0 * np.pi) * np.sqrt(s2) * coupling_kernel(m) * circ / safe_rho2
    return np.where(rho > 0.0, vals, 0.0)


def _wire_gap(source: FilamentLoop, pts: np.ndarray) -> np.ndarray:
    n = np.asarray(source.normal)
    rel = pts - np.asarray(source.center)
    z = rel @ n
    rho = np.linalg.norm(rel - z[:, None] * n, axis=1)
    return np.hypot(rho - source.radius, z)


def _min_gap(source: FilamentLoop, path: FilamentLoop, coarse: int = 64, zooms: int = 8) -> float:
    """Smallest distance from `path` to the wire of `source`, or a lower bound on it.

    The gap changes no faster than arc length, so a uniform scan whose every
    sample clears half the node spacing rules out contact. Otherwise the
    bracket around the best node is resampled until it is tiny.
    """
    t = 2.0 * np.pi * np.arange(coarse) / coarse
    gap = _wire_gap(source, _loop_points(path, t)[0])
    best = int(np.argmin(gap))
    low = float(gap[best])
    half = 2.0 * np.pi / coarse
    if low > path.radius * half:
        return low - path.radius * half / 2
    centre = t[best]
    for _ in range(zooms):
        t = np.linspace(centre - half, centre + half, 33)
        gap = _wire_gap(source, _loop_points(path, t)[0])
        best = int(np.argmin(gap))
        centre, half = t[best], 2.0 * half / 32
        low = min(low, float(gap[best]))
    return low


def _loop_key(loop: FilamentLoop):
    return (loop.radius, loop.center, loop.normal)


def _coaxial_separation(a: FilamentLoop, b: FilamentLoop) -> float | None:
    """Signed axial offset if the loops share an axis, else None."""
    na, nb = np.asarray(a.normal), np.asarray(b.normal)
    if np.linalg.norm(np.cross(na, nb)) > _COAXIAL_TOL:
        return None
    rel = np.asarray(b.center) - np.asarray(a.center)
    d = float(rel @ na)
    lateral = np.linalg.norm(rel - d * na)
    if lateral > _COAXIAL_TOL * max(a.radius, b.radius):
        return None
    return d


def filament_mutual(
    a: FilamentLoop,
    b: FilamentLoop,
    rtol: float = DEFAULT_SETTINGS.rtol,
    max_nodes: int = DEFAULT_SETTINGS.max_nodes,
) -> float:
    """Mutual inductance of two unit-weight filaments in any relative pose [H].

    Coaxial pairs go straight to the closed form. Otherwise the source
    loop's vector potential is integrated along the smaller loop with
    composite 16-point Gauss-Legendre panels, doubling the node count from
    32 until two successive levels agree to `rtol`.
    """
    d = _coaxial_separation(a, b)
    if d is not None:
        sign = 1.0 if np.dot(a.normal, b.normal) > 0 else -1.0
        return sign * filament_mutual_coaxial(a.radius, b.radius, d)

    # the pair is unordered; fixing the roles makes M(a, b) == M(b, a) exactly
    source, path = (a, b) if _loop_key(a) >= _loop_key(b) else (b, a)
    gap = _min_gap(source, path)
    if gap < _TOUCH_DISTANCE:
        raise SingularityError(f"filaments come within {gap:.3g} m of each other")
    previous = None
    nodes = 2 * _PANEL_ORDER
    while nodes <= max_nodes:
        t, w = _panel_rule(nodes // _PANEL_ORDER)
        pts, tangent = _loop_points(path, t)
        f = _flux_integrand(source, pts, tangent)
        value = float(w @ f)
        if previous is not None:
            floor = 1e-6 * float(w @ np.abs(f))
            if abs(value - previous) <= rtol * max(abs(value), floor):
                return value
        previous = value
        nodes *= 2
    raise ConvergenceError(
        f"mutual inductance quadrature did not converge within {max_nodes} nodes"
    )


def loop_self_inductance(radius: float, gmd_radius: float) -> float:
    """mu0 r (ln(8 r / g) - 2 + 1/4) for a thin loop, uniform current [H]."""
    if not radius > 0 or not 0 < gmd_radius < radius / 2:
        raise ValueError("need radius > 0 and 0 < gmd_radius < radius / 2")
    return MU0 * radius * (math.log(8.0 * radius / gmd_radius) - 2.0 + 0.25)


# -- coils ------------------------------------------------------------------


def coil_mutual(a: FilamentSet, b: FilamentSet, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    total = 0.0
    for p in a.loops:
        for q in b.loops:
            total += p.weight * q.weight * filament_mutual(p, q, settings.rtol, settings.max_nodes)
    return total


def coil_self(a: FilamentSet, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    if not a.loops:
        raise ValueError("empty filament set")
    loops = a.loops
    total = 0.0
    for p in loops:
        total += p.weight * p.weight * loop_self_inductance(p.radius, p.gmd_radius)
    for i, p in enumerate(loops):
        for q in loops[i + 1 :]:
            total += 2.0 * p.weight * q.weight * filament_mutual(p, q, settings.rtol, settings.max_nodes)
    return total


def self_inductances(coils: Sequence[CoilSpec], settings: SolverSettings = DEFAULT_SETTINGS) -> list[float]:
    return [coil_self(decompose_coil(c, settings.radial_cells, settings.axial_cells), settings) for c in coils]


def coils_overlap(a: CoilSpec, b: CoilSpec) -> bool:
    """True when the winding volumes of two parallel-axis coils intersect.

    Tilted pairs are not tested here; touching filaments still raise
    SingularityError during integration.
    """
    na, nb = np.asarray(a.pose.axis), np.asarray(b.pose.axis)
    if np.linalg.norm(np.cross(na, nb)) > _COAXIAL_TOL:
        return False
    rel = np.asarray(b.pose.center) - np.asarray(a.pose.center)
    axial = abs(float(rel @ na))
    if axial >= 0.5 * (a.height + b.height):
        return False
    s = float(np.linalg.norm(rel - (rel @ na) * na))
    if a.inner_radius <= s <= a.outer_radius:
        near = 0.0
    else:
        near = min(abs(s - a.inner_radius), abs(s - a.outer_radius))
    far = s + a.outer_radius
    return near < b.outer_radius and far > b.inner_radius


def pair_mutual(
    a: CoilSpec,
    b: CoilSpec,
    sa: FilamentSet,
    sb: FilamentSet,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> float:
    """coil_mutual with an overlap check; errors name the offending pair."""
    if coils_overlap(a, b):
        raise SingularityError(f"coils {a.label!r} and {b.label!r} overlap")
    try:
        return coil_mutual(sa, sb, settings)
    except SingularityError as exc:
        raise SingularityError(f"coils {a.label!r} and {b.label!r} overlap: {exc}") from exc


def system_matrices(
    coils: Sequence[CoilSpec],
    settings: SolverSettings = DEFAULT_SETTINGS,
    known: dict[tuple[int, int], float] | None = None,
) -> tuple[InductanceMatrix, CouplingMatrix]:
    """Full L and k matrices for a set of coils.

    `known` maps (i, j) with i <= j to entries already computed elsewhere
    (self inductances, pairs of coils that did not move); those are reused.
    """
    if len(coils) < 1:
        raise ValueError("at least one coil required")
    labels = tuple(c.label for c in coils)
    known = known or {}
    n = len(coils)
    sets = None
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if (i, j) in known:
                L[i, j] = L[j, i] = known[(i, j)]
                continue
            if sets is None:
                sets = [decompose_coil(c, settings.radial_cells, settings.axial_cells) for c in coils]
            if i == j:
                L[i, i] = coil_self(sets[i], settings)
                continue
            L[i, j] = L[j, i] = pair_mutual(coils[i], coils[j], sets[i], sets[j], settings)
    return InductanceMatrix(labels, L), coupling_from_inductance(labels, L)


def coupling_from_inductance(labels: tuple[str, ...], L: np.ndarray) -> CouplingMatrix:
    diag = np.diag(L)
    if np.any(diag <= 0):
        raise SolverError("self inductance must be positive")
    k = L / np.sqrt(np.outer(diag, diag))
    np.fill_diagonal(k, 1.0)
    off = k[~np.eye(len(diag), dtype=bool)]
    if off.size and np.max(np.abs(off)) >= 1.0:
        raise SolverError("|k| >= 1 between distinct coils; geometry is unphysical")
    return CouplingMatrix(labels, k)
