"""Risk-level grids for the augmented state space.

The augmenting coordinates (x, y) live in (0,1]^2 and evolve multiplicatively
(x -> x/xi, y -> y*xi), so their product is invariant and grids are spaced
geometrically. From initial levels (x0, y0) every reachable point satisfies
x*y = x0*y0 and x, y in [x0*y0, 1], which the default 1-D manifold grid covers
exactly; the full 2-D grid is kept for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .risk import RiskLevels


class GridMode(Enum):
    FULL2D = "full2d"
    MANIFOLD1D = "manifold"


class Interpolation(Enum):
    LOG_BILINEAR = "log_bilinear"
    NEAREST_NODE = "nearest_node"


@dataclass(frozen=True)
class RiskGrid:
    """Discretization of the risk-level coordinates.

    Manifold mode: ``x_points`` are the nodes along x and ``y_points[i] =
    manifold_constant / x_points[i]`` (stored explicitly so the initial point
    is representable bit-exactly). Full2D mode: ``x_points`` and ``y_points``
    are independent per-dimension grids and nodes are their product, flattened
    row-major (x outer, y inner).
    """

    mode: GridMode
    x_points: np.ndarray
    y_points: np.ndarray
    manifold_constant: float

    def __post_init__(self) -> None:
        for pts in (self.x_points, self.y_points):
            if pts.ndim != 1 or pts.size == 0:
                raise ValueError("grid dimensions must be nonempty 1-D arrays")
            if np.any(pts <= 0.0) or np.any(pts > 1.0 + 1e-12):
                raise ValueError("grid points must lie in (0, 1]")
            if np.any(np.diff(pts) <= 0.0):
                raise ValueError("grid points must be strictly increasing")

    @property
    def n_nodes(self) -> int:
        if self.mode is GridMode.MANIFOLD1D:
            return self.x_points.size
        return self.x_points.size * self.y_points.size

    def node_levels(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) coordinates of every node, flattened."""
        if self.mode is GridMode.MANIFOLD1D:
            return self.x_points.copy(), self.y_points.copy()
        xs = np.repeat(self.x_points, self.y_points.size)
        ys = np.tile(self.y_points, self.x_points.size)
        return xs, ys

    def nearest_node(self, levels: RiskLevels) -> int:
        """Index of the node closest to ``levels`` in log-distance."""
        if self.mode is GridMode.MANIFOLD1D:
            return _nearest_log(self.x_points, levels.x)
        i = _nearest_log(self.x_points, levels.x)
        j = _nearest_log(self.y_points, levels.y)
        return i * self.y_points.size + j

    def covers(self, levels: RiskLevels, rtol: float = 1e-6) -> bool:
        """Whether ``levels`` lies on the covered manifold / rectangle (up to clamping)."""
        if self.mode is GridMode.MANIFOLD1D:
            return abs(levels.x * levels.y - self.manifold_constant) <= rtol * max(
                self.manifold_constant, 1e-300
            )
        return True


def _nearest_log(points: np.ndarray, value: float) -> int:
    logs = np.log(points)
    q = np.log(max(value, 1e-300))
    i = int(np.searchsorted(logs, q))
    if i <= 0:
        return 0
    if i >= logs.size:
        return logs.size - 1
    # Ties go to the lower node for determinism.
    return i - 1 if q - logs[i - 1] <= logs[i] - q else i


def _geometric(lower: float, n_points: int) -> np.ndarray:
    pts = np.exp(np.linspace(np.log(lower), 0.0, n_points))
    pts[0] = lower
    pts[-1] = 1.0
    return pts


def _snap(points: np.ndarray, target: float) -> np.ndarray:
    """Make ``target`` an exact node, replacing the nearest interior node.

    Endpoints are preserved; if the nearest node is an endpoint (or there is
    no interior node), ``target`` is inserted instead.
    """
    i = _nearest_log(points, target)
    if abs(points[i] - target) <= 1e-12 * target:
        out = points.copy()
        out[i] = target
        return out
    if 0 < i < points.size - 1:
        out = points.copy()
        out[i] = target
        return out
    return np.sort(np.append(points, target))


def build_risk_grid(
    levels0: RiskLevels,
    n_points: int,
    mode: GridMode = GridMode.MANIFOLD1D,
    snap_initial: bool = True,
) -> RiskGrid:
    """Geometric grid on [c, 1] with c = x0*y0, per dimension or along the manifold.

    When x0 = 1 or y0 = 1 the envelope forces xi = 1 and the level dynamics
    freeze, so the grid degenerates to the single node (x0, y0). With
    ``snap_initial`` the node nearest to the initial point is moved onto it so
    the solver evaluates the value function exactly there.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    x0, y0 = levels0.x, levels0.y
    c = x0 * y0
    if x0 == 1.0 or y0 == 1.0:
        return RiskGrid(mode, np.array([x0]), np.array([y0]), c)
    xs = _geometric(c, n_points)
    if mode is GridMode.MANIFOLD1D:
        if snap_initial:
            xs = _snap(xs, x0)
        ys = c / xs
        i0 = int(np.argmin(np.abs(xs - x0)))
        if xs[i0] == x0:
            ys[i0] = y0
        return RiskGrid(mode, xs, ys, c)
    ys = _geometric(c, n_points)
    if snap_initial:
        xs = _snap(xs, x0)
        ys = _snap(ys, y0)
    return RiskGrid(mode, xs, ys, c)
