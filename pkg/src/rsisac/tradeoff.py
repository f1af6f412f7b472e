"""
Sweeps over each scheme's control knob and the resulting trade-off frontiers.

A frontier is the upper-right convex hull of achievable (R_est, R_c) points;
segments between vertices are time-sharing mixtures of the two endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import bounds
from .bounds import RatePoint, Scheme
from .linkbudget import SystemParams, comm_power_gain, derive

DEFAULT_ALPHA_POINTS = 2001
DEFAULT_MU_POINTS = 2001
DEFAULT_NOMA_POINTS = 201


@dataclass(frozen=True)
class BoundCurve:
    points: list
    scheme: Scheme
    knob_grid: np.ndarray

    def __post_init__(self):
        if len(self.points) != len(self.knob_grid):
            raise ValueError("one point per knob value required")
        if np.any(np.diff(self.knob_grid) <= 0):
            raise ValueError("knob grid must be strictly increasing")

    @property
    def r_est(self) -> np.ndarray:
        return np.array([p.r_est_bps for p in self.points])

    @property
    def r_c(self) -> np.ndarray:
        return np.array([p.r_c_bps for p in self.points])


@dataclass(frozen=True)
class Frontier:
    """Hull vertices ordered by decreasing R_est (and increasing R_c)."""

    hull_points: list

    def value_at(self, r_est: float) -> float:
        """Frontier height at ``r_est``; -inf beyond the largest R_est vertex."""
        xs = np.array([p.r_est_bps for p in self.hull_points])[::-1]
        ys = np.array([p.r_c_bps for p in self.hull_points])[::-1]
        if r_est > xs[-1]:
            return -np.inf
        if r_est <= xs[0]:
            return float(ys[0])
        return float(np.interp(r_est, xs, ys))

    def area(self) -> float:
        """
        Area of the downward-closed region under the frontier.

        Points may always be degraded, so the region extends flat from the
        max-R_c vertex to R_est = 0 and drops to R_c = 0 at the max-R_est one.
        """
        xs = np.array([p.r_est_bps for p in self.hull_points])[::-1]
        ys = np.array([p.r_c_bps for p in self.hull_points])[::-1]
        return float(xs[0] * ys[0] + np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))


def _grid(values, lo: float, hi: float, name: str) -> np.ndarray:
    g = np.asarray(values, dtype=float).ravel()
    if g.size == 0:
        raise ValueError(f"{name} grid is empty")
    if np.any(~np.isfinite(g)) or np.any(g < lo) or np.any(g > hi):
        raise ValueError(f"{name} grid must lie in [{lo}, {hi}]")
    g = np.sort(g)
    if np.any(np.diff(g) == 0):
        raise ValueError(f"{name} grid has duplicate values")
    return g


def _curve(scheme: Scheme, grid: np.ndarray, r_est, r_c) -> BoundCurve:
    r_est = np.broadcast_to(r_est, grid.shape)
    r_c = np.broadcast_to(r_c, grid.shape)
    pts = [RatePoint(float(e), float(c), scheme, float(k)) for k, e, c in zip(grid, r_est, r_c)]
    return BoundCurve(points=pts, scheme=scheme, knob_grid=grid)


def sweep_rs(params: SystemParams, alpha_grid) -> BoundCurve:
    """RS inner bound over the power split. The grid is evaluated in sorted order."""
    grid = _grid(alpha_grid, 0.0, 1.0, "alpha")
    d = derive(params)
    r_est, r_c = bounds.rs_rates(d, grid, params.comm_power_w, params.radar_power_w)
    return _curve(Scheme.RS, grid, r_est, r_c)


def sweep_oma(params: SystemParams, mu_grid) -> BoundCurve:
    grid = _grid(mu_grid, 0.0, 1.0, "mu")
    d = derive(params)
    r_est, r_c = bounds.oma_rates(d, grid, params.comm_power_w, params.radar_power_w)
    return _curve(Scheme.OMA, grid, r_est, r_c)


def sweep_noma(params: SystemParams, power_grid) -> BoundCurve:
    """NOMA inner bound; ``power_grid`` holds fractions of P_c in [0, 1]."""
    grid = _grid(power_grid, 0.0, 1.0, "power fraction")
    d = derive(params)
    p_c = params.comm_power_w
    r_est, r_c = bounds.noma_rates(d, grid * p_c, p_c, params.radar_power_w)
    return _curve(Scheme.NOMA, grid, r_est, r_c)


def sweep(params: SystemParams, scheme, n_points: int | None = None) -> BoundCurve:
    """Sweep one scheme over its default uniform grid."""
    scheme = Scheme(scheme)
    if scheme is Scheme.RS:
        return sweep_rs(params, np.linspace(0.0, 1.0, n_points or DEFAULT_ALPHA_POINTS))
    if scheme is Scheme.OMA:
        return sweep_oma(params, np.linspace(0.0, 1.0, n_points or DEFAULT_MU_POINTS))
    return sweep_noma(params, np.linspace(0.0, 1.0, n_points or DEFAULT_NOMA_POINTS))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def upper_convex_hull(points) -> Frontier:
    """
    Upper-right convex hull of rate points (monotone chain).

    Collinear interior points are dropped. Among points sharing the largest
    R_est, the one with the larger R_c is kept, and vice versa.
    """
    pts = list(points)
    if not pts:
        raise ValueError("at least one point required")
    pts.sort(key=lambda p: (p.r_est_bps, p.r_c_bps))
    upper = []
    for p in pts:
        xy = (p.r_est_bps, p.r_c_bps)
        while len(upper) >= 2 and _cross(
            (upper[-2].r_est_bps, upper[-2].r_c_bps), (upper[-1].r_est_bps, upper[-1].r_c_bps), xy
        ) >= 0:
            upper.pop()
        if upper and (upper[-1].r_est_bps, upper[-1].r_c_bps) == xy:
            continue
        upper.append(p)
    # keep the part that descends from the highest vertex to the rightmost one
    top = max(range(len(upper)), key=lambda i: (upper[i].r_c_bps, upper[i].r_est_bps))
    return Frontier(hull_points=upper[top:][::-1])


def combined_frontier(curves) -> Frontier:
    return upper_convex_hull([p for c in curves for p in c.points])


def sweep_alpha_vs_range(params: SystemParams, range_grid_m) -> list:
    """(range_m, alpha_raw, alpha_clamped) for each user range."""
    grid = np.asarray(range_grid_m, dtype=float).ravel()
    if grid.size == 0 or np.any(~np.isfinite(grid)) or np.any(grid <= 0):
        raise ValueError("ranges must be positive and finite")
    d = derive(params)
    out = []
    for r in grid:
        dr = _with_comm_gain(d, comm_power_gain(params, float(r)))
        opt = bounds.alpha_opt(dr, params.comm_power_w, params.radar_power_w)
        out.append((float(r), opt.raw, opt.clamped))
    return out


def _with_comm_gain(d, gain):
    return replace(d, comm_power_gain=gain)


def grid_argmax_alpha(params: SystemParams, step: float = 1e-5, comm_range_m: float | None = None) -> float:
    """Brute-force maximiser of R_c1 + R_c2 on a uniform alpha grid."""
    d = derive(params)
    if comm_range_m is not None:
        d = _with_comm_gain(d, comm_power_gain(params, comm_range_m))
    n = int(round(1.0 / step)) + 1
    grid = np.linspace(0.0, 1.0, n)
    split = bounds.PowerSplit.from_alpha(grid, params.comm_power_w)
    total = bounds.dir_rs(d, split, params.radar_power_w).total_bps
    return float(grid[int(np.argmax(total))])
