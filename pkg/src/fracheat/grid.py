"""Uniform grids on the interval (-1, 1)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform partition of (-1, 1) into ``n_x`` subintervals.

    Attributes
    ----------
    n_x : int
        Number of subintervals.
    nodes : ndarray, shape (n_x + 1,)
        Node coordinates x_i = -1 + 2 i / n_x, including the endpoints.
    h : float
        Mesh size 2 / n_x.
    interior : ndarray, shape (n_x - 1,)
        Indices of the nodes strictly inside (-1, 1).
    """

    n_x: int
    nodes: np.ndarray = field(repr=False)
    h: float
    interior: np.ndarray = field(repr=False)

    @property
    def n_interior(self) -> int:
        """Number of interior degrees of freedom."""
        return self.n_x - 1

    @property
    def interior_nodes(self) -> np.ndarray:
        """Coordinates of the interior nodes."""
        return self.nodes[self.interior]


def build_grid(n_x: int) -> Grid:
    """Build the uniform grid x_i = -1 + 2 i / n_x, i = 0..n_x.

    Parameters
    ----------
    n_x : int
        Number of subintervals; must be at least 2 so that the grid has
        interior degrees of freedom.

    Returns
    -------
    Grid

    Raises
    ------
    ValueError
        If ``n_x < 2``.
    """
    if not isinstance(n_x, (int, np.integer)):
        raise TypeError(f"n_x must be an integer, got {type(n_x).__name__}")
    if n_x < 2:
        raise ValueError(f"n_x must be at least 2 to have interior nodes, got {n_x}")
    n_x = int(n_x)
    nodes = -1.0 + 2.0 * np.arange(n_x + 1) / n_x
    # Pin the endpoints so they are exact regardless of rounding.
    nodes[0] = -1.0
    nodes[-1] = 1.0
    interior = np.arange(1, n_x)
    grid = Grid(n_x=n_x, nodes=nodes, h=2.0 / n_x, interior=interior)
    grid.nodes.setflags(write=False)
    grid.interior.setflags(write=False)
    return grid


def nodes_in_interval(grid: Grid, interval: tuple[float, float]) -> np.ndarray:
    """Interior-DOF mask of nodes lying in the closed interval.

    A node whose hat function overlaps the interval with positive measure on
    both sides contributes a full trapezoid weight; nodes exactly at an
    endpoint are included (they carry half weight in quadrature helpers).

    Parameters
    ----------
    grid : Grid
    interval : (float, float)
        Interval (lo, hi) with -1 <= lo < hi <= 1.

    Returns
    -------
    ndarray of bool, shape (n_interior,)
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (-1.0 <= lo < hi <= 1.0):
        raise ValueError(f"interval must satisfy -1 <= lo < hi <= 1, got ({lo}, {hi})")
    x = grid.interior_nodes
    tol = 1e-12
    return (x >= lo - tol) & (x <= hi + tol)


def trapezoid_weights(grid: Grid, interval: tuple[float, float]) -> np.ndarray:
    """Trapezoid quadrature weights for integrals over a subinterval.

    Each interior node in the closed interval receives ``h/2`` for every
    neighbouring node (including the domain endpoints, where functions
    vanish) that also lies in the interval, so interior runs get weight
    ``h`` and run ends get ``h/2``.  For node-aligned intervals this equals
    exact integration of the piecewise linear interpolant.  The weight
    vector covers all interior DOFs and is zero off the interval, and it is
    elementwise monotone in the interval, so integrals of nonnegative nodal
    functions are monotone in the interval as well.

    Parameters
    ----------
    grid : Grid
    interval : (float, float)
        Interval (lo, hi) with -1 <= lo < hi <= 1.

    Returns
    -------
    ndarray, shape (n_interior,)
    """
    mask = nodes_in_interval(grid, interval)
    if not mask.any():
        raise ValueError(f"interval {interval!r} contains no interior nodes")
    lo, hi = float(interval[0]), float(interval[1])
    tol = 1e-12
    x = grid.nodes
    in_closed = (x >= lo - tol) & (x <= hi + tol)
    left_in = in_closed[:-2]
    right_in = in_closed[2:]
    w = 0.5 * grid.h * mask * (left_in.astype(float) + right_in.astype(float))
    return w
