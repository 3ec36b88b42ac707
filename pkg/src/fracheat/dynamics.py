"""Time integration of the controlled fractional heat equation.

Marches the semi-discrete system M dz/dt + K z = M (u restricted to the
control region) with explicit or implicit Euler on a uniform time grid,
with piecewise-constant-in-time controls on right-open cells.  Also
provides the exact modal (Duhamel) solution used as a cross-check oracle,
target-trajectory generation, and a positivity monitor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .assembly import DiscreteOperator
from .errors import CFLError
from .grid import Grid, nodes_in_interval
from .spectral import SpectralBasis

__all__ = [
    "Trajectory",
    "ControlField",
    "PositivityReport",
    "make_control",
    "simulate",
    "duhamel_spectral",
    "generate_target_trajectory",
    "positivity_check",
    "trajectory_to_csv",
]


@dataclass(frozen=True)
class Trajectory:
    """States of a time-marched solution on a uniform time grid.

    Attributes
    ----------
    times : ndarray, shape (n_t + 1,)
        Uniform grid t_j = j T / n_t with times[-1] = T exactly.
    states : ndarray, shape (n_t + 1, n_interior)
        Row j holds the nodal values at t_j; row 0 is the initial datum.
    min_value : float
        Minimum entry over all rows.
    """

    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    min_value: float

    @property
    def n_t(self) -> int:
        return len(self.times) - 1

    @property
    def final(self) -> np.ndarray:
        """Nodal values at the final time."""
        return self.states[-1]


@dataclass(frozen=True)
class ControlField:
    """Piecewise-constant-in-time control supported on a subinterval.

    Attributes
    ----------
    values : ndarray, shape (n_support, n_t)
        Rows follow the interior nodes inside omega, columns the time
        cells [t_j, t_{j+1}).
    omega : tuple
        Control region.
    support_mask : ndarray of bool, shape (n_interior,)
        True for interior nodes inside omega.
    """

    values: np.ndarray = field(repr=False)
    omega: tuple[float, float]
    support_mask: np.ndarray = field(repr=False)

    @property
    def n_t(self) -> int:
        return self.values.shape[1]

    def expand(self) -> np.ndarray:
        """Zero-extended control over all interior nodes, shape (n_interior, n_t)."""
        full = np.zeros((self.support_mask.size, self.values.shape[1]))
        full[self.support_mask] = self.values
        return full


@dataclass(frozen=True)
class PositivityReport:
    """Result of scanning a trajectory for negative entries."""

    min_value: float
    first_violation: tuple[int, int] | None


def make_control(
    grid: Grid,
    omega: tuple[float, float],
    n_t: int,
    values: np.ndarray | None = None,
) -> ControlField:
    """Build a ControlField on the nodes of omega.

    Parameters
    ----------
    grid : Grid
    omega : (float, float)
        Control region; must contain at least one interior node.
    n_t : int
        Number of time cells.
    values : ndarray, optional
        Either shape (n_support, n_t), a scalar (constant control), or
        None (zero control).
    """
    mask = nodes_in_interval(grid, omega)
    n_sup = int(mask.sum())
    if n_sup == 0:
        raise ValueError(f"control region {omega!r} contains no interior nodes")
    if values is None:
        vals = np.zeros((n_sup, n_t))
    else:
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 0:
            vals = np.full((n_sup, n_t), float(vals))
        if vals.shape != (n_sup, n_t):
            raise ValueError(
                f"control values must have shape ({n_sup}, {n_t}), got {vals.shape}"
            )
    return ControlField(values=vals, omega=(float(omega[0]), float(omega[1])), support_mask=mask)


def _time_grid(T: float, n_t: int) -> np.ndarray:
    times = np.arange(n_t + 1) * (T / n_t)
    times[-1] = T
    return times


def simulate(
    op: DiscreteOperator,
    z0: np.ndarray,
    control: ControlField | None,
    T: float,
    n_t: int,
    scheme: str = "implicit_euler",
    mass_kind: str = "lumped",
) -> Trajectory:
    """March the semi-discrete system over [0, T].

    Parameters
    ----------
    op : DiscreteOperator
    z0 : ndarray, shape (n_interior,)
        Initial nodal values.
    control : ControlField or None
        Piecewise-constant control with n_t cells; None means no forcing.
    T : float
        Final time, positive.
    n_t : int
        Number of time steps.
    scheme : str
        "implicit_euler" (default) solves (M + dt K) z_{j+1} = M (z_j
        + dt u_j); "explicit_euler" uses the lumped-mass forward update
        and enforces the stability bound dt * lambda_max <= 2.
    mass_kind : str
        Mass matrix for the implicit scheme, "lumped" (default, makes the
        step matrix an M-matrix, hence positivity-preserving and
        L-infinity contractive) or "consistent".  The explicit scheme
        always uses the lumped mass.

    Returns
    -------
    Trajectory

    Raises
    ------
    CFLError
        For the explicit scheme when dt * lambda_max > 2; the message
        names the smallest admissible n_t.
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    n = op.n_dof
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (n,):
        raise ValueError(f"z0 must have shape ({n},), got {z0.shape}")
    u_full = None
    if control is not None:
        if control.n_t != n_t:
            raise ValueError(
                f"control has {control.n_t} time cells, simulation has {n_t}"
            )
        u_full = control.expand()

    dt = T / n_t
    K = op.stiffness
    states = np.empty((n_t + 1, n))
    states[0] = z0
    z = z0.copy()

    if scheme == "explicit_euler":
        lam_max = op.lambda_max_lumped
        if dt * lam_max > 2.0:
            n_admissible = int(np.ceil(T * lam_max / 2.0))
            raise CFLError(
                f"explicit Euler unstable: dt*lambda_max = {dt * lam_max:.4g} > 2; "
                f"need n_t >= {n_admissible}"
            )
        m = np.diag(op.mass_lumped)
        for j in range(n_t):
            z = z - dt * (K @ z) / m
            if u_full is not None:
                z = z + dt * u_full[:, j]
            states[j + 1] = z
    elif scheme == "implicit_euler":
        M = op.mass_matrix(mass_kind)
        factor = cho_factor(M + dt * K)
        for j in range(n_t):
            rhs = M @ z
            if u_full is not None:
                rhs = rhs + dt * (M @ u_full[:, j])
            z = cho_solve(factor, rhs)
            states[j + 1] = z
    else:
        raise ValueError(
            f"scheme must be 'explicit_euler' or 'implicit_euler', got {scheme!r}"
        )

    states.setflags(write=False)
    times = _time_grid(T, n_t)
    times.setflags(write=False)
    return Trajectory(times=times, states=states, min_value=float(states.min()))


def duhamel_spectral(
    basis: SpectralBasis,
    z0_coeffs: np.ndarray,
    control_coeffs: np.ndarray | None,
    t: float,
) -> np.ndarray:
    """Exact modal solution by variation of constants.

    Each mode evolves as z_k(t) = z_k(0) e^{-lambda_k t} + integral of
    e^{-lambda_k (t - tau)} u_k(tau); the integral is evaluated in closed
    form for controls that are constant on the uniform cells of [0, t].

    Parameters
    ----------
    basis : SpectralBasis
    z0_coeffs : ndarray, shape (k_max,)
        Modal coefficients of the initial datum.
    control_coeffs : ndarray or None
        Modal control coefficients, shape (n_t, k_max), constant per
        right-open time cell of the uniform partition of [0, t].
    t : float
        Nonnegative evaluation time.

    Returns
    -------
    ndarray, shape (k_max,)
        Modal coefficients of the solution at time t.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    lam = basis.eigenvalues
    out = np.asarray(z0_coeffs, dtype=float) * np.exp(-lam * t)
    if control_coeffs is not None and t > 0:
        u = np.asarray(control_coeffs, dtype=float)
        n_t = u.shape[0]
        edges = np.arange(n_t + 1) * (t / n_t)
        edges[-1] = t
        # integral of e^{-lam (t - tau)} over [t_j, t_{j+1}]
        w = (
            np.exp(-lam[None, :] * (t - edges[1:, None]))
            - np.exp(-lam[None, :] * (t - edges[:-1, None]))
        ) / lam[None, :]
        out = out + (w * u).sum(axis=0)
    return out


def generate_target_trajectory(
    op: DiscreteOperator,
    zhat0: np.ndarray,
    uhat: float,
    omega: tuple[float, float],
    T: float,
    n_t: int,
    scheme: str = "implicit_euler",
) -> Trajectory:
    """Free-running target trajectory with a constant control on omega.

    Parameters
    ----------
    op : DiscreteOperator
    zhat0 : ndarray
        Initial nodal values, strictly positive at every interior node.
    uhat : float
        Constant nonnegative control value applied on omega.
    omega : (float, float)
    T, n_t, scheme
        Passed through to :func:`simulate`.

    Returns
    -------
    Trajectory
        Its final row is the controllability target at time T.
    """
    zhat0 = np.asarray(zhat0, dtype=float)
    if (zhat0 <= 0).any():
        raise ValueError("target initial datum must be strictly positive")
    if uhat < 0:
        raise ValueError(f"uhat must be nonnegative, got {uhat}")
    control = make_control(op.grid, omega, n_t, values=float(uhat))
    return simulate(op, zhat0, control, T, n_t, scheme=scheme)


def positivity_check(traj: Trajectory, tol: float) -> PositivityReport:
    """Scan a trajectory for entries below -tol.

    Returns the global minimum and the first (time index, node index)
    violating the threshold, or None if there is no violation.
    """
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    viol = traj.states < -tol
    first = None
    if viol.any():
        j, i = np.unravel_index(np.argmax(viol), viol.shape)
        first = (int(j), int(i))
    return PositivityReport(min_value=float(traj.states.min()), first_violation=first)


def trajectory_to_csv(traj: Trajectory, grid: Grid, path) -> None:
    """Write a trajectory in long format with header t,x,z.

    Boundary nodes are included with their zero values so each time slice
    covers the full grid.
    """
    x = grid.nodes
    n_t1, _ = traj.states.shape
    full = np.zeros((n_t1, x.size))
    full[:, grid.interior] = traj.states
    t_col = np.repeat(traj.times, x.size)
    x_col = np.tile(x, n_t1)
    z_col = full.ravel()
    data = np.column_stack([t_col, x_col, z_col])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,x,z", comments="")
