"""Scenario orchestration: wire a config through the solvers to files.

``run_scenario`` builds the discrete operator, generates the target
trajectory, runs either a fixed-horizon solve or a minimal-time
bisection, and writes three artifacts into the output directory:

* ``trajectory.csv``   controlled state, long format ``t,x,z``
* ``control.csv``      synthesized control, long format ``t,x,u``
* ``summary.json``     resolved config, spectral data, solve outcome

With ``emit_plots`` it also writes three self-contained plot scripts
(state evolution, control heatmap, impulse map) that render the CSV and
JSON artifacts with matplotlib; no rendering happens during the run.

Two runs with the same config produce byte-identical ``summary.json``
except for the ``wall_time_seconds`` entry.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assembly import build_operator
from .config import ScenarioConfig
from .control import (
    AtomicityReport,
    ControlProblem,
    control_to_csv,
    impulse_analysis,
    make_problem,
    minimal_time_search,
    solve_constrained_fixed_time,
    solve_unconstrained_Linf,
)
from .dynamics import make_control, simulate, trajectory_to_csv
from .errors import ConfigError
from .grid import build_grid
from .spectral import eigendecompose, spectral_report

__all__ = [
    "ScenarioResult",
    "run_scenario",
    "build_problem_from_config",
]


@dataclass(frozen=True)
class ScenarioResult:
    """Artifacts of one scenario run.

    Attributes
    ----------
    summary : dict
        The content written to summary.json.
    output_dir : Path
        Directory the files were written into.
    files : tuple of str
        Names of the files written, in write order.
    """

    summary: dict
    output_dir: Path
    files: tuple[str, ...]


def _cosine_profile(grid) -> np.ndarray:
    return np.cos(np.pi * grid.interior_nodes / 2.0)


def build_problem_from_config(config: ScenarioConfig) -> ControlProblem:
    """Instantiate the control problem a config describes.

    The initial datum and the target's initial datum are cosine profiles
    scaled by the configured amplitudes; the nominal horizon is the fixed
    horizon or the bracket's upper end.

    Parameters
    ----------
    config : ScenarioConfig

    Returns
    -------
    ControlProblem
    """
    grid = build_grid(config.n_x)
    op = build_operator(grid, s=config.s, normalization=config.normalization)
    profile = _cosine_profile(grid)
    if config.horizon.kind == "fixed":
        T_nominal = config.horizon.T
    else:
        T_nominal = config.horizon.bracket[1]
    return make_problem(
        op,
        config.z0_amplitude * profile,
        config.zhat0_amplitude * profile,
        uhat=config.uhat,
        omega=config.omega,
        T_nominal=T_nominal,
        n_t=config.n_t,
        nonneg_control=config.nonneg_control,
        nonneg_state=config.nonneg_state,
        nu=config.nu,
    )


def _atomicity_dict(report: AtomicityReport) -> dict:
    return {
        "total_mass": report.total_mass,
        "active_cell_fraction": report.active_cell_fraction,
        "top_impulses": [
            {"x": imp[0], "t": imp[1], "mass": imp[2]} for imp in report.top_impulses
        ],
    }


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run one scenario and write its artifacts.

    Parameters
    ----------
    config : ScenarioConfig
        Fully resolved configuration, e.g. from :func:`parse_config`.

    Returns
    -------
    ScenarioResult

    Raises
    ------
    ConfigError
        Minimal-time mode with the control nonnegativity constraint
        disabled (the searched-for transition does not exist then).
    SolverError
        Propagated from the bisection when the bracket is invalid or the
        probe budget is exhausted.
    OSError
        When the output directory or a file cannot be written.
    """
    t_start = time.perf_counter()
    # claim the output directory before solving so I/O problems surface
    # in milliseconds, not after a long bisection
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    problem = build_problem_from_config(config)
    op = problem.op
    grid = op.grid

    k_max = min(8, op.n_dof)
    basis = eigendecompose(op, k_max=k_max)
    spec = spectral_report(basis, config.omega)

    summary: dict = {
        "resolved_config": config.to_dict(),
        "seed": config.seed,
        "lambda": spec["eigenvalues"],
        "min_gap": spec["min_gap"],
        "beta_hat": spec["beta_hat"],
    }

    if config.horizon.kind == "fixed":
        T = config.horizon.T
        if config.nonneg_control:
            outcome = solve_constrained_fixed_time(problem, T, config.n_t)
            control = outcome.control
            summary["feasible"] = outcome.feasible
            summary["final_residual"] = outcome.final_residual
            summary["iterations"] = outcome.iterations
        else:
            control = solve_unconstrained_Linf(problem, T, config.n_t)
            traj_u = simulate(op, problem.z0, control, T, config.n_t)
            target = problem.target_at(T, config.n_t)
            diff = traj_u.final - target.final
            m = np.diag(op.mass_lumped)
            residual = float(np.sqrt(diff @ (m * diff)))
            scale = float(np.sqrt(target.final @ (m * target.final)))
            summary["feasible"] = bool(residual <= 1e-3 * scale)
            summary["final_residual"] = residual
        # signed controls (unconstrained solver) are analyzed through |u|
        atom_control = control
        if control.values.min() < 0.0:
            atom_control = make_control(
                grid, config.omega, config.n_t, values=np.abs(control.values)
            )
        atomicity = impulse_analysis(
            atom_control, dt=T / config.n_t, dx=grid.h, threshold=0.01
        )
    else:
        if not config.nonneg_control:
            raise ConfigError(
                "constraints.nonneg_control: minimal_time mode requires the "
                "control nonnegativity constraint (without it every horizon "
                "is feasible and no transition exists)"
            )
        report = minimal_time_search(
            problem, config.horizon.bracket, config.horizon.tol, config.n_t
        )
        T = report.T_hi
        control = report.control
        atomicity = report.atomicity
        summary["feasible"] = True
        summary["T_min_estimate"] = report.T_min_estimate
        summary["T_lo"] = report.T_lo
        summary["T_hi"] = report.T_hi
        summary["history"] = [
            {"T": probe_T, "feasible": ok, "residual": res}
            for probe_T, ok, res in report.history
        ]

    summary["atomicity"] = _atomicity_dict(atomicity)

    files: list[str] = []

    traj = simulate(op, problem.z0, control, T, config.n_t)
    trajectory_to_csv(traj, grid, outdir / "trajectory.csv")
    files.append("trajectory.csv")

    control_to_csv(control, grid, T, outdir / "control.csv")
    files.append("control.csv")

    if config.emit_plots:
        for name, text in _plot_scripts().items():
            (outdir / name).write_text(text, encoding="utf-8")
            files.append(name)

    summary["wall_time_seconds"] = time.perf_counter() - t_start
    with open(outdir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    files.append("summary.json")

    return ScenarioResult(summary=summary, output_dir=outdir, files=tuple(files))


_PLOT_STATE = '''\
"""Render the state evolution from trajectory.csv as a space-time map."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "trajectory.csv"))))
t = np.array([float(r["t"]) for r in rows])
x = np.array([float(r["x"]) for r in rows])
z = np.array([float(r["z"]) for r in rows])
ts, xs = np.unique(t), np.unique(x)
grid = z.reshape(len(ts), len(xs))
fig, ax = plt.subplots(figsize=(7, 4))
pc = ax.pcolormesh(ts, xs, grid.T, shading="nearest", cmap="viridis")
fig.colorbar(pc, ax=ax, label="z(t, x)")
ax.set_xlabel("t")
ax.set_ylabel("x")
ax.set_title("controlled state evolution")
fig.tight_layout()
fig.savefig(os.path.join(here, "state_evolution.png"), dpi=150)
print("wrote state_evolution.png")
'''

_PLOT_CONTROL = '''\
"""Render the control from control.csv as a space-time heatmap."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "control.csv"))))
t = np.array([float(r["t"]) for r in rows])
x = np.array([float(r["x"]) for r in rows])
u = np.array([float(r["u"]) for r in rows])
ts, xs = np.unique(t), np.unique(x)
grid = u.reshape(len(ts), len(xs))
fig, ax = plt.subplots(figsize=(7, 4))
pc = ax.pcolormesh(ts, xs, grid.T, shading="nearest", cmap="magma")
fig.colorbar(pc, ax=ax, label="u(t, x)")
ax.set_xlabel("t")
ax.set_ylabel("x")
ax.set_title("control heatmap")
fig.tight_layout()
fig.savefig(os.path.join(here, "control_heatmap.png"), dpi=150)
print("wrote control_heatmap.png")
'''

_PLOT_IMPULSE = '''\
"""Render the dominant control impulses from summary.json."""
import json
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
summary = json.load(open(os.path.join(here, "summary.json")))
atom = summary["atomicity"]
imps = atom["top_impulses"]
fig, ax = plt.subplots(figsize=(6, 4))
if imps:
    biggest = max(imp["mass"] for imp in imps)
    sizes = [600.0 * imp["mass"] / biggest for imp in imps]
    ax.scatter([imp["t"] for imp in imps], [imp["x"] for imp in imps],
               s=sizes, c="crimson", alpha=0.8, edgecolors="black")
ax.set_xlabel("t")
ax.set_ylabel("x")
ax.set_title(
    "dominant impulses (active fraction %.3f)" % atom["active_cell_fraction"]
)
fig.tight_layout()
fig.savefig(os.path.join(here, "impulse_map.png"), dpi=150)
print("wrote impulse_map.png")
'''


def _plot_scripts() -> dict[str, str]:
    return {
        "plot_state_evolution.py": _PLOT_STATE,
        "plot_control_heatmap.py": _PLOT_CONTROL,
        "plot_impulse_map.py": _PLOT_IMPULSE,
    }
