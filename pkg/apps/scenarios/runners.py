"""Forward runs, gradient checks and optimization runs of a parsed scenario."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from apps.dg_space.space import DGSpace
from apps.mesh_core.mesh_io import write_msh, write_vtk
from apps.optimizer.history import write_history
from apps.optimizer.loop import optimize
from apps.scenarios.exceptions import ScenarioError
from apps.shape_gradient.checks import gradient_check, write_check
from apps.swe_adjoint.weights import TraceTarget
from apps.swe_forward.diagnostics import trajectory_diagnostics, write_diagnostics
from apps.swe_forward.stepping import solve_forward

logger = logging.getLogger(__name__)

CONFIG_NAME = "config.json"
DIAGNOSTICS_NAME = "diagnostics.csv"
CHECK_NAME = "gradcheck.csv"
HISTORY_NAME = "history.csv"
FINAL_MESH_NAME = "final_mesh.msh"
STATE_SNAPSHOT = "state_{:05d}.vtk"
ITERATION_SNAPSHOT = "iteration_{:04d}.vtk"


@dataclass
class ForwardRun:
    trajectory: object
    diagnostics: list
    directory: Path


@dataclass
class CheckRun:
    rows: list
    directory: Path

    @property
    def max_relative_error(self):
        return max((row.relative_error for row in self.rows), default=0.0)


@dataclass
class OptimizationRun:
    result: object
    directory: Path


def prepare_directory(config):
    if config.output.directory is None:
        raise ScenarioError("no output directory configured")
    directory = Path(config.output.directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ScenarioError(f"cannot create {directory}: {exc}") from exc
    config.write(directory / CONFIG_NAME)
    return directory


def build_problem(config, mesh, times=None):
    """ShapeProblem on ``mesh``, recording the reference shore trace when asked to."""
    reference = None
    if config.objective.uses_reference:
        plain = replace(config, objective=replace(config.objective, target=(1.0, 0.0, 0.0)))
        evaluation = plain.problem(times=times).evaluate(mesh)
        reference = TraceTarget(evaluation.forward, evaluation.bathymetry)
        logger.info("Recorded the shore trace of the starting mesh as target")
    return config.problem(reference, times)


def state_fields(space, U, bathymetry):
    vertex_state = space.dg_to_cg(U)
    z = bathymetry.vertex_values
    return {
        "H": vertex_state[:, 0],
        "Q": vertex_state[:, 1:],
        "surface": vertex_state[:, 0] + z,
        "z": z,
    }


def run_forward(config):
    """Solve the forward problem, writing diagnostics and every stride-th state."""
    directory = prepare_directory(config)
    mesh = config.mesh.load()
    space = DGSpace(mesh, order=config.swe.order)
    bathymetry = config.bathymetry(space)
    U0 = config.initial_condition(space, bathymetry)
    stride = config.output.snapshot_stride

    def snapshot(step, U, eps_v):
        eps = np.broadcast_to(np.asarray(eps_v, dtype=float), (space.n_cells,))
        write_vtk(
            mesh,
            directory / STATE_SNAPSHOT.format(step),
            point_data=state_fields(space, U, bathymetry),
            cell_data={"eps_v": eps},
        )

    observer = None
    if stride > 0:
        snapshot(0, U0, 0.0)

        def observer(step, time, U, eps_v):
            if step % stride == 0:
                snapshot(step, U, eps_v)

    trajectory = solve_forward(
        U0, space, config.swe, bathymetry, config.T, config.scheme, observer=observer
    )
    rows = trajectory_diagnostics(trajectory, bathymetry, config.swe.g)
    write_diagnostics(rows, directory / DIAGNOSTICS_NAME)
    return ForwardRun(trajectory=trajectory, diagnostics=rows, directory=directory)


def run_gradcheck(config):
    """Compare the assembled shape derivative with central differences."""
    directory = prepare_directory(config)
    mesh = config.mesh.load()
    problem = build_problem(config, mesh)
    evaluation = problem.evaluate(mesh)
    if config.gradcheck.pinned_times:
        problem = replace(problem, times=tuple(evaluation.forward.times))
    assembly = problem.derivative(evaluation)
    rows = gradient_check(
        problem.terms,
        mesh,
        assembly,
        count=config.gradcheck.count,
        seed=config.seed,
        threads=config.threads,
        step=config.gradcheck.step,
    )
    write_check(rows, directory / CHECK_NAME)
    return CheckRun(rows=rows, directory=directory)


def run_optimize(config):
    """Optimize the obstacle, writing the history, snapshots and the final mesh."""
    directory = prepare_directory(config)
    mesh = config.mesh.load()
    problem = build_problem(config, mesh)
    stride = config.output.snapshot_stride

    def observer(iteration, current, field):
        if stride > 0 and iteration % stride == 0:
            write_vtk(
                current,
                directory / ITERATION_SNAPSHOT.format(iteration),
                point_data={"W": field.W, "mu": field.mu},
            )

    result = optimize(mesh, problem, config.optimizer, config.line_search, observer)
    write_history(result.history, directory / HISTORY_NAME)
    write_msh(result.mesh, directory / FINAL_MESH_NAME)
    return OptimizationRun(result=result, directory=directory)
