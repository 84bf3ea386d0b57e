"""Conservation diagnostics of a forward trajectory."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

DIAGNOSTICS_HEADER = "shoreopt forward diagnostics v1"
DIAGNOSTICS_COLUMNS = ("step", "time", "mass", "mass_drift", "energy", "max_eps_v")


@dataclass(frozen=True)
class LevelDiagnostics:
    step: int
    time: float
    mass: float
    mass_drift: float
    energy: float
    max_eps_v: float


def mass(U, space):
    return float(space.integrate(U.component(0))[0])


def energy(U, space, bathymetry, g):
    """Total energy: kinetic |Q|^2 / 2H plus potential gH^2/2 + gHz."""
    values = space.evaluate(U)
    H = values[:, 0]
    kinetic = 0.5 * (values[:, 1] ** 2 + values[:, 2] ** 2) / H
    potential = 0.5 * g * H**2 + g * H * bathymetry.values
    return float(np.sum(space.weights * (kinetic + potential)))


def trajectory_diagnostics(trajectory, bathymetry, g):
    space = trajectory.space
    initial = mass(trajectory.states[0], space)
    rows = []
    for step, (time, U) in enumerate(zip(trajectory.times, trajectory.states)):
        level_mass = mass(U, space)
        eps = trajectory.eps_v[step - 1] if step > 0 else np.zeros(1)
        rows.append(
            LevelDiagnostics(
                step=step,
                time=float(time),
                mass=level_mass,
                mass_drift=(level_mass - initial) / initial,
                energy=energy(U, space, bathymetry, g),
                max_eps_v=float(np.max(eps)),
            )
        )
    return rows


def write_diagnostics(rows, path):
    """Write diagnostics as comma-separated values with a versioned header comment."""
    table = np.array(
        [[getattr(row, column) for column in DIAGNOSTICS_COLUMNS] for row in rows], dtype=float
    )
    np.savetxt(
        Path(path),
        table.reshape(-1, len(DIAGNOSTICS_COLUMNS)),
        delimiter=",",
        fmt=["%d"] + ["%.17g"] * (len(DIAGNOSTICS_COLUMNS) - 1),
        header=DIAGNOSTICS_HEADER + "\n" + ",".join(DIAGNOSTICS_COLUMNS),
        comments="# ",
    )
    logger.debug("Wrote %d diagnostic rows to %s", len(rows), path)
