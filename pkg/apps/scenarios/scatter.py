"""Bathymetry given as scattered (x, y, z) samples."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from apps.scenarios.exceptions import ScenarioError
from apps.swe_forward.bathymetry import Bathymetry

logger = logging.getLogger(__name__)

SCATTER_COLUMNS = ("x", "y", "z")
# Neighbours examined per query when breaking distance ties.
TIE_CANDIDATES = 8


@dataclass(frozen=True)
class BathymetryScatter:
    points: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        z = np.asarray(self.z, dtype=float).reshape(-1)
        if len(points) == 0:
            raise ScenarioError("bathymetry scatter has no samples")
        if len(z) != len(points):
            raise ScenarioError(f"{len(points)} sample points but {len(z)} depths")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(z))):
            raise ScenarioError("bathymetry scatter contains non-finite values")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "z", z)

    def __len__(self):
        return len(self.z)

    @classmethod
    def from_csv(cls, path):
        """Read samples from a CSV file whose header row is x,y,z."""
        path = Path(path)
        try:
            with path.open() as handle:
                header = handle.readline().strip()
                columns = tuple(column.strip() for column in header.split(","))
                if columns != SCATTER_COLUMNS:
                    raise ScenarioError(f"{path}: expected header x,y,z, got {header!r}")
                table = np.loadtxt(handle, delimiter=",", ndmin=2)
        except OSError as exc:
            raise ScenarioError(f"cannot read {path}: {exc}") from exc
        except ValueError as exc:
            raise ScenarioError(f"cannot parse {path}: {exc}") from exc
        if table.size == 0 or table.shape[1] != 3:
            raise ScenarioError(f"{path}: expected rows of three values")
        logger.info("Read %d bathymetry samples from %s", len(table), path)
        return cls(points=table[:, :2], z=table[:, 2])

    def nearest(self, points):
        """
        Index of the nearest sample to every point. Equidistant samples resolve
        to the lowest row index.
        """
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        # repeated coordinates keep their first row
        unique, first = np.unique(self.points, axis=0, return_index=True)
        tree = cKDTree(unique)
        k = min(TIE_CANDIDATES, len(unique))
        distances, candidates = tree.query(points, k=k)
        distances = distances.reshape(len(points), k)
        rows = first[candidates.reshape(len(points), k)]
        tied = distances <= distances[:, :1]
        return np.where(tied, rows, len(self.z)).min(axis=1)

    def vertex_values(self, mesh):
        return self.z[self.nearest(mesh.vertices)]


def ingest_bathymetry(space, scatter):
    """Continuous bathymetry taking at every mesh vertex the depth of its nearest sample."""
    values = scatter.vertex_values(space.mesh)
    logger.debug(
        "Mapped %d samples onto %d vertices, z in [%.4g, %.4g]",
        len(scatter),
        space.mesh.n_vertices,
        float(values.min()),
        float(values.max()),
    )
    return Bathymetry.from_vertex_values(space, values)
