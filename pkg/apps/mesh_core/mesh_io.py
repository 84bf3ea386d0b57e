"""Gmsh MSH 2.2 and legacy VTK file support, delegated to meshio."""

import logging
from pathlib import Path

import meshio
import numpy as np

from apps.mesh_core.exceptions import MeshFormatError, MeshWriteError
from apps.mesh_core.mesh import BoundaryTag, Mesh

logger = logging.getLogger(__name__)

DEFAULT_TAG_MAP = {
    1: BoundaryTag.SHORE,
    2: BoundaryTag.OPEN_SEA,
    3: BoundaryTag.OBSTACLE,
}

# Physical tag written for the triangles of an emitted MSH file.
DOMAIN_TAG = 10


def load_msh(path, tag_map=None):
    """Read a Gmsh MSH 2.2 ASCII file into a Mesh.

    Line elements must carry a physical tag listed in ``tag_map``; unused nodes
    (geometry points) are dropped.
    """
    tag_map = DEFAULT_TAG_MAP if tag_map is None else {int(k): v for k, v in tag_map.items()}
    path = Path(path)
    try:
        raw = meshio.read(path, file_format="gmsh")
    except OSError as exc:
        raise MeshFormatError(f"cannot read {path}: {exc}") from exc
    except (meshio.ReadError, ValueError, IndexError, KeyError) as exc:
        raise MeshFormatError(f"cannot parse {path}: {exc}") from exc

    try:
        triangles = raw.get_cells_type("triangle")
        lines = raw.get_cells_type("line")
    except KeyError as exc:
        raise MeshFormatError(f"{path} has no {exc} elements") from exc
    if len(triangles) == 0:
        raise MeshFormatError(f"{path} contains no triangles")
    try:
        physical = np.asarray(raw.get_cell_data("gmsh:physical", "line"), dtype=np.int64)
    except KeyError as exc:
        raise MeshFormatError(f"{path}: line elements carry no physical tags") from exc

    unknown = sorted(set(physical.tolist()) - set(tag_map))
    if unknown:
        raise MeshFormatError(f"{path}: unknown physical tags {unknown}")
    tags = np.array([int(tag_map[int(t)]) for t in physical], dtype=np.int64)

    used = np.unique(triangles)
    remap = np.full(len(raw.points), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    if np.any(remap[lines] < 0):
        raise MeshFormatError(f"{path}: boundary line references a node outside the triangles")

    mesh = Mesh(raw.points[used, :2], remap[triangles], remap[lines], tags)
    logger.info("Loaded %s: %d vertices, %d triangles", path, mesh.n_vertices, mesh.n_triangles)
    return mesh


def _points3d(mesh):
    return np.column_stack([mesh.vertices, np.zeros(mesh.n_vertices)])


def write_msh(mesh, path):
    """Write the mesh as Gmsh MSH 2.2 ASCII with physical boundary tags."""
    boundary_tags = np.asarray(mesh.boundary_tags, dtype=np.int64)
    domain_tags = np.full(mesh.n_triangles, DOMAIN_TAG, dtype=np.int64)
    out = meshio.Mesh(
        _points3d(mesh),
        [("line", np.asarray(mesh.boundary_edges)), ("triangle", np.asarray(mesh.triangles))],
        cell_data={
            "gmsh:physical": [boundary_tags, domain_tags],
            "gmsh:geometrical": [boundary_tags, domain_tags],
        },
    )
    try:
        meshio.write(path, out, file_format="gmsh22", binary=False)
    except OSError as exc:
        raise MeshWriteError(f"cannot write {path}: {exc}") from exc


def _as_vtk_array(values, count, name):
    values = np.asarray(values, dtype=float)
    if values.shape[0] != count:
        raise MeshWriteError(f"field {name!r} has {values.shape[0]} entries, expected {count}")
    if values.ndim == 2 and values.shape[1] == 2:
        values = np.column_stack([values, np.zeros(count)])
    return values


def write_vtk(mesh, path, point_data=None, cell_data=None):
    """Write a legacy ASCII VTK unstructured grid with optional named fields."""
    point_data = {
        name: _as_vtk_array(values, mesh.n_vertices, name)
        for name, values in (point_data or {}).items()
    }
    cell_data = {
        name: [_as_vtk_array(values, mesh.n_triangles, name)]
        for name, values in (cell_data or {}).items()
    }
    out = meshio.Mesh(
        _points3d(mesh),
        [("triangle", np.asarray(mesh.triangles))],
        point_data=point_data,
        cell_data=cell_data,
    )
    try:
        meshio.write(path, out, file_format="vtk", binary=False)
    except OSError as exc:
        raise MeshWriteError(f"cannot write {path}: {exc}") from exc
