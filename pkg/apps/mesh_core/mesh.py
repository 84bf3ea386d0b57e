"""
Triangular meshes with tagged boundaries.

A Mesh is immutable once built. Local edge ``j`` of a triangle is the edge
opposite its vertex ``j``, running from vertex ``j+1`` to vertex ``j+2``, so
for a counter-clockwise triangle the domain lies on the left of every edge.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.db import models

from apps.mesh_core.exceptions import MeshError

logger = logging.getLogger(__name__)

INTERIOR = 0

# Triangles whose |area| falls below this fraction of bbox² are degenerate.
AREA_TOLERANCE = 1e-14


class BoundaryTag(models.IntegerChoices):
    SHORE = 1, "Shore"
    OPEN_SEA = 2, "Open sea"
    OBSTACLE = 3, "Obstacle"


def signed_areas(vertices, triangles):
    """Return the signed area of every triangle (positive when counter-clockwise)."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    ab = b - a
    ac = c - a
    return 0.5 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Topology:
    """Face connectivity derived from the triangles.

    ``faces[f]`` runs in the counter-clockwise direction of ``face_cells[f, 0]``.
    Boundary faces have ``face_cells[f, 1] == -1``.
    """

    faces: np.ndarray
    face_cells: np.ndarray
    face_local: np.ndarray
    face_tags: np.ndarray
    cell_faces: np.ndarray

    @cached_property
    def boundary_faces(self):
        return np.flatnonzero(self.face_cells[:, 1] < 0)

    @cached_property
    def interior_faces(self):
        return np.flatnonzero(self.face_cells[:, 1] >= 0)

    def faces_with_tag(self, *tags):
        return np.flatnonzero(np.isin(self.face_tags, [int(t) for t in tags]))


def build_topology(triangles, n_vertices, boundary_edges, boundary_tags):
    """Match triangle edges into faces and attach the boundary tags."""
    n_cells = len(triangles)
    starts = triangles[:, [1, 2, 0]].ravel()
    ends = triangles[:, [2, 0, 1]].ravel()
    keys = np.minimum(starts, ends).astype(np.int64) * n_vertices + np.maximum(starts, ends)
    unique_keys, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if counts.max(initial=0) > 2:
        raise MeshError("an edge is shared by more than two triangles")

    order = np.argsort(inverse, kind="stable")
    sorted_faces = inverse[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_faces[1:] != sorted_faces[:-1]
    side0 = order[first]
    side1 = order[~first]

    n_faces = len(unique_keys)
    face_cells = np.full((n_faces, 2), -1, dtype=np.int64)
    face_local = np.full((n_faces, 2), -1, dtype=np.int64)
    faces = np.empty((n_faces, 2), dtype=np.int64)
    face_cells[inverse[side0], 0] = side0 // 3
    face_local[inverse[side0], 0] = side0 % 3
    faces[inverse[side0], 0] = starts[side0]
    faces[inverse[side0], 1] = ends[side0]
    face_cells[inverse[side1], 1] = side1 // 3
    face_local[inverse[side1], 1] = side1 % 3

    face_tags = np.full(n_faces, INTERIOR, dtype=np.int64)
    boundary = np.flatnonzero(face_cells[:, 1] < 0)
    edge_keys = (
        np.minimum(boundary_edges[:, 0], boundary_edges[:, 1]).astype(np.int64) * n_vertices
        + np.maximum(boundary_edges[:, 0], boundary_edges[:, 1])
    )
    position = np.searchsorted(unique_keys, edge_keys)
    position = np.clip(position, 0, max(n_faces - 1, 0))
    found = unique_keys[position] == edge_keys
    if not np.all(found):
        raise MeshError(f"{int((~found).sum())} tagged boundary edges are not triangle edges")
    if np.any(face_cells[position, 1] >= 0):
        raise MeshError("a tagged boundary edge is shared by two triangles")
    face_tags[position] = boundary_tags
    untagged = boundary[face_tags[boundary] == INTERIOR]
    if len(untagged):
        raise MeshError(f"{len(untagged)} boundary edges carry no boundary tag")

    return Topology(
        faces=_frozen(faces, np.int64),
        face_cells=_frozen(face_cells, np.int64),
        face_local=_frozen(face_local, np.int64),
        face_tags=_frozen(face_tags, np.int64),
        cell_faces=_frozen(inverse.reshape(n_cells, 3), np.int64),
    )


@dataclass(frozen=True)
class BoundaryLoop:
    """A closed chain of boundary faces, traversed with the domain on the left."""

    faces: np.ndarray
    vertices: np.ndarray
    is_obstacle: bool


def trace_loops(topology):
    """Chain the boundary faces into closed loops."""
    boundary = topology.boundary_faces
    starts = topology.faces[boundary, 0]
    ends = topology.faces[boundary, 1]
    if len(np.unique(starts)) != len(starts) or len(np.unique(ends)) != len(ends):
        raise MeshError("boundary is not a union of simple closed loops")
    if set(starts.tolist()) != set(ends.tolist()):
        raise MeshError("boundary loop is open")

    next_face = dict(zip(starts.tolist(), boundary.tolist()))
    visited = set()
    loops = []
    for face in boundary.tolist():
        if face in visited:
            continue
        chain = []
        current = face
        while current not in visited:
            visited.add(current)
            chain.append(current)
            current = next_face[int(topology.faces[current, 1])]
        if current != face:
            raise MeshError("boundary loop is open")
        chain = np.asarray(chain, dtype=np.int64)
        tags = topology.face_tags[chain]
        obstacle = tags == BoundaryTag.OBSTACLE
        if obstacle.any() and not obstacle.all():
            raise MeshError("an obstacle loop touches the shore or open-sea boundary")
        loops.append(
            BoundaryLoop(
                faces=_frozen(chain, np.int64),
                vertices=_frozen(topology.faces[chain, 0], np.int64),
                is_obstacle=bool(obstacle.all()),
            )
        )
    return tuple(loops)


@dataclass(frozen=True)
class GeometryCache:
    """Per-cell and per-face geometric quantities of a mesh."""

    areas: np.ndarray
    diameters: np.ndarray
    cell_face_h: np.ndarray
    centroids: np.ndarray
    grad_lambda: np.ndarray
    face_lengths: np.ndarray
    face_normals: np.ndarray
    face_h: np.ndarray

    @classmethod
    def compute(cls, vertices, triangles, topology):
        areas = signed_areas(vertices, triangles)
        corners = vertices[triangles]
        # edge j runs from corner j+1 to corner j+2
        edges = corners[:, [2, 0, 1]] - corners[:, [1, 2, 0]]
        lengths = np.linalg.norm(edges, axis=2)
        grad_lambda = np.stack([-edges[:, :, 1], edges[:, :, 0]], axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad_lambda = grad_lambda / (2.0 * areas)[:, None, None]

        tangent = vertices[topology.faces[:, 1]] - vertices[topology.faces[:, 0]]
        face_lengths = np.linalg.norm(tangent, axis=1)
        face_normals = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / face_lengths[:, None]

        ratio = np.abs(areas)[topology.face_cells] / face_lengths[:, None]
        ratio = np.where(topology.face_cells >= 0, ratio, np.inf)
        face_h = ratio.min(axis=1)
        # smallest penalty length over the faces of each cell
        cell_face_h = np.full(len(triangles), np.inf)
        for side in range(2):
            owned = topology.face_cells[:, side] >= 0
            np.minimum.at(cell_face_h, topology.face_cells[owned, side], face_h[owned])
        return cls(
            areas=_frozen(areas, float),
            diameters=_frozen(lengths.max(axis=1), float),
            cell_face_h=_frozen(cell_face_h, float),
            centroids=_frozen(corners.mean(axis=1), float),
            grad_lambda=_frozen(grad_lambda, float),
            face_lengths=_frozen(face_lengths, float),
            face_normals=_frozen(face_normals, float),
            face_h=_frozen(face_h, float),
        )


class Mesh:
    """
    Counter-clockwise triangulation of the water domain with tagged boundary edges.

    Construction repairs clockwise triangles and checks the invariants: positive
    areas, manifold edges, closed boundary loops and obstacle loops disjoint from
    the outer boundary.
    """

    def __init__(self, vertices, triangles, boundary_edges, boundary_tags):
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64, copy=True)
        boundary_edges = np.asarray(boundary_edges, dtype=np.int64).reshape(-1, 2)
        boundary_tags = np.asarray(boundary_tags, dtype=np.int64).reshape(-1)

        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must be an (n, 2) array")
        if len(triangles) == 0:
            raise MeshError("mesh has no triangles")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError("triangle references a missing vertex")
        unknown = set(boundary_tags.tolist()) - set(BoundaryTag.values)
        if unknown:
            raise MeshError(f"unknown boundary tags {sorted(unknown)}")

        areas = signed_areas(vertices, triangles)
        extent = np.ptp(vertices, axis=0).max()
        degenerate = np.flatnonzero(np.abs(areas) <= AREA_TOLERANCE * extent**2)
        if len(degenerate):
            raise MeshError(f"triangle {int(degenerate[0])} has zero area")
        clockwise = areas < 0
        if clockwise.any():
            logger.debug("Reorienting %d clockwise triangles", int(clockwise.sum()))
            triangles[clockwise] = triangles[clockwise][:, [0, 2, 1]]

        topology = build_topology(triangles, len(vertices), boundary_edges, boundary_tags)
        loops = trace_loops(topology)
        self._assign(vertices, triangles, topology, loops)

    def _assign(self, vertices, triangles, topology, loops):
        self.vertices = _frozen(vertices, float)
        self.triangles = _frozen(triangles, np.int64)
        self.topology = topology
        self.loops = loops

    def moved(self, vertices):
        """Return a mesh with the same connectivity and new vertex positions."""
        vertices = np.asarray(vertices, dtype=float)
        if vertices.shape != self.vertices.shape:
            raise MeshError("moved vertices do not match the mesh")
        clone = Mesh.__new__(Mesh)
        clone._assign(vertices, self.triangles, self.topology, self.loops)
        return clone

    def __repr__(self):
        return f"Mesh(vertices={self.n_vertices}, triangles={self.n_triangles})"

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def geometry(self):
        return GeometryCache.compute(self.vertices, self.triangles, self.topology)

    @property
    def boundary_edges(self):
        faces = self.topology.boundary_faces
        return self.topology.faces[faces]

    @property
    def boundary_tags(self):
        return self.topology.face_tags[self.topology.boundary_faces]

    def boundary_vertices(self, *tags):
        """Vertices lying on boundary faces with any of the given tags, or on any boundary."""
        faces = self.topology.faces_with_tag(*tags) if tags else self.topology.boundary_faces
        return np.unique(self.topology.faces[faces].ravel())

    def segments(self, *tags):
        """Boundary segments as an (n, 2, 2) array, optionally filtered by tag."""
        faces = self.topology.faces_with_tag(*tags) if tags else self.topology.boundary_faces
        return self.vertices[self.topology.faces[faces]]

    @property
    def obstacle_loops(self):
        return [loop for loop in self.loops if loop.is_obstacle]

    @property
    def outer_loops(self):
        return [loop for loop in self.loops if not loop.is_obstacle]

    def loop_area(self, loop):
        """Signed shoelace area of a loop (negative for obstacle holes)."""
        x, y = self.vertices[loop.vertices].T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def area(self):
        return float(self.geometry.areas.sum())

    @cached_property
    def obstacle_support(self):
        """Vertices whose hat-function support touches an obstacle vertex."""
        on_obstacle = np.zeros(self.n_vertices, dtype=bool)
        on_obstacle[self.boundary_vertices(BoundaryTag.OBSTACLE)] = True
        touching = on_obstacle[self.triangles].any(axis=1)
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.triangles[touching].ravel()] = True
        return mask

    def vertex_cells(self):
        """Return (cells, local index) pairs grouped per vertex as flat arrays."""
        cells = np.repeat(np.arange(self.n_triangles), 3)
        return self.triangles.ravel(), cells, np.tile(np.arange(3), self.n_triangles)
