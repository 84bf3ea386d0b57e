"""
Scripted meshes for scenarios and tests.

Unstructured meshes are Delaunay triangulations of boundary points plus a
hexagonal interior lattice; holes are carved out by dropping triangles whose
centroid falls inside the hole polygon. Obstacle edges are Gabriel edges of
the point set, so they always survive the triangulation.
"""

import logging

import numpy as np
from scipy.spatial import Delaunay

from apps.mesh_core.exceptions import MeshError
from apps.mesh_core.mesh import BoundaryTag, Mesh, signed_areas

logger = logging.getLogger(__name__)

SIDES = ("bottom", "right", "top", "left")


def points_in_polygon(points, polygon):
    """Even-odd rule point-in-polygon test."""
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    x0, y0 = polygon[:, 0][None, :], polygon[:, 1][None, :]
    x1, y1 = np.roll(polygon[:, 0], -1)[None, :], np.roll(polygon[:, 1], -1)[None, :]
    crosses = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return np.count_nonzero(crosses & (x < x_cross), axis=1) % 2 == 1


def _circle(center, radius, n, phase=0.0):
    angles = np.pi / 2 + phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack(
        [center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)]
    )


def _hex_lattice(center_x, y_min, y_max, x_half, h):
    """Hexagonal lattice mirror-symmetric about x = center_x."""
    rows = []
    dy = h * np.sqrt(3.0) / 2.0
    n_rows = int(np.ceil((y_max - y_min) / dy)) + 1
    n_cols = int(np.ceil(x_half / h)) + 1
    for k in range(n_rows):
        offset = 0.5 * h * (k % 2)
        xs = center_x + offset + h * np.arange(-n_cols, n_cols + 1)
        rows.append(np.column_stack([xs, np.full(len(xs), y_min + k * dy)]))
    return np.vstack(rows)


def _obstacle_rings(center, radius, n_obstacle, h, max_radius):
    """Graded rings of points around a circular obstacle, coarsening towards h."""
    spacing = 2.0 * np.pi * radius / n_obstacle
    rings = []
    reach = radius
    while spacing < h:
        spacing = min(spacing * 1.3, h)
        r = reach + spacing * np.sqrt(3.0) / 2.0
        if r + spacing > max_radius:
            break
        n = max(int(round(2.0 * np.pi * r / spacing)), 8)
        rings.append(_circle(center, r, n, phase=np.pi / n * (len(rings) % 2)))
        reach = r
    points = np.vstack(rings) if rings else np.empty((0, 2))
    return points, reach


def _triangulate(points, holes, classify, h):
    triangulation = Delaunay(points)
    triangles = triangulation.simplices.astype(np.int64)
    centroids = points[triangles].mean(axis=1)
    keep = np.ones(len(triangles), dtype=bool)
    for hole in holes:
        keep &= ~points_in_polygon(centroids, hole)
    areas = signed_areas(points, triangles)
    keep &= np.abs(areas) > 1e-10 * h * h
    triangles = triangles[keep]
    flip = signed_areas(points, triangles) < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    used = np.unique(triangles)
    remap = np.full(len(points), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    points = points[used]
    triangles = remap[triangles]

    starts = triangles[:, [1, 2, 0]].ravel()
    ends = triangles[:, [2, 0, 1]].ravel()
    keys = np.minimum(starts, ends) * len(points) + np.maximum(starts, ends)
    unique_keys, index, counts = np.unique(keys, return_index=True, return_counts=True)
    boundary = index[counts == 1]
    edges = np.column_stack([starts[boundary], ends[boundary]])
    tags = classify(points, edges, used)
    return Mesh(points, triangles, edges, tags)


def rectangle_mesh(nx, ny, width=1.0, height=1.0, origin=(0.0, 0.0), tags=None):
    """
    Structured triangulation of a rectangle, mirror-symmetric about its vertical
    centre line when ``nx`` is even.

    ``tags`` maps "bottom", "right", "top" and "left" to a BoundaryTag; every
    side defaults to the shore (rigid wall).
    """
    if nx < 1 or ny < 1:
        raise MeshError("rectangle needs at least one cell per direction")
    side_tags = {side: BoundaryTag.SHORE for side in SIDES}
    side_tags.update(tags or {})

    xs = origin[0] + width * np.arange(nx + 1) / nx
    ys = origin[1] + height * np.arange(ny + 1) / ny
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    triangles = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if 2 * i < nx:
                triangles += [(a, b, d), (b, c, d)]
            else:
                triangles += [(a, b, c), (a, c, d)]

    edges, edge_tags = [], []
    for i in range(nx):
        edges += [(vid(i, 0), vid(i + 1, 0)), (vid(i + 1, ny), vid(i, ny))]
        edge_tags += [side_tags["bottom"], side_tags["top"]]
    for j in range(ny):
        edges += [(vid(nx, j), vid(nx, j + 1)), (vid(0, j + 1), vid(0, j))]
        edge_tags += [side_tags["right"], side_tags["left"]]
    return Mesh(vertices, np.array(triangles), np.array(edges), np.array(edge_tags))


def disk_mesh(
    radius=1.0,
    h=0.1,
    center=(0.0, 0.0),
    hole_center=None,
    hole_radius=None,
    n_hole=64,
    outer_tag=BoundaryTag.OPEN_SEA,
):
    """Disk meshed with spacing ``h``, optionally with a circular obstacle hole."""
    center = np.asarray(center, dtype=float)
    n_outer = max(int(np.ceil(2.0 * np.pi * radius / h)), 8)
    outer = _circle(center, radius, n_outer)
    lattice = _hex_lattice(center[0], center[1] - radius, center[1] + radius, radius, h)
    distance_to_rim = radius - np.linalg.norm(lattice - center, axis=1)
    lattice = lattice[distance_to_rim > 0.5 * h]

    holes = []
    hole_points = np.empty((0, 2))
    rings = np.empty((0, 2))
    if hole_radius is not None:
        hole_center = np.asarray(center if hole_center is None else hole_center, dtype=float)
        hole_points = _circle(hole_center, hole_radius, n_hole)
        room = radius - np.linalg.norm(hole_center - center)
        rings, reach = _obstacle_rings(hole_center, hole_radius, n_hole, h, room)
        lattice = lattice[np.linalg.norm(lattice - hole_center, axis=1) > reach + 0.6 * h]
        holes.append(hole_points)

    points = np.vstack([outer, hole_points, rings, lattice])
    n_boundary = len(outer)
    hole_range = (n_boundary, n_boundary + len(hole_points))

    def classify(_, edges, original):
        ids = original[edges]
        on_hole = (ids >= hole_range[0]) & (ids < hole_range[1])
        return np.where(on_hole.all(axis=1), int(BoundaryTag.OBSTACLE), int(outer_tag))

    mesh = _triangulate(points, holes, classify, h)
    logger.debug("Generated disk mesh with %d triangles", mesh.n_triangles)
    return mesh


def half_disk_mesh(
    radius=2.5,
    h=0.2,
    obstacle_center=(0.0, 0.5),
    obstacle_radius=0.25,
    n_obstacle=64,
):
    """
    Half disk {y >= 0, |x| <= radius} with the shore on y = 0, open sea on the arc,
    and a circular obstacle meshed finer than the far field.
    """
    n_arc = max(int(np.ceil(np.pi * radius / h)), 4)
    angles = np.pi * np.arange(1, n_arc) / n_arc
    arc = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])
    n_shore = max(int(np.ceil(2.0 * radius / h)), 2)
    shore = np.column_stack([np.linspace(-radius, radius, n_shore + 1), np.zeros(n_shore + 1)])

    obstacle_center = np.asarray(obstacle_center, dtype=float)
    obstacle = _circle(obstacle_center, obstacle_radius, n_obstacle)
    room = min(obstacle_center[1], radius - np.linalg.norm(obstacle_center))
    rings, reach = _obstacle_rings(obstacle_center, obstacle_radius, n_obstacle, h, room)

    lattice = _hex_lattice(0.0, 0.0, radius, radius, h)
    rim = radius - np.linalg.norm(lattice, axis=1)
    lattice = lattice[(rim > 0.5 * h) & (lattice[:, 1] > 0.5 * h)]
    lattice = lattice[np.linalg.norm(lattice - obstacle_center, axis=1) > reach + 0.6 * h]
    if len(rings):
        rim = radius - np.linalg.norm(rings, axis=1)
        rings = rings[(rim > 0.3 * h) & (rings[:, 1] > 0.3 * h)]

    points = np.vstack([shore, arc, obstacle, rings, lattice])
    obstacle_range = (len(shore) + len(arc), len(shore) + len(arc) + len(obstacle))

    def classify(pts, edges, original):
        ids = original[edges]
        on_obstacle = ((ids >= obstacle_range[0]) & (ids < obstacle_range[1])).all(axis=1)
        on_shore = (np.abs(pts[edges][:, :, 1]) < 1e-12 * radius).all(axis=1)
        tags = np.full(len(edges), int(BoundaryTag.OPEN_SEA))
        tags[on_shore] = int(BoundaryTag.SHORE)
        tags[on_obstacle] = int(BoundaryTag.OBSTACLE)
        return tags

    mesh = _triangulate(points, [obstacle], classify, h)
    logger.debug("Generated half-disk mesh with %d triangles", mesh.n_triangles)
    return mesh
