"""Moving meshes and checking that a moved mesh is still a valid shape."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from apps.mesh_core.exceptions import MeshError
from apps.mesh_core.mesh import BoundaryTag, signed_areas

logger = logging.getLogger(__name__)

# Orientation values below this multiple of the squared segment scale are re-evaluated exactly.
ORIENTATION_GUARD = 1e-10


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    min_area: float
    inverted_cells: tuple = field(default_factory=tuple)
    intersecting_segments: tuple = field(default_factory=tuple)

    def __bool__(self):
        return self.valid


def apply_deformation(mesh, W, step):
    """Move every vertex by ``step * W``; connectivity is unchanged."""
    W = np.asarray(W, dtype=float)
    if W.shape != mesh.vertices.shape:
        raise MeshError(f"deformation field has shape {W.shape}, expected {mesh.vertices.shape}")
    return mesh.moved(mesh.vertices + step * W)


def _orientation(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (
        c[..., 0] - a[..., 0]
    )


def _exact_sign(a, b, c):
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    value = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (value > 0) - (value < 0)


def _signs(a, b, c, scale):
    values = _orientation(a, b, c)
    signs = np.sign(values).astype(int)
    for idx in np.flatnonzero(np.abs(values) <= ORIENTATION_GUARD * scale):
        signs[idx] = _exact_sign(a[idx], b[idx], c[idx])
    return signs


def _on_segment(p, q, r):
    """Whether collinear point r lies within the bounding box of segment pq."""
    return (
        (np.minimum(p[..., 0], q[..., 0]) <= r[..., 0])
        & (r[..., 0] <= np.maximum(p[..., 0], q[..., 0]))
        & (np.minimum(p[..., 1], q[..., 1]) <= r[..., 1])
        & (r[..., 1] <= np.maximum(p[..., 1], q[..., 1]))
    )


def intersecting_pairs(points, segments):
    """Pairs of segments that meet anywhere other than a shared endpoint.

    ``segments`` holds vertex index pairs into ``points``.
    """
    n = len(segments)
    if n < 2:
        return []
    i, j = np.triu_indices(n, k=1)
    share = (
        (segments[i, 0] == segments[j, 0])
        | (segments[i, 0] == segments[j, 1])
        | (segments[i, 1] == segments[j, 0])
        | (segments[i, 1] == segments[j, 1])
    )
    i, j = i[~share], j[~share]
    p1, q1 = points[segments[i, 0]], points[segments[i, 1]]
    p2, q2 = points[segments[j, 0]], points[segments[j, 1]]
    scale = float(np.max(np.linalg.norm(points[segments[:, 1]] - points[segments[:, 0]], axis=1)))
    scale = max(scale, 1.0) ** 2

    o1 = _signs(p1, q1, p2, scale)
    o2 = _signs(p1, q1, q2, scale)
    o3 = _signs(p2, q2, p1, scale)
    o4 = _signs(p2, q2, q1, scale)

    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    touching = (
        ((o1 == 0) & _on_segment(p1, q1, p2))
        | ((o2 == 0) & _on_segment(p1, q1, q2))
        | ((o3 == 0) & _on_segment(p2, q2, p1))
        | ((o4 == 0) & _on_segment(p2, q2, q1))
    )
    hits = proper | touching
    return [(int(a), int(b)) for a, b in zip(i[hits], j[hits])]


def validate_deformed(mesh):
    """Check positive areas and a non-self-intersecting obstacle boundary."""
    areas = signed_areas(mesh.vertices, mesh.triangles)
    inverted = tuple(int(c) for c in np.flatnonzero(areas <= 0.0))
    obstacle_faces = mesh.topology.faces_with_tag(BoundaryTag.OBSTACLE)
    crossings = intersecting_pairs(mesh.vertices, mesh.topology.faces[obstacle_faces])
    crossings = tuple(
        tuple(sorted((int(obstacle_faces[a]), int(obstacle_faces[b])))) for a, b in crossings
    )
    report = ValidityReport(
        valid=not inverted and not crossings,
        min_area=float(areas.min()),
        inverted_cells=inverted,
        intersecting_segments=tuple(sorted(crossings)),
    )
    if not report.valid:
        logger.debug(
            "Invalid mesh: %d inverted cells, %d obstacle crossings",
            len(inverted),
            len(crossings),
        )
    return report
