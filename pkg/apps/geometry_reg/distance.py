"""
Exact signed distance to a set of closed boundary polylines.

Distances are positive inside the domain (even-odd rule over all loops),
zero on the boundary and negative outside. Every query scans all segments.
"""

from dataclasses import dataclass

import numpy as np

from apps.mesh_core.generators import points_in_polygon

# Relative slack under which two different closest points count as a tie.
RIDGE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ClosestPoints:
    """Nearest boundary point of every query point.

    ``segment`` is the lowest-index segment attaining the minimum, ``parameter``
    the position along it, and ``ridge`` marks queries with another, distinct
    nearest point.
    """

    points: np.ndarray
    normals: np.ndarray
    segment: np.ndarray
    parameter: np.ndarray
    distance: np.ndarray
    ridge: np.ndarray


class BoundaryPolylines:
    """
    Closed polylines traversed with the domain on the left, so the outward
    normal of a segment a -> b is its tangent turned clockwise.
    """

    def __init__(self, loops, vertex_ids=None):
        self.loops = [np.asarray(loop, dtype=float) for loop in loops]
        self.starts = np.vstack(self.loops)
        self.ends = np.vstack([np.roll(loop, -1, axis=0) for loop in self.loops])
        tangent = self.ends - self.starts
        self.lengths = np.linalg.norm(tangent, axis=1)
        self.tangents = tangent / self.lengths[:, None]
        self.normals = np.column_stack([self.tangents[:, 1], -self.tangents[:, 0]])
        # mesh vertex ids of every segment end, for moving the boundary with a field
        self.vertex_ids = None if vertex_ids is None else np.asarray(vertex_ids, dtype=np.int64)

    @classmethod
    def from_mesh(cls, mesh):
        loops, ids = [], []
        for loop in mesh.loops:
            loops.append(mesh.vertices[loop.vertices])
            ids.append(np.column_stack([loop.vertices, np.roll(loop.vertices, -1)]))
        return cls(loops, np.vstack(ids))

    @property
    def n_segments(self):
        return len(self.starts)

    def inside(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        count = np.zeros(len(points), dtype=np.int64)
        for loop in self.loops:
            count += points_in_polygon(points, loop)
        return count % 2 == 1

    def closest(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        edge = self.ends - self.starts
        offset = points[:, None, :] - self.starts[None, :, :]
        s = np.einsum("nmd,md->nm", offset, edge) / (self.lengths**2)[None, :]
        s = np.clip(s, 0.0, 1.0)
        nearest = self.starts[None] + s[..., None] * edge[None]
        distance = np.linalg.norm(points[:, None, :] - nearest, axis=2)

        best = np.argmin(distance, axis=1)
        rows = np.arange(len(points))
        best_distance = distance[rows, best]
        best_point = nearest[rows, best]
        scale = 1.0 + best_distance[:, None]
        tied = distance <= best_distance[:, None] + RIDGE_TOLERANCE * scale
        separation = np.linalg.norm(nearest - best_point[:, None, :], axis=2)
        distinct = separation > RIDGE_TOLERANCE * scale
        return ClosestPoints(
            points=best_point,
            normals=self.normals[best],
            segment=best,
            parameter=s[rows, best],
            distance=best_distance,
            ridge=np.any(tied & distinct, axis=1),
        )

    def signed_distance(self, points):
        closest = self.closest(points)
        sign = np.where(self.inside(points), 1.0, -1.0)
        return sign * closest.distance

    def gradient(self, points, closest=None):
        """Gradient of the signed distance, (x - p) / |x - p| with the sign of d."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        closest = self.closest(points) if closest is None else closest
        sign = np.where(self.inside(points), 1.0, -1.0)
        away = points - closest.points
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(
                closest.distance[:, None] > 0.0, away / closest.distance[:, None], 0.0
            )
        return sign[:, None] * unit


def exact_distance(points, loops):
    """Signed distance from points to closed polylines, positive inside."""
    return BoundaryPolylines(loops).signed_distance(points)


def project_to_boundary(points, loops):
    """Closest boundary point and outward normal there for every point."""
    closest = BoundaryPolylines(loops).closest(points)
    return closest.points, closest.normals, closest.ridge
