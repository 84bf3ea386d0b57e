"""
Geometric penalty terms of the obstacle shape and their shape gradients.

    J2 = -nu1 area(Omega)                         keeps the obstacle from growing without bound
    J3 = nu2 length(Gamma3)                       perimeter regularization
    J4 = nu3 int_Gamma3 int_0^dmin (d(x - xi n)^+)^2 dxi ds      thickness

n is the obstacle's outward normal (pointing into the water), so the offsets
x - xi n run into the obstacle and only re-enter the water when it is
thinner than d_min. Shape gradients are returned per vertex so that
DJ[V] = sum_v G[v] . V[v] for piecewise-linear V.
"""

from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from apps.dg_space.quadrature import edge_rule
from apps.geometry_reg.distance import BoundaryPolylines
from apps.mesh_core.mesh import BoundaryTag


@dataclass(frozen=True)
class PenaltyParams:
    nu1: float = 1e-4
    nu2: float = 1e-4
    nu3: float = 1e-2
    d_min: float = 0.05
    ray_points: int = 8
    edge_points: int = 4

    def __post_init__(self):
        errors = {}
        for name in ("nu1", "nu2", "nu3"):
            if not getattr(self, name) >= 0:
                errors[name] = "must be non-negative"
        if not self.d_min > 0:
            errors["d_min"] = "must be positive"
        for name in ("ray_points", "edge_points"):
            if int(getattr(self, name)) < 1:
                errors[name] = "must be at least 1"
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class PenaltyValues:
    J2: float
    J3: float
    J4: float

    @property
    def total(self):
        return self.J2 + self.J3 + self.J4


@dataclass(frozen=True)
class ObstacleEdges:
    """Obstacle faces with their tangent and the normal pointing into the water."""

    vertices: np.ndarray
    lengths: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray

    @classmethod
    def from_mesh(cls, mesh):
        topology = mesh.topology
        faces = topology.faces_with_tag(BoundaryTag.OBSTACLE)
        vertices = topology.faces[faces]
        tangent = mesh.vertices[vertices[:, 1]] - mesh.vertices[vertices[:, 0]]
        lengths = np.linalg.norm(tangent, axis=1)
        tangents = tangent / lengths[:, None] if len(faces) else tangent
        # faces run with the water on the left, so the left normal points into the water
        normals = np.column_stack([-tangents[:, 1], tangents[:, 0]])
        return cls(vertices, lengths, tangents, normals)

    def __len__(self):
        return len(self.vertices)


def obstacle_curvature(mesh):
    """
    Discrete curvature at obstacle vertices: turning angle over the mean of the
    adjacent edge lengths, positive for a convex obstacle. Returns (vertex ids, kappa).
    """
    edges = ObstacleEdges.from_mesh(mesh)
    if len(edges) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    incoming = {int(b): k for k, (_, b) in enumerate(edges.vertices)}
    ids, kappa = [], []
    for k, (a, _) in enumerate(edges.vertices):
        previous = incoming[int(a)]
        t_in, t_out = edges.tangents[previous], edges.tangents[k]
        turn = np.arctan2(t_in[0] * t_out[1] - t_in[1] * t_out[0], t_in @ t_out)
        ids.append(int(a))
        kappa.append(-turn / (0.5 * (edges.lengths[previous] + edges.lengths[k])))
    return np.asarray(ids, dtype=np.int64), np.asarray(kappa)


def _ray_samples(edges, params):
    """Edge points, offsets into the obstacle and the combined quadrature weights."""
    along = edge_rule(2 * params.edge_points - 1)
    ray = edge_rule(2 * params.ray_points - 1)
    t = along.points
    xi = params.d_min * ray.points
    return t, xi, along.weights[:, None] * (params.d_min * ray.weights)[None, :]


def _offset_points(mesh, edges, t, xi):
    start = mesh.vertices[edges.vertices[:, 0]]
    end = mesh.vertices[edges.vertices[:, 1]]
    base = start[:, None, :] * (1.0 - t)[None, :, None] + end[:, None, :] * t[None, :, None]
    return base[:, :, None, :] - xi[None, None, :, None] * edges.normals[:, None, None, :]


def _thickness_terms(mesh, params, distance):
    edges = ObstacleEdges.from_mesh(mesh)
    if len(edges) == 0:
        return edges, None, None, None
    t, xi, weights = _ray_samples(edges, params)
    points = _offset_points(mesh, edges, t, xi)
    d = distance.signed_distance(points.reshape(-1, 2)).reshape(points.shape[:3])
    return edges, points, np.maximum(d, 0.0), weights


def penalties(mesh, params, distance=None):
    """
    Evaluate J2, J3 and J4. ``distance`` is any object with a
    ``signed_distance(points)`` method and defaults to the exact polyline oracle.
    """
    distance = BoundaryPolylines.from_mesh(mesh) if distance is None else distance
    edges, _, positive, weights = _thickness_terms(mesh, params, distance)
    J2 = -params.nu1 * mesh.area
    J3 = params.nu2 * float(edges.lengths.sum())
    J4 = 0.0
    if positive is not None:
        J4 = params.nu3 * float(np.einsum("e,qk,eqk->", edges.lengths, weights, positive**2))
    return PenaltyValues(J2=J2, J3=J3, J4=J4)


def volume_gradient(mesh, params):
    """DJ2[V] = -nu1 int div V."""
    geometry = mesh.geometry
    G = np.zeros((mesh.n_vertices, 2))
    local = -params.nu1 * geometry.areas[:, None, None] * geometry.grad_lambda
    np.add.at(G, mesh.triangles.ravel(), local.reshape(-1, 2))
    return G


def perimeter_gradient(mesh, params):
    """DJ3[V] = nu2 sum over obstacle edges of (V_b - V_a) . tau."""
    edges = ObstacleEdges.from_mesh(mesh)
    G = np.zeros((mesh.n_vertices, 2))
    np.add.at(G, edges.vertices[:, 1], params.nu2 * edges.tangents)
    np.add.at(G, edges.vertices[:, 0], -params.nu2 * edges.tangents)
    return G


def thickness_gradient(mesh, params, distance=None):
    """
    DJ4[V]. Moving the mesh moves the offset points through the edge geometry
    and moves the boundary they are measured to; the latter enters through V
    at the closest boundary point.

    The positive parts d+ come from ``distance``, the same oracle J4 is
    evaluated with. The distance gradient and the closest points always come
    from the exact polylines.
    """
    polylines = BoundaryPolylines.from_mesh(mesh)
    oracle = polylines if distance is None else distance
    edges, points, positive, weights = _thickness_terms(mesh, params, oracle)
    G = np.zeros((mesh.n_vertices, 2))
    if positive is None or not np.any(positive > 0.0):
        return G

    t, xi, _ = _ray_samples(edges, params)
    flat = points.reshape(-1, 2)
    closest = polylines.closest(flat)
    g = polylines.gradient(flat, closest).reshape(points.shape)
    # dJ/dd at every sample, including the edge length factor
    weight = (2.0 * params.nu3) * edges.lengths[:, None, None] * weights[None] * positive

    a, b = edges.vertices[:, 0], edges.vertices[:, 1]
    tau = edges.tangents[:, None, None, :]
    normal = edges.normals[:, None, None, :]
    g_tau = np.sum(g * tau, axis=-1, keepdims=True)
    # y = x(t) - xi n and n moves by -((V_b - V_a) . n) tau / |e|
    bend = xi[None, None, :, None] * g_tau / edges.lengths[:, None, None, None] * normal
    along = t[None, :, None, None]
    coeff_a = (1.0 - along) * g - bend
    coeff_b = along * g + bend
    np.add.at(G, a, np.einsum("eqk,eqkd->ed", weight, coeff_a))
    np.add.at(G, b, np.einsum("eqk,eqkd->ed", weight, coeff_b))

    segment_ends = polylines.vertex_ids[closest.segment]
    s = closest.parameter[:, None]
    flat_weight = weight.reshape(-1, 1)
    g_flat = g.reshape(-1, 2)
    np.add.at(G, segment_ends[:, 0], -flat_weight * (1.0 - s) * g_flat)
    np.add.at(G, segment_ends[:, 1], -flat_weight * s * g_flat)

    # length change of each edge
    value = params.nu3 * np.einsum("qk,eqk->e", weights, positive**2)
    np.add.at(G, b, value[:, None] * edges.tangents)
    np.add.at(G, a, -value[:, None] * edges.tangents)
    return G


def penalty_gradients(mesh, params, distance=None):
    """Per-vertex gradients (G2, G3, G4) of the three penalties."""
    return (
        volume_gradient(mesh, params),
        perimeter_gradient(mesh, params),
        thickness_gradient(mesh, params, distance),
    )


def penalty_derivatives(mesh, V, params, distance=None):
    """Shape derivatives (DJ2[V], DJ3[V], DJ4[V]) for a vertex field V of shape (n, 2)."""
    V = np.asarray(V, dtype=float)
    return tuple(float(np.sum(G * V)) for G in penalty_gradients(mesh, params, distance))
