"""
Volume form of the shape derivative of the shore mismatch objective.

Forward and adjoint states are first projected to continuous piecewise-linear
fields. For a piecewise-linear deformation V with K = grad V (K[i, j] = dV_i/dx_j)
every time level then contributes int S : K dx, where

    S = e I - p grad(Q)^T - sum_i r_i dF_i^T
        - eps_v (grad(H + z) grad(p)^T + grad(p) grad(H + z)^T)
        - sum_i eps_f,i (grad(Q_i) grad(r_i)^T + grad(r_i) grad(Q_i)^T)
        - g H grad(z) r^T

with dF_i[j, k] = d F_ij / dx_k and e the integrand of the weak form

    e = (H_t + div Q) p + (Q_t + div F) . r + eps_v grad(H + z) . grad(p)
        + G(eps_f) grad Q : grad r + g H grad(z) . r.

Bathymetry and initial state given as functions of space do not travel with
the mesh. Their material change V . grad(data) adds

    int (eps_v grad p + g H r) . grad(V . grad z)      and      - int P(0) . (grad U0 V)

which vanish when the data are taken to move with the mesh.

The rigid wall Q . n = 0 on the obstacle does not travel with the mesh: a
transported discharge picks up the normal component n . (grad V Q) once the
wall turns. Restoring the wall condition adds

    int_obstacle (p + u . r) n . (grad V Q) ds

with n the outward normal of the water domain. Friction is not differentiated,
and V is assumed to vanish on the shore and the open sea.
"""

import logging
from dataclasses import dataclass

import numpy as np

from apps.dg_space import cg
from apps.mesh_core.mesh import BoundaryTag
from apps.shape_gradient.exceptions import GradientError
from apps.shape_gradient.objective import TimeRule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LevelTerms:
    """Weak-form integral and its sensitivities at one time level."""

    integral: float
    S: np.ndarray
    bed: np.ndarray
    wall: np.ndarray


def recovered_gradients(mesh, vertex_values):
    """Area-weighted vertex average of the cell gradients of a P1 field.

    Scalar fields give (n_vertices, 2), vector fields (n_vertices, k, 2).
    """
    grads = cg.cell_gradients(mesh, vertex_values)
    areas = mesh.geometry.areas.reshape((-1,) + (1,) * (grads.ndim - 1))
    totals = np.zeros((mesh.n_vertices,) + grads.shape[1:])
    weights = np.zeros(mesh.n_vertices)
    for corner in range(3):
        np.add.at(totals, mesh.triangles[:, corner], grads * areas)
        np.add.at(weights, mesh.triangles[:, corner], mesh.geometry.areas)
    return totals / weights.reshape((-1,) + (1,) * (grads.ndim - 1))


def level_terms(space, U, P, U_t, eps_v, eps_f, z, g):
    """
    Weak-form integrand and sensitivities from vertex values of U, P, dU/dt and
    z, shapes (n_vertices, 3) and (n_vertices,), and per-cell eps_v.
    """
    mesh = space.mesh
    triangles = mesh.triangles
    weights = space.weights
    areas = space.areas
    barycentric = space.volume_rule.points

    def at_points(values):
        return np.einsum("qj,tjc->tcq", barycentric, values[triangles])

    U_q, P_q, U_t_q = at_points(U), at_points(P), at_points(U_t)
    dU = cg.cell_gradients(mesh, U)
    dP = cg.cell_gradients(mesh, P)
    dz = cg.cell_gradients(mesh, z)
    H, Q = U_q[:, 0], U_q[:, 1:]
    p, r = P_q[:, 0], P_q[:, 1:]
    dH, dQ = dU[:, 0], dU[:, 1:]
    dp, dr = dP[:, 0], dP[:, 1:]
    if np.any(~(H > 0.0)):
        raise GradientError("projected water height is not positive")
    eps_v = np.broadcast_to(np.asarray(eps_v, dtype=float), (space.n_cells,))

    u = Q / H[:, None]
    dF = (
        np.einsum("tik,tjq->tqijk", dQ, u)
        + np.einsum("tiq,tjk->tqijk", u, dQ)
        - np.einsum("tiq,tjq,tk->tqijk", u, u, dH)
        + g * np.einsum("tq,tk,ij->tqijk", H, dH, np.eye(2))
    )
    div_F = np.einsum("tqijj->tiq", dF)
    surface_gradient = dH + dz

    viscous = eps_v * np.einsum("td,td->t", surface_gradient, dp)
    diffusion = np.einsum("i,tid,tid->t", np.asarray(eps_f, dtype=float), dQ, dr)
    e = (
        (U_t_q[:, 0] + np.trace(dQ, axis1=1, axis2=2)[:, None]) * p
        + np.einsum("tiq,tiq->tq", U_t_q[:, 1:] + div_F, r)
        + (viscous + diffusion)[:, None]
        + g * H * np.einsum("tk,tkq->tq", dz, r)
    )

    S = np.einsum("tq,tq->t", weights, e)[:, None, None] * np.eye(2)
    S -= np.einsum("tq,tq,tik->tki", weights, p, dQ)
    S -= np.einsum("tq,tiq,tqijk->tkj", weights, r, dF)
    S -= g * np.einsum("tq,tq,tk,tjq->tkj", weights, H, dz, r)
    viscous_outer = np.einsum("tk,tj->tkj", surface_gradient, dp)
    S -= (areas * eps_v)[:, None, None] * (viscous_outer + np.swapaxes(viscous_outer, 1, 2))
    for i, eps in enumerate(eps_f):
        outer = np.einsum("tk,tj->tkj", dQ[:, i], dr[:, i])
        S -= eps * areas[:, None, None] * (outer + np.swapaxes(outer, 1, 2))

    bed = (areas * eps_v)[:, None] * dp + g * np.einsum("tq,tq,tjq->tj", weights, H, r)
    wall = wall_terms(space, U, P, obstacle_faces(mesh))
    return LevelTerms(integral=float(np.sum(weights * e)), S=S, bed=bed, wall=wall)


def obstacle_faces(mesh):
    return mesh.topology.faces_with_tag(BoundaryTag.OBSTACLE)


def wall_terms(space, U, P, faces):
    """
    Moments int_f (p + u . r) grad(phi_a) . Q ds on obstacle faces, shape
    (n_faces, 3) over the corners a of the cell owning each face.
    """
    mesh = space.mesh
    if len(faces) == 0:
        return np.zeros((0, 3))
    ends = mesh.topology.faces[faces]
    s = space.edge_rule.points[None, :, None]
    U_e = U[ends[:, 0]][:, None] * (1.0 - s) + U[ends[:, 1]][:, None] * s
    P_e = P[ends[:, 0]][:, None] * (1.0 - s) + P[ends[:, 1]][:, None] * s
    H, Q = U_e[..., 0], U_e[..., 1:]
    if np.any(~(H > 0.0)):
        raise GradientError("projected water height on the obstacle is not positive")

    coefficient = P_e[..., 0] + np.einsum("fqi,fqi->fq", Q / H[..., None], P_e[..., 1:])
    grads = mesh.geometry.grad_lambda[mesh.topology.face_cells[faces, 0]]
    transport = np.einsum("fad,fqd->fqa", grads, Q)
    return np.einsum("fq,fq,fqa->fa", space.face_weights[faces], coefficient, transport)


@dataclass(frozen=True)
class VolumeSensitivity:
    """
    Time-integrated sensitivities of the mismatch objective on one mesh.

    ``S`` (n_cells, 2, 2) pairs with grad V, ``bed`` (n_cells, 2) with the
    gradient of the bathymetry's material change, and ``initial`` (n_vertices, 3)
    is M P(0) for the initial state's material change. ``wall`` (n_faces, 3) holds
    the obstacle wall moments of ``wall_faces``.
    """

    mesh: object
    S: np.ndarray
    bed: np.ndarray
    initial: np.ndarray
    bed_slopes: np.ndarray
    initial_slopes: np.ndarray
    wall_faces: np.ndarray = None
    wall: np.ndarray = None
    spatial_data: bool = True

    def gradient(self):
        """Per-vertex vectors G with DJ1[V] = sum_v G[v] . V[v]."""
        mesh = self.mesh
        grad_lambda = mesh.geometry.grad_lambda
        G = np.zeros((mesh.n_vertices, 2))
        local = np.einsum("tdj,taj->tad", self.S, grad_lambda)
        np.add.at(G, mesh.triangles.ravel(), local.reshape(-1, 2))
        if self.wall is not None and len(self.wall):
            cells = mesh.topology.face_cells[self.wall_faces, 0]
            normals = mesh.geometry.face_normals[self.wall_faces]
            wall = self.wall[..., None] * normals[:, None, :]
            np.add.at(G, mesh.triangles[cells].ravel(), wall.reshape(-1, 2))
        if self.spatial_data:
            coupling = np.einsum("td,tad->ta", self.bed, grad_lambda)
            slopes = self.bed_slopes[mesh.triangles]
            np.add.at(G, mesh.triangles.ravel(), (coupling[..., None] * slopes).reshape(-1, 2))
            G -= np.einsum("vc,vcd->vd", self.initial, self.initial_slopes)
        return G

    def derivative(self, V):
        V = np.asarray(V, dtype=float)
        return float(np.sum(self.gradient() * V))


def _check_grids(forward, adjoint, bathymetry):
    if len(forward.times) != len(adjoint.times) or not np.allclose(
        forward.times, adjoint.times, rtol=0.0, atol=1e-14
    ):
        raise GradientError("forward and adjoint time levels differ")
    if forward.space.n_cells != adjoint.space.n_cells:
        raise GradientError("forward and adjoint live on different meshes")
    if bathymetry.space.n_cells != forward.space.n_cells:
        raise GradientError("bathymetry lives on a different mesh")
    if len(forward.eps_v) != forward.n_steps:
        raise GradientError("forward trajectory is missing frozen viscosities")


def volume_sensitivity(
    forward, adjoint, params, bathymetry, rule=TimeRule.TRAPEZOID, spatial_data=True
):
    """Accumulate the volume-form sensitivities over every forward step."""
    _check_grids(forward, adjoint, bathymetry)
    space = forward.space
    mesh = space.mesh
    rule = TimeRule(rule)
    U = [space.dg_to_cg(state) for state in forward.states]
    P = [space.dg_to_cg(state) for state in adjoint.states]
    z = bathymetry.vertex_values

    S = np.zeros((mesh.n_triangles, 2, 2))
    bed = np.zeros((mesh.n_triangles, 2))
    faces = obstacle_faces(mesh)
    wall = np.zeros((len(faces), 3))
    for n in range(forward.n_steps):
        dt = forward.times[n + 1] - forward.times[n]
        U_t = (U[n + 1] - U[n]) / dt
        levels = [(n, dt)] if rule == TimeRule.LEFT else [(n, 0.5 * dt), (n + 1, 0.5 * dt)]
        for level, weight in levels:
            terms = level_terms(
                space, U[level], P[level], U_t, forward.eps_v[n], params.eps_f, z, params.g
            )
            S += weight * terms.S
            bed += weight * terms.bed
            wall += weight * terms.wall

    if params.c_f > 0:
        logger.warning("Friction c_f=%g is not part of the shape derivative", params.c_f)
    logger.debug("Volume sensitivities accumulated over %d steps", forward.n_steps)
    return VolumeSensitivity(
        mesh=mesh,
        S=S,
        bed=bed,
        initial=cg.mass(mesh) @ P[0],
        bed_slopes=recovered_gradients(mesh, z),
        initial_slopes=recovered_gradients(mesh, U[0]),
        wall_faces=faces,
        wall=wall,
        spatial_data=spatial_data,
    )


def dj1_volume(
    forward, adjoint, params, bathymetry, V, rule=TimeRule.TRAPEZOID, spatial_data=True
):
    """DJ1[V] for a vertex field V of shape (n_vertices, 2)."""
    sensitivity = volume_sensitivity(forward, adjoint, params, bathymetry, rule, spatial_data)
    return sensitivity.derivative(V)
