"""
Spatial DG residual of the adjoint system.

The adjoint is marched as M dP/dtau = -R*(P) with, per basis function phi,

    (phi, A P_x + B P_y)                      strong-form transport
    + <phi, (alpha I - A_n)(P+ - P-) / 2>     upwind face penalty
    - (phi, C P)                              bed-slope coupling
    + a(P, phi)                               SIPG form with the forward G
    + <phi, C^2 (U_hat - U~)>                 shore mismatch

where A_n = n1 A + n2 B is evaluated on the own side of each face and alpha
is the forward signal speed, valid because A_n shares the spectrum of the
forward normal Jacobian.
"""

import numpy as np

from apps.mesh_core.mesh import BoundaryTag
from apps.swe_adjoint.exceptions import AdjointError
from apps.swe_adjoint.operators import adjoint_matrices
from apps.swe_forward.boundary import WALL_TAGS, boundary_state, reflect
from apps.swe_forward.fluxes import max_abs_speed
from apps.swe_forward.physics import flux_jacobians
from apps.swe_forward.residual import diffusion_matrix, sipg_residual


def _components_first(values):
    return np.moveaxis(values, 1, 0)


def _components_second(values):
    return np.moveaxis(values, 0, 1)


def mismatch_source(U_trace, z_trace, target_trace, weights):
    """
    Shore source density -C^2 (U_hat - U~) of the adjoint, with U_hat = (H + z, Q).

    Traces have shape (n_faces, 3, nqe) and ``z_trace`` (n_faces, nqe).
    """
    U_hat = np.array(U_trace, dtype=float, copy=True)
    U_hat[:, 0] += z_trace
    return -weights.squared[None, :, None] * (U_hat - target_trace)


def adjoint_boundary_state(P, U, n, tag, H1):
    """
    Ghost adjoint state on a boundary face, components first.

    Walls mirror r so that r.n = 0 holds weakly. The open sea keeps r and
    mirrors p about p_b = -2 (u.n)(r.n) with u = Q / H1, which reduces to
    p = 0 for water at rest.
    """
    P = np.asarray(P, dtype=float)
    tag = BoundaryTag(int(tag))
    if tag in WALL_TAGS:
        return np.concatenate([P[:1], reflect(P[1:], n)])
    if not H1 > 0:
        raise AdjointError(f"open-sea height H1 must be positive, got {H1}")
    un = np.sum(np.asarray(U, dtype=float)[1:] * n, axis=0) / H1
    p_b = -2.0 * un * np.sum(P[1:] * n, axis=0)
    return np.concatenate([np.asarray(2.0 * p_b - P[0])[None], P[1:]])


def _normal_jacobian(U, n, g):
    J1, J2 = flux_jacobians(U, g)
    return n[0] * J1 + n[1] * J2


def _transpose_apply(J, d):
    return np.einsum("ji...,j...->i...", J, d)


def _signal_speed(U_plus, U_minus, n, g):
    return max_abs_speed(
        U_plus[0], U_plus[1:] / U_plus[0], U_minus[0], U_minus[1:] / U_minus[0], n, g
    )


class AdjointOperator:
    """Adjoint residual on a fixed space, linear in P for a given forward state."""

    def __init__(self, space, params, bathymetry, weights):
        self.space = space
        self.params = params
        self.bathymetry = bathymetry
        self.weights = weights

        topology = space.mesh.topology
        normals = np.asarray(space.mesh.geometry.face_normals)
        self.interior = topology.interior_faces
        self.interior_normals = normals[self.interior].T[:, :, None]
        self.boundary_groups = []
        for tag in BoundaryTag:
            faces = topology.faces_with_tag(tag)
            if len(faces):
                self.boundary_groups.append((tag, faces, normals[faces].T[:, :, None]))
        self.shore = topology.faces_with_tag(BoundaryTag.SHORE)
        self.grad_z = np.moveaxis(bathymetry.gradient, -1, 0)

    def source(self, U, time):
        """Mismatch source density on the shore faces."""
        return mismatch_source(
            self.space.face_trace(U, 0, self.shore),
            self.bathymetry.face_values(0, self.shore),
            self.weights.target_trace(time, self.space, self.shore),
            self.weights,
        )

    def residual(self, P, U, eps_v, time):
        space = self.space
        params = self.params
        g = params.g

        volume = _components_first(space.evaluate(U))
        matrices = adjoint_matrices(volume, g, self.grad_z)
        grad_P = np.moveaxis(space.gradient(P), 1, 0)
        values = _components_first(space.evaluate(P))
        transport = np.einsum("ij...,j...->i...", matrices.A, grad_P[..., 0])
        transport += np.einsum("ij...,j...->i...", matrices.B, grad_P[..., 1])
        transport -= np.einsum("ij...,j...->i...", matrices.C, values)
        residual = space.test_volume(_components_second(transport))

        if len(self.interior):
            self._interior_penalty(P, U, residual)
        for tag, faces, n in self.boundary_groups:
            P_plus = _components_first(space.face_trace(P, 0, faces))
            U_plus = _components_first(space.face_trace(U, 0, faces))
            ghost = boundary_state(U_plus, n, tag, params.H1)
            P_ghost = adjoint_boundary_state(P_plus, U_plus, n, tag, params.H1)
            alpha = _signal_speed(U_plus, ghost, n, g)
            jump = P_plus - P_ghost
            term = 0.5 * (alpha * jump + _transpose_apply(_normal_jacobian(U_plus, n, g), jump))
            space.test_face(_components_second(term), 0, faces, out=residual)

        if len(self.shore) and not self.weights.is_zero:
            space.test_face(-self.source(U, time), 0, self.shore, out=residual)

        G = diffusion_matrix(eps_v, params.eps_f, space.n_cells)
        residual += sipg_residual(space, P.coeffs, G, params.C_IP)
        return residual

    def _interior_penalty(self, P, U, residual):
        space = self.space
        g = self.params.g
        faces = self.interior
        n = self.interior_normals
        U_plus = _components_first(space.face_trace(U, 0, faces))
        U_minus = _components_first(space.face_trace(U, 1, faces))
        jump = _components_first(space.face_trace(P, 0, faces) - space.face_trace(P, 1, faces))
        alpha = _signal_speed(U_plus, U_minus, n, g)

        plus = 0.5 * (alpha * jump + _transpose_apply(_normal_jacobian(U_plus, n, g), jump))
        minus = -0.5 * (alpha * jump - _transpose_apply(_normal_jacobian(U_minus, n, g), jump))
        space.test_face(_components_second(plus), 0, faces, out=residual)
        space.test_face(_components_second(minus), 1, faces, out=residual)

    def rate(self, P, U, eps_v, time):
        """dP/dtau = -M^-1 R*(P)."""
        return -self.space.apply_inverse_mass(self.residual(P, U, eps_v, time))
