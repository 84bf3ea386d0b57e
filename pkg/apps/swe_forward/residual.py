"""
Spatial DG residual of the viscous shallow-water system.

The semi-discrete system is dU/dt = -M^-1 R(U) where R collects, per basis
function phi of every cell,

    - (grad phi, F(U))                  volume advection
    + <phi, H(U+, U-, n)>               face advection
    - (phi, S(U))                       bed slope and friction
    + a(U_hat, phi)                     SIPG form of -div(G grad U_hat)

with U_hat = (H + z, Q) and G = diag(eps_v, eps_f1, eps_f2). Viscous terms
are homogeneous Neumann on every boundary.
"""

import logging

import numpy as np

from apps.mesh_core.mesh import BoundaryTag
from apps.swe_forward.boundary import boundary_state
from apps.swe_forward.exceptions import PositivityError
from apps.swe_forward.fluxes import get_riemann_solver
from apps.swe_forward.physics import H_MIN, physical_flux, source_term
from apps.swe_forward.viscosity import shock_viscosity

logger = logging.getLogger(__name__)


def _components_first(values):
    return np.moveaxis(values, 1, 0)


def _components_second(values):
    return np.moveaxis(values, 0, 1)


def check_positive(H, cells, time):
    """Raise PositivityError naming the first offending cell."""
    bad = ~(H > H_MIN)
    if np.any(bad):
        index = np.unravel_index(int(np.flatnonzero(bad.ravel())[0]), H.shape)
        cell = int(cells[index[0]])
        raise PositivityError(
            f"water height {float(H[index]):.3e} below {H_MIN:g} in cell {cell}"
            + (f" at t={time:.6g}" if time is not None else ""),
            time=time,
            cell=cell,
        )


def diffusion_matrix(eps_v, eps_f, n_cells):
    """Diagonal G per cell, shape (n_cells, 3)."""
    G = np.empty((n_cells, 3))
    G[:, 0] = eps_v
    G[:, 1:] = np.asarray(eps_f, dtype=float)
    return G


def sipg_residual(space, coeffs, G, C_IP):
    """
    Symmetric interior-penalty form a(u, phi) of -div(G grad u) for every
    component, with a per-cell diagonal G of shape (n_cells, n_components).
    """
    interior = space.mesh.topology.interior_faces
    residual = space.test_volume_gradient(space.gradient(coeffs) * G[:, :, None, None])
    if len(interior) == 0:
        return residual

    cells_plus = space.face_cells[interior, 0]
    cells_minus = space.face_cells[interior, 1]
    G_plus = G[cells_plus]
    G_minus = G[cells_minus]
    n = np.asarray(space.mesh.geometry.face_normals)[interior]
    face_h = np.asarray(space.mesh.geometry.face_h)[interior]

    jump = space.face_trace(coeffs, 0, interior) - space.face_trace(coeffs, 1, interior)
    flux_plus = space.face_trace_gradient(coeffs, 0, interior) * G_plus[:, :, None, None]
    flux_minus = space.face_trace_gradient(coeffs, 1, interior) * G_minus[:, :, None, None]
    average = 0.5 * np.einsum("fcqd,fd->fcq", flux_plus + flux_minus, n)
    delta = C_IP * space.order**2 / face_h[:, None] * 0.5 * (G_plus + G_minus)
    penalty = delta[:, :, None] * jump

    space.test_face(penalty - average, 0, interior, out=residual)
    space.test_face(average - penalty, 1, interior, out=residual)
    jump_n = jump[..., None] * n[:, None, None, :]
    space.test_face_gradient(-0.5 * G_plus[:, :, None, None] * jump_n, 0, interior, out=residual)
    space.test_face_gradient(-0.5 * G_minus[:, :, None, None] * jump_n, 1, interior, out=residual)
    return residual


class ForwardOperator:
    """Residual and rate of the forward problem on a fixed space and bathymetry."""

    def __init__(self, space, params, bathymetry):
        self.space = space
        self.params = params
        self.bathymetry = bathymetry
        self.solver = get_riemann_solver(params)

        topology = space.mesh.topology
        normals = np.asarray(space.mesh.geometry.face_normals)
        self.interior = topology.interior_faces
        self.interior_normals = normals[self.interior].T[:, :, None]
        self.boundary_groups = []
        for tag in BoundaryTag:
            faces = topology.faces_with_tag(tag)
            if len(faces):
                self.boundary_groups.append((tag, faces, normals[faces].T[:, :, None]))
        self.z_plus = bathymetry.face_values(0, self.interior)
        self.z_minus = bathymetry.face_values(1, self.interior)

    def shock_viscosity(self, U):
        return shock_viscosity(U, self.space, self.params.sensor)

    def residual(self, U, eps_v=None, time=None):
        space = self.space
        params = self.params
        g = params.g
        if eps_v is None:
            eps_v = self.shock_viscosity(U)
        cells = np.arange(space.n_cells)

        volume = _components_first(space.evaluate(U))
        check_positive(volume[0], cells, time)
        F = physical_flux(volume, g)
        residual = -space.test_volume_gradient(np.transpose(F, (2, 0, 3, 1)))
        grad_z = np.moveaxis(self.bathymetry.gradient, -1, 0)
        source = source_term(volume, grad_z, g, params.c_f)
        residual -= space.test_volume(_components_second(source))

        if len(self.interior):
            self._interior_flux(U, residual, time)
        for tag, faces, n in self.boundary_groups:
            inner = _components_first(space.face_trace(U, 0, faces))
            check_positive(inner[0], space.face_cells[faces, 0], time)
            ghost = boundary_state(inner, n, tag, params.H1)
            flux = self.solver(inner, ghost, n)
            space.test_face(_components_second(flux), 0, faces, out=residual)

        z = self.bathymetry.z.coeffs[:, 0]
        U_hat = U.coeffs.copy()
        U_hat[:, 0] += z
        G = diffusion_matrix(eps_v, params.eps_f, space.n_cells)
        residual += sipg_residual(space, U_hat, G, params.C_IP)
        return residual

    def _interior_flux(self, U, residual, time):
        space = self.space
        g = self.params.g
        faces = self.interior
        n = self.interior_normals
        plus = _components_first(space.face_trace(U, 0, faces))
        minus = _components_first(space.face_trace(U, 1, faces))
        check_positive(plus[0], space.face_cells[faces, 0], time)
        check_positive(minus[0], space.face_cells[faces, 1], time)
        u_plus = plus[1:] / plus[0]
        u_minus = minus[1:] / minus[0]

        H_plus, H_minus = plus[0], minus[0]
        if self.params.well_balanced:
            z_star = np.maximum(self.z_plus, self.z_minus)
            H_plus = np.maximum(0.0, plus[0] + self.z_plus - z_star)
            H_minus = np.maximum(0.0, minus[0] + self.z_minus - z_star)

        flux = self.solver.solve(H_plus, u_plus, H_minus, u_minus, n)
        flux_plus = flux.copy()
        flux_minus = flux.copy()
        if self.params.well_balanced:
            flux_plus[1:] += 0.5 * g * (plus[0] ** 2 - H_plus**2) * n
            flux_minus[1:] += 0.5 * g * (minus[0] ** 2 - H_minus**2) * n
        space.test_face(_components_second(flux_plus), 0, faces, out=residual)
        space.test_face(-_components_second(flux_minus), 1, faces, out=residual)

    def rate(self, U, eps_v=None, time=None):
        """dU/dt = -M^-1 R(U)."""
        return -self.space.apply_inverse_mass(self.residual(U, eps_v, time))


def residual(U, space, params, bathymetry, t=0.0, eps_v=None):
    return ForwardOperator(space, params, bathymetry).residual(U, eps_v, t)
