"""
Discontinuous Galerkin function space on a triangular mesh.

DGSpace precomputes basis values and gradients at the volume and edge
quadrature points of every cell, and exposes the handful of assembly
primitives the solvers are written in: evaluation, traces, testing against
basis functions and the block-diagonal inverse mass.

Face quadrature points are ordered along ``topology.faces[f]``, which is the
counter-clockwise direction of the first cell; the second cell sees the same
points in reversed edge parameter.
"""

import logging

import numpy as np

from apps.dg_space.basis import lagrange_basis
from apps.dg_space.exceptions import FieldShapeError, SingularMassError
from apps.dg_space.fields import DGField
from apps.dg_space.quadrature import REFERENCE_VERTICES, edge_rule, triangle_rule

logger = logging.getLogger(__name__)

# Reciprocal condition number below which a reference mass matrix is rejected.
MASS_CONDITION_LIMIT = 1e-12


def _edge_barycentric(local, s):
    """Barycentric points at parameters ``s`` along local edge ``local``."""
    points = np.zeros((len(s), 3))
    points[:, (local + 1) % 3] = 1.0 - s
    points[:, (local + 2) % 3] = s
    return points


class DGSpace:
    def __init__(self, mesh, order=1):
        self.mesh = mesh
        self.order = int(order)
        self.basis = lagrange_basis(self.order)
        self.ndof = self.basis.ndof
        self.volume_rule = triangle_rule(2 * self.order + 2)
        self.edge_rule = edge_rule(2 * self.order + 3)

        geometry = mesh.geometry
        self.areas = np.asarray(geometry.areas)
        if np.any(~(self.areas > 0.0)):
            cell = int(np.flatnonzero(~(self.areas > 0.0))[0])
            raise SingularMassError(f"cell {cell} has non-positive area {self.areas[cell]:.3e}")

        reference = self.volume_rule.reference_points
        self.phi = self.basis.values(reference)
        # d(xi, eta)/dx are the gradients of the barycentric coordinates of vertices 1 and 2
        self._ref_gradient = np.asarray(geometry.grad_lambda)[:, 1:3, :]
        self.grad_phi = np.einsum(
            "qik,tkd->tqid", self.basis.gradients(reference), self._ref_gradient
        )
        self.weights = 2.0 * self.areas[:, None] * self.volume_rule.weights[None, :]
        corners = mesh.vertices[mesh.triangles]
        self.points = np.einsum("qj,tjd->tqd", self.volume_rule.points, corners)

        self.mass_reference = np.einsum(
            "q,qi,qj->ij", self.volume_rule.weights, self.phi, self.phi
        )
        if 1.0 / np.linalg.cond(self.mass_reference) < MASS_CONDITION_LIMIT:
            raise SingularMassError("reference mass matrix is singular")
        self.mass_reference_inverse = np.linalg.inv(self.mass_reference)

        self._init_faces()
        logger.debug(
            "DG space of order %d on %d cells, %d volume and %d edge points",
            self.order,
            mesh.n_triangles,
            len(self.volume_rule),
            len(self.edge_rule),
        )

    def _init_faces(self):
        mesh = self.mesh
        topology = mesh.topology
        s = self.edge_rule.points
        self.edge_phi = np.empty((3, len(s), self.ndof))
        self.edge_phi_reversed = np.empty((3, len(s), self.ndof))
        self.edge_dphi = np.empty((3, len(s), self.ndof, 2))
        self.edge_dphi_reversed = np.empty((3, len(s), self.ndof, 2))
        for local in range(3):
            forward = _edge_barycentric(local, s) @ REFERENCE_VERTICES
            backward = _edge_barycentric(local, 1.0 - s) @ REFERENCE_VERTICES
            self.edge_phi[local] = self.basis.values(forward)
            self.edge_phi_reversed[local] = self.basis.values(backward)
            self.edge_dphi[local] = self.basis.gradients(forward)
            self.edge_dphi_reversed[local] = self.basis.gradients(backward)

        self.face_cells = topology.face_cells
        self.face_local = topology.face_local
        self.face_weights = np.asarray(mesh.geometry.face_lengths)[:, None] * self.edge_rule.weights
        ends = mesh.vertices[topology.faces]
        self.face_points = (
            ends[:, None, 0, :] * (1.0 - s)[None, :, None] + ends[:, None, 1, :] * s[None, :, None]
        )

    @property
    def n_cells(self):
        return self.mesh.n_triangles

    def _coeffs(self, field):
        coeffs = field.coeffs if isinstance(field, DGField) else np.asarray(field, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[0] != self.n_cells or coeffs.shape[2] != self.ndof:
            raise FieldShapeError(
                f"coefficients of shape {coeffs.shape} do not fit "
                f"{self.n_cells} cells with {self.ndof} dofs"
            )
        return coeffs

    def _side(self, side, faces):
        faces = np.arange(len(self.face_cells)) if faces is None else np.asarray(faces)
        cells = self.face_cells[faces, side]
        if np.any(cells < 0):
            raise FieldShapeError("requested the outer side of a boundary face")
        local = self.face_local[faces, side]
        return faces, cells, local

    # Construction

    def zeros(self, n_components):
        return DGField.zeros(self.n_cells, n_components, self.order)

    def _sample(self, f, x, y):
        values = f(x, y)
        if isinstance(values, (tuple, list)):
            return np.stack([np.broadcast_to(np.asarray(v, dtype=float), x.shape) for v in values])
        values = np.asarray(values, dtype=float)
        if values.ndim <= x.ndim:
            return np.broadcast_to(values, x.shape)[None]
        return np.broadcast_to(values, (values.shape[0],) + x.shape)

    def project(self, f):
        """L2 projection of ``f(x, y)`` into the space.

        ``f`` receives coordinate arrays and returns one array per component
        (a tuple, or an array with components leading) or a single array.
        """
        x, y = self.points[..., 0], self.points[..., 1]
        samples = self._sample(f, x, y)
        if not np.all(np.isfinite(samples)):
            raise FieldShapeError("projected function is not finite on the mesh")
        moments = np.einsum("q,qi,ctq->tci", self.volume_rule.weights, self.phi, samples)
        return DGField(np.einsum("ij,tcj->tci", self.mass_reference_inverse, moments), self.order)

    def interpolate_vertices(self, vertex_values):
        """Continuous piecewise-linear field given by its vertex values, as a DGField."""
        values = np.asarray(vertex_values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        corner_values = values[self.mesh.triangles]
        nodes = self.basis.nodes
        barycentric = np.column_stack([1.0 - nodes.sum(axis=1), nodes[:, 0], nodes[:, 1]])
        return DGField(np.einsum("ij,tjc->tci", barycentric, corner_values), self.order)

    # Evaluation

    def evaluate(self, field):
        """Values at the volume quadrature points, shape (n_cells, n_components, nq)."""
        return np.einsum("qi,tci->tcq", self.phi, self._coeffs(field))

    def gradient(self, field):
        """Gradients at the volume quadrature points, shape (n_cells, n_components, nq, 2)."""
        return np.einsum("tqid,tci->tcqd", self.grad_phi, self._coeffs(field))

    def face_trace(self, field, side=0, faces=None):
        """Values at face quadrature points from one side, shape (n_faces, n_components, nqe)."""
        coeffs = self._coeffs(field)
        faces, cells, local = self._side(side, faces)
        table = self.edge_phi if side == 0 else self.edge_phi_reversed
        return np.einsum("fqi,fci->fcq", table[local], coeffs[cells])

    def _face_gradient_table(self, side, cells, local):
        table = self.edge_dphi if side == 0 else self.edge_dphi_reversed
        return np.einsum("fqik,fkd->fqid", table[local], self._ref_gradient[cells])

    def face_trace_gradient(self, field, side=0, faces=None):
        """Gradients at face quadrature points, shape (n_faces, n_components, nqe, 2)."""
        coeffs = self._coeffs(field)
        faces, cells, local = self._side(side, faces)
        table = self._face_gradient_table(side, cells, local)
        return np.einsum("fqid,fci->fcqd", table, coeffs[cells])

    # Testing against basis functions

    def test_volume(self, values):
        """Integrals of values times each basis function, shape (n_cells, n_components, ndof)."""
        return np.einsum("tq,qi,tcq->tci", self.weights, self.phi, values)

    def test_volume_gradient(self, values):
        """Integrals of values dotted with each basis gradient."""
        return np.einsum("tq,tqid,tcqd->tci", self.weights, self.grad_phi, values)

    def test_face(self, values, side=0, faces=None, out=None):
        """Scatter face integrals of values times the basis of one side into cell moments."""
        faces, cells, local = self._side(side, faces)
        table = self.edge_phi if side == 0 else self.edge_phi_reversed
        moments = np.einsum("fq,fqi,fcq->fci", self.face_weights[faces], table[local], values)
        if out is None:
            out = np.zeros((self.n_cells, values.shape[1], self.ndof))
        np.add.at(out, cells, moments)
        return out

    def test_face_gradient(self, values, side=0, faces=None, out=None):
        """Scatter face integrals of values dotted with the basis gradients of one side."""
        faces, cells, local = self._side(side, faces)
        table = self._face_gradient_table(side, cells, local)
        moments = np.einsum("fq,fqid,fcqd->fci", self.face_weights[faces], table, values)
        if out is None:
            out = np.zeros((self.n_cells, values.shape[1], self.ndof))
        np.add.at(out, cells, moments)
        return out

    # Mass and reductions

    def mass_apply(self, field):
        coeffs = self._coeffs(field)
        moments = np.einsum("ij,tcj->tci", self.mass_reference, coeffs)
        return moments * (2.0 * self.areas)[:, None, None]

    def apply_inverse_mass(self, residual):
        """Solve the block-diagonal mass system cell by cell."""
        coeffs = self._coeffs(residual)
        rate = np.einsum("ij,tcj->tci", self.mass_reference_inverse, coeffs)
        return DGField(rate / (2.0 * self.areas)[:, None, None], self.order)

    def cell_integrals(self, field):
        return np.einsum("tq,tcq->tc", self.weights, self.evaluate(field))

    def cell_means(self, field):
        return self.cell_integrals(field) / self.areas[:, None]

    def integrate(self, field):
        """Domain integral of every component."""
        return self.cell_integrals(field).sum(axis=0)

    def inner(self, a, b):
        """L2 inner product summed over components."""
        return float(np.einsum("tq,tcq,tcq->", self.weights, self.evaluate(a), self.evaluate(b)))

    def dg_to_cg(self, field):
        """Area-weighted average of the incident cell traces at every vertex.

        Returns an array of shape (n_vertices, n_components).
        """
        traces = self._coeffs(field)[:, :, :3]
        weighted = traces * self.areas[:, None, None]
        n_components = traces.shape[1]
        totals = np.zeros((self.mesh.n_vertices, n_components))
        weights = np.zeros(self.mesh.n_vertices)
        for corner in range(3):
            vertices = self.mesh.triangles[:, corner]
            np.add.at(totals, vertices, weighted[:, :, corner])
            np.add.at(weights, vertices, self.areas)
        return totals / weights[:, None]
