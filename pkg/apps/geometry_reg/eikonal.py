"""
Viscous Eikonal approximation of the signed distance on P1 elements.

Solves, for w = 0 on the boundary,

    eps (grad w, grad phi) + (|grad w|, phi) = (1, phi)

with eps the largest cell diameter, by damped Newton from a scaled Poisson
guess.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree
from scipy.sparse.linalg import spsolve

from apps.dg_space import cg
from apps.geometry_reg.distance import BoundaryPolylines
from apps.geometry_reg.exceptions import EikonalError

logger = logging.getLogger(__name__)

# Smoothing of |grad w| where the gradient vanishes.
GRADIENT_FLOOR = 1e-8
# Candidate cells checked per query point before a full scan.
LOCATE_CANDIDATES = 12


@dataclass
class SignedDistance:
    """Vertex values of a signed-distance approximation on a mesh."""

    mesh: object
    values: np.ndarray
    epsilon: float = 0.0
    iterations: int = 0
    residual: float = 0.0

    @cached_property
    def gradient_norms(self):
        return np.linalg.norm(cg.cell_gradients(self.mesh, self.values), axis=1)

    @cached_property
    def _tree(self):
        return cKDTree(self.mesh.geometry.centroids)

    @cached_property
    def _polylines(self):
        return BoundaryPolylines.from_mesh(self.mesh)

    def _barycentric(self, points, cells):
        corners = self.mesh.vertices[self.mesh.triangles[cells]]
        grad = self.mesh.geometry.grad_lambda[cells]
        offset = points - corners[..., 0, :]
        lam = np.einsum("...jd,...d->...j", grad, offset)
        lam[..., 0] = 1.0 - lam[..., 1] - lam[..., 2]
        return lam

    def signed_distance(self, points):
        """
        Interpolate w at arbitrary points. Points outside the mesh get minus
        their exact distance to the boundary.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k = min(LOCATE_CANDIDATES, self.mesh.n_triangles)
        _, candidates = self._tree.query(points, k=k)
        candidates = np.asarray(candidates).reshape(len(points), k)
        lam = self._barycentric(points[:, None, :], candidates)
        hit = np.all(lam >= -1e-12, axis=2)
        found = hit.any(axis=1)
        first = np.argmax(hit, axis=1)
        rows = np.arange(len(points))
        cells = candidates[rows, first]
        weights = lam[rows, first]

        inside = self._polylines.inside(points)
        for i in np.flatnonzero(~found & inside):
            everywhere = self._barycentric(points[i][None], np.arange(self.mesh.n_triangles))
            matches = np.flatnonzero(np.all(everywhere >= -1e-12, axis=1))
            if len(matches):
                found[i] = True
                cells[i] = matches[0]
                weights[i] = everywhere[matches[0]]

        result = np.einsum("nj,nj->n", weights, self.values[self.mesh.triangles[cells]])
        missing = ~found
        if np.any(missing):
            result[missing] = -self._polylines.closest(points[missing]).distance
        return result


def _gradient_operator(mesh, w):
    grads = cg.cell_gradients(mesh, w)
    norms = np.sqrt(np.sum(grads**2, axis=1) + GRADIENT_FLOOR**2)
    return grads, norms


def _residual(mesh, stiffness, load, w, epsilon):
    _, norms = _gradient_operator(mesh, w)
    return epsilon * (stiffness @ w) + cg.load(mesh, norms) - load


def _jacobian(mesh, stiffness, w, epsilon):
    grads, norms = _gradient_operator(mesh, w)
    geometry = mesh.geometry
    directions = grads / norms[:, None]
    # d|grad w|_t / dw_j = direction_t . grad lambda_j, tested with the hat functions of t
    row_block = np.einsum("td,tjd->tj", directions, geometry.grad_lambda)
    local = (geometry.areas / 3.0)[:, None, None] * np.repeat(row_block[:, None, :], 3, axis=1)
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    transport = sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return epsilon * stiffness + transport


def eikonal_solve(mesh, tol=1e-8, max_iterations=50, epsilon=None):
    """Stabilized Eikonal distance with homogeneous Dirichlet data on every boundary."""
    epsilon = float(np.max(mesh.geometry.diameters)) if epsilon is None else float(epsilon)
    stiffness = cg.stiffness(mesh)
    load = cg.load(mesh, 1.0)
    boundary = mesh.boundary_vertices()
    load_norm = np.linalg.norm(load)

    matrix, rhs = cg.apply_dirichlet(stiffness, load, boundary, 0.0)
    w = spsolve(matrix.tocsc(), rhs)
    scale = np.mean(np.linalg.norm(cg.cell_gradients(mesh, w), axis=1))
    w = w / scale if scale > 0 else w

    F = _residual(mesh, stiffness, load, w, epsilon)
    F[boundary] = 0.0
    norm = np.linalg.norm(F) / load_norm
    iteration = 0
    while norm > tol:
        if iteration >= max_iterations:
            raise EikonalError(
                f"Eikonal iteration stalled at residual {norm:.3e} after {iteration} steps"
            )
        J = _jacobian(mesh, stiffness, w, epsilon)
        J, rhs = cg.apply_dirichlet(J, -F, boundary, 0.0)
        step = spsolve(J.tocsc(), rhs)

        damping = 1.0
        while True:
            trial = w + damping * step
            F_trial = _residual(mesh, stiffness, load, trial, epsilon)
            F_trial[boundary] = 0.0
            trial_norm = np.linalg.norm(F_trial) / load_norm
            if trial_norm < (1.0 - 1e-4 * damping) * norm or damping < 1e-3:
                break
            damping *= 0.5
        w, F, norm = trial, F_trial, trial_norm
        iteration += 1
        logger.debug("Eikonal step %d: residual %.3e, damping %.3g", iteration, norm, damping)

    if not np.all(np.isfinite(w)):
        raise EikonalError("Eikonal solution is not finite")
    logger.info(
        "Eikonal distance converged in %d steps (residual %.2e, eps %.3g)",
        iteration,
        norm,
        epsilon,
    )
    return SignedDistance(mesh=mesh, values=w, epsilon=epsilon, iterations=iteration, residual=norm)
