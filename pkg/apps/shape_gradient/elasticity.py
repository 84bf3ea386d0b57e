"""
Smoothing of the shape derivative by linear elasticity.

The deformation W solves int sigma(W) : eps(V) = DJ[V] for every
piecewise-linear V vanishing on the outer boundary, with
sigma = lambda tr(eps) I + 2 mu eps and a Lame field mu interpolated
harmonically between mu_max on the obstacle and mu_min outside.
"""

import logging
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from scipy import sparse
from scipy.sparse.linalg import spsolve

from apps.dg_space import cg
from apps.mesh_core.mesh import BoundaryTag
from apps.shape_gradient.exceptions import ElasticityError, GradientError

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10
NEGATIVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ElasticityParams:
    lambda_elas: float = 0.0
    mu_min: float = 10.0
    mu_max: float = 100.0

    def __post_init__(self):
        errors = {}
        if not self.lambda_elas >= 0:
            errors["lambda_elas"] = "must be non-negative"
        if not self.mu_min > 0:
            errors["mu_min"] = "must be positive"
        if not self.mu_max >= self.mu_min:
            errors["mu_max"] = "must not be below mu_min"
        if errors:
            raise ValidationError(errors)


@dataclass
class DeformationField:
    W: np.ndarray
    mu: np.ndarray


def _solve(matrix, rhs, what):
    try:
        solution = spsolve(matrix.tocsc(), rhs)
    except RuntimeError as error:
        raise ElasticityError(f"{what} solve failed: {error}") from error
    solution = np.asarray(solution, dtype=float).reshape(rhs.shape)
    if not np.all(np.isfinite(solution)):
        raise ElasticityError(f"{what} solution is not finite")
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    residual = float(np.linalg.norm(matrix @ solution - rhs)) / scale
    if residual > RESIDUAL_TOLERANCE and np.linalg.norm(rhs) > 0:
        raise ElasticityError(f"{what} solve left relative residual {residual:.2e}")
    return solution


def outer_vertices(mesh):
    return mesh.boundary_vertices(BoundaryTag.SHORE, BoundaryTag.OPEN_SEA)


def lame_field(mesh, mu_min=10.0, mu_max=100.0):
    """Harmonic interpolation of mu_max on the obstacle and mu_min on the outer boundary."""
    if mu_min == mu_max:
        return np.full(mesh.n_vertices, float(mu_min))
    obstacle = mesh.boundary_vertices(BoundaryTag.OBSTACLE)
    outer = outer_vertices(mesh)
    nodes = np.concatenate([obstacle, outer])
    values = np.concatenate([np.full(len(obstacle), mu_max), np.full(len(outer), mu_min)])
    matrix, rhs = cg.apply_dirichlet(cg.stiffness(mesh), np.zeros(mesh.n_vertices), nodes, values)
    return _solve(matrix, rhs, "Lame field")


def elasticity_matrix(mesh, mu, lambda_elas=0.0):
    """Stiffness of the vector P1 elasticity form, dofs ordered (vertex, direction)."""
    geometry = mesh.geometry
    grads = geometry.grad_lambda
    areas = geometry.areas
    mu_cell = np.asarray(mu, dtype=float)[mesh.triangles].mean(axis=1)

    identity = np.eye(2)
    # eps(phi_a e_d) : eps(phi_b e_e) = (delta_de g_a . g_b + g_a,e g_b,d) / 2
    shear = np.einsum("de,tak,tbk->tadbe", identity, grads, grads) + np.einsum(
        "tae,tbd->tadbe", grads, grads
    )
    volumetric = np.einsum("tad,tbe->tadbe", grads, grads)
    local = (areas * mu_cell)[:, None, None, None, None] * shear
    local = local + (lambda_elas * areas)[:, None, None, None, None] * volumetric

    dofs = (2 * mesh.triangles[:, :, None] + np.arange(2)[None, None, :]).reshape(-1, 6)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_vertices
    return sparse.coo_matrix((local.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()


def solve_elasticity(mesh, assembly, mu, lambda_elas=0.0):
    """Riesz representative W of the assembled derivative, fixed on the outer boundary."""
    if not assembly.is_finite():
        raise ElasticityError("shape derivative is not finite")
    fixed = outer_vertices(mesh)
    if len(fixed) == 0:
        raise ElasticityError("mesh has no outer boundary to hold the deformation")
    matrix = elasticity_matrix(mesh, mu, lambda_elas)
    rhs = np.asarray(assembly.values, dtype=float).reshape(-1)
    fixed_dofs = (2 * fixed[:, None] + np.arange(2)[None, :]).ravel()
    matrix, rhs = cg.apply_dirichlet(matrix, rhs, fixed_dofs, 0.0)
    W = _solve(matrix, rhs, "elasticity").reshape(-1, 2)
    W[fixed] = 0.0
    logger.debug("Elasticity solve: max |W| = %.3e", float(np.abs(W).max()))
    return DeformationField(W=W, mu=np.asarray(mu, dtype=float))


def elastic_energy(mesh, W, mu, lambda_elas=0.0):
    """int sigma(W) : eps(W)."""
    W = np.asarray(W, dtype=float).reshape(-1)
    return float(W @ (elasticity_matrix(mesh, mu, lambda_elas) @ W))


def gradient_norm(assembly, W):
    """Elasticity-energy norm sqrt(DJ[W]) of the shape gradient."""
    value = assembly.apply(W)
    if value < -NEGATIVE_TOLERANCE:
        raise GradientError(f"DJ[W] = {value:.3e} is negative")
    return float(np.sqrt(max(value, 0.0)))
