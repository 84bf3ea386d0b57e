"""Continuous piecewise-linear (P1) assembly on the mesh vertices."""

import numpy as np
from scipy import sparse


def _scatter(mesh, local):
    """Assemble per-cell 3x3 blocks into a sparse vertex matrix."""
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def stiffness(mesh, coefficient=None):
    """P1 stiffness matrix of -div(c grad u) with a per-cell coefficient c."""
    geometry = mesh.geometry
    grads = geometry.grad_lambda
    local = np.einsum("tid,tjd->tij", grads, grads) * geometry.areas[:, None, None]
    if coefficient is not None:
        coefficient = np.broadcast_to(np.asarray(coefficient, dtype=float), (mesh.n_triangles,))
        local = local * coefficient[:, None, None]
    return _scatter(mesh, local)


def mass(mesh, lumped=False):
    areas = mesh.geometry.areas
    if lumped:
        diagonal = np.zeros(mesh.n_vertices)
        np.add.at(diagonal, mesh.triangles.ravel(), np.repeat(areas / 3.0, 3))
        return sparse.diags(diagonal).tocsr()
    reference = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return _scatter(mesh, areas[:, None, None] * reference[None])


def load(mesh, cell_values):
    """Load vector of a per-cell constant source."""
    values = np.broadcast_to(np.asarray(cell_values, dtype=float), (mesh.n_triangles,))
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, mesh.triangles.ravel(), np.repeat(mesh.geometry.areas * values / 3.0, 3))
    return out


def cell_gradients(mesh, vertex_values):
    """Per-cell gradient of a P1 field; trailing axes of ``vertex_values`` are kept.

    Scalar fields give (n_cells, 2), vector fields (n_cells, k, 2).
    """
    values = np.asarray(vertex_values, dtype=float)[mesh.triangles]
    return np.einsum("tj...,tjd->t...d", values, mesh.geometry.grad_lambda)


def apply_dirichlet(matrix, rhs, nodes, values):
    """Impose u[nodes] = values by elimination, keeping the matrix symmetric."""
    nodes = np.asarray(nodes, dtype=np.int64)
    n = matrix.shape[0]
    prescribed = np.zeros(n)
    prescribed[nodes] = values
    rhs = rhs - matrix @ prescribed
    keep = np.ones(n)
    keep[nodes] = 0.0
    mask = sparse.diags(keep)
    matrix = mask @ matrix @ mask + sparse.diags(1.0 - keep)
    rhs[nodes] = prescribed[nodes]
    return sparse.csr_matrix(matrix), rhs
