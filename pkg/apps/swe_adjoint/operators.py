"""
Coefficient matrices of the continuous adjoint system.

Marched in reversed time tau = T - t the adjoint P = (p, r1, r2) solves

    P_tau + A P_x + B P_y = C P + div(G grad P)

with A = -J1^T, B = -J2^T and C the transposed bed-slope coupling. Friction
has no adjoint term.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from apps.swe_forward.physics import flux_jacobians, velocity

# Largest eigenvalue mismatch accepted by adjoint_spectrum_check.
SPECTRUM_TOLERANCE = 1e-12

AdjointMatrices = namedtuple("AdjointMatrices", ["A", "B", "C", "C_tilde"])


def transpose(J):
    """Swap the two leading (matrix) axes."""
    return np.swapaxes(J, 0, 1)


def jacobian_derivatives(U, dU, g):
    """Directional derivatives of J1 and J2 along dU, each shape (3, 3, ...)."""
    U = np.asarray(U, dtype=float)
    dU = np.asarray(dU, dtype=float)
    u, v = velocity(U)
    du = (dU[1] - u * dU[0]) / U[0]
    dv = (dU[2] - v * dU[0]) / U[0]
    zero = np.zeros_like(du)
    cross = -(du * v + u * dv)
    dJ1 = np.array(
        [
            [zero, zero, zero],
            [g * dU[0] - 2.0 * u * du, 2.0 * du, zero],
            [cross, dv, du],
        ]
    )
    dJ2 = np.array(
        [
            [zero, zero, zero],
            [cross, dv, du],
            [g * dU[0] - 2.0 * v * dv, zero, 2.0 * dv],
        ]
    )
    return dJ1, dJ2


def adjoint_matrices(U, g, grad_z, grad_U=None):
    """
    A, B and the coupling C of the adjoint system at states U (components first).

    ``grad_z`` has (d/dx, d/dy) on the leading axis. When ``grad_U`` with shape
    (3, 2, ...) is given, C_tilde = C - A_x - B_y is the source of the
    equivalent conservative form P_tau + (A P)_x + (B P)_y = C_tilde P.
    """
    U = np.asarray(U, dtype=float)
    grad_z = np.asarray(grad_z, dtype=float)
    J1, J2 = flux_jacobians(U, g)
    A = -transpose(J1)
    B = -transpose(J2)

    C = np.zeros_like(A)
    C[0, 1] = -g * grad_z[0]
    C[0, 2] = -g * grad_z[1]

    C_tilde = None
    if grad_U is not None:
        grad_U = np.asarray(grad_U, dtype=float)
        dJ1, _ = jacobian_derivatives(U, grad_U[:, 0], g)
        _, dJ2 = jacobian_derivatives(U, grad_U[:, 1], g)
        # A_x = -dJ1^T and B_y = -dJ2^T
        C_tilde = C + transpose(dJ1) + transpose(dJ2)
    return AdjointMatrices(A, B, C, C_tilde)


@dataclass(frozen=True)
class SpectrumReport:
    """Sorted eigenvalues of the adjoint and forward normal flux Jacobians."""

    adjoint: np.ndarray
    forward: np.ndarray
    mismatch: float

    @property
    def ok(self):
        return self.mismatch <= SPECTRUM_TOLERANCE


def _sorted_eigenvalues(matrices):
    stacked = np.moveaxis(matrices.reshape(3, 3, -1), -1, 0)
    return np.sort(np.linalg.eigvals(stacked).real, axis=-1)


def adjoint_spectrum_check(U, n, g):
    """
    Compare the spectrum of the adjoint flux Jacobian -(n1 A + n2 B), taken in
    physical time, with that of n1 J1 + n2 J2.

    Accepts a single state or a batch with matching trailing shapes.
    """
    U = np.asarray(U, dtype=float)
    n = np.asarray(n, dtype=float)
    matrices = adjoint_matrices(U, g, np.zeros((2,) + U.shape[1:]))
    J1, J2 = flux_jacobians(U, g)
    adjoint = _sorted_eigenvalues(-(n[0] * matrices.A + n[1] * matrices.B))
    forward = _sorted_eigenvalues(n[0] * J1 + n[1] * J2)
    mismatch = float(np.max(np.abs(adjoint - forward))) if adjoint.size else 0.0
    shape = U.shape[1:] + (3,)
    return SpectrumReport(adjoint.reshape(shape), forward.reshape(shape), mismatch)
