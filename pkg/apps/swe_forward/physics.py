"""
Pointwise shallow-water physics.

States are arrays with the components (H, Q1, Q2) on the leading axis and any
trailing shape; normals carry (n1, n2) on the leading axis.
"""

import numpy as np

from apps.swe_forward.exceptions import PositivityError

# Water heights at or below this value are treated as dry, which is unsupported.
H_MIN = 1e-8


def check_height(H, time=None):
    H = np.asarray(H)
    bad = ~(H > H_MIN)
    if np.any(bad):
        raise PositivityError(
            f"water height {float(np.min(H)):.3e} is below {H_MIN:g}", time=time
        )


def velocity(U):
    U = np.asarray(U, dtype=float)
    check_height(U[0])
    return U[1:] / U[0]


def primitive_flux(H, u, g):
    """Flux matrix from height and velocity, shape (3, 2, ...); valid for H = 0."""
    Q = H * u
    pressure = 0.5 * g * H**2
    return np.stack(
        [
            Q,
            np.stack([Q[0] * u[0] + pressure, Q[0] * u[1]]),
            np.stack([Q[1] * u[0], Q[1] * u[1] + pressure]),
        ]
    )


def physical_flux(U, g):
    """Flux matrix F(U) with rows (Hu, Hv), (Hu^2 + gH^2/2, Huv), (Huv, Hv^2 + gH^2/2)."""
    U = np.asarray(U, dtype=float)
    return primitive_flux(U[0], velocity(U), g)


def normal_flux(U, n, g):
    """F(U) n, shape (3, ...)."""
    return np.sum(physical_flux(U, g) * np.asarray(n, dtype=float)[None], axis=1)


def flux_jacobians(U, g):
    """Jacobians J1 = dF1/dU and J2 = dF2/dU, each shape (3, 3, ...)."""
    U = np.asarray(U, dtype=float)
    H = U[0]
    u, v = velocity(U)
    zero = np.zeros_like(H)
    one = np.ones_like(H)
    c2 = g * H
    J1 = np.array(
        [
            [zero, one, zero],
            [c2 - u**2, 2.0 * u, zero],
            [-u * v, v, u],
        ]
    )
    J2 = np.array(
        [
            [zero, zero, one],
            [-u * v, v, u],
            [c2 - v**2, zero, 2.0 * v],
        ]
    )
    return J1, J2


def wave_speeds(U, n, g):
    """Eigenvalues (u.n - c, u.n, u.n + c) of n1 J1 + n2 J2 with c = sqrt(gH)."""
    U = np.asarray(U, dtype=float)
    n = np.asarray(n, dtype=float)
    un = np.sum(velocity(U) * n, axis=0)
    c = np.sqrt(g * U[0])
    return np.stack([un - c, un, un + c])


def max_speed(U, g):
    """Largest signal speed |u| + c over all directions."""
    U = np.asarray(U, dtype=float)
    return np.linalg.norm(velocity(U), axis=0) + np.sqrt(g * U[0])


def source_term(U, grad_z, g, c_f):
    """Bed slope and Chezy friction: (0, -gH z_x - c_f u|u|, -gH z_y - c_f v|u|)."""
    U = np.asarray(U, dtype=float)
    grad_z = np.asarray(grad_z, dtype=float)
    u = velocity(U)
    speed = np.linalg.norm(u, axis=0)
    momentum = -g * U[0] * grad_z - c_f * u * speed
    return np.concatenate([np.zeros_like(U[:1]), momentum])
