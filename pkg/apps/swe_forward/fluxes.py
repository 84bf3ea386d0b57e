"""
Approximate Riemann solvers for the advective face flux.

``U_plus`` is the trace of the cell the normal points out of and ``U_minus``
the neighbouring (or ghost) trace. Solvers work on height and velocity so a
hydrostatically reconstructed height of exactly zero is still admissible.
"""

from abc import ABC, abstractmethod

import numpy as np

from apps.swe_forward.params import FluxKind
from apps.swe_forward.physics import primitive_flux, velocity


def _normal_velocity(u, n):
    return np.sum(u * n, axis=0)


def max_abs_speed(H_plus, u_plus, H_minus, u_minus, n, g):
    """Largest |eigenvalue| of the normal Jacobian over both states."""
    c_plus = np.sqrt(g * H_plus)
    c_minus = np.sqrt(g * H_minus)
    return np.maximum(
        np.abs(_normal_velocity(u_plus, n)) + c_plus,
        np.abs(_normal_velocity(u_minus, n)) + c_minus,
    )


class RiemannSolver(ABC):
    def __init__(self, g):
        self.g = g

    def __call__(self, U_plus, U_minus, n):
        U_plus = np.asarray(U_plus, dtype=float)
        U_minus = np.asarray(U_minus, dtype=float)
        n = np.asarray(n, dtype=float)
        return self.solve(U_plus[0], velocity(U_plus), U_minus[0], velocity(U_minus), n)

    def normal_flux(self, H, u, n):
        return np.sum(primitive_flux(H, u, self.g) * n[None], axis=1)

    @staticmethod
    def state(H, u):
        H = np.asarray(H)
        return np.concatenate([H[None], H * u])

    @abstractmethod
    def solve(self, H_plus, u_plus, H_minus, u_minus, n):
        """Numerical flux from primitive traces, shape (3, ...)."""


class LaxFriedrichs(RiemannSolver):
    """Local Lax-Friedrichs (Rusanov) flux."""

    def solve(self, H_plus, u_plus, H_minus, u_minus, n):
        alpha = max_abs_speed(H_plus, u_plus, H_minus, u_minus, n, self.g)
        return 0.5 * (
            self.normal_flux(H_plus, u_plus, n)
            + self.normal_flux(H_minus, u_minus, n)
            + alpha * (self.state(H_plus, u_plus) - self.state(H_minus, u_minus))
        )


class HLLE(RiemannSolver):
    """
    Harten-Lax-van Leer-Einfeldt flux with the wave speed bounds taken over both
    traces. When both bounds vanish the central average is returned.
    """

    def solve(self, H_plus, u_plus, H_minus, u_minus, n):
        un_plus = _normal_velocity(u_plus, n)
        un_minus = _normal_velocity(u_minus, n)
        c_plus = np.sqrt(self.g * H_plus)
        c_minus = np.sqrt(self.g * H_minus)
        lam_plus = np.maximum(np.maximum(un_plus + c_plus, un_minus + c_minus), 0.0)
        lam_minus = np.minimum(np.minimum(un_plus - c_plus, un_minus - c_minus), 0.0)

        F_plus = self.normal_flux(H_plus, u_plus, n)
        F_minus = self.normal_flux(H_minus, u_minus, n)
        jump = self.state(H_plus, u_plus) - self.state(H_minus, u_minus)
        spread = lam_plus - lam_minus
        degenerate = spread <= 0.0
        safe = np.where(degenerate, 1.0, spread)
        hlle = (lam_plus * F_plus - lam_minus * F_minus - lam_plus * lam_minus * jump) / safe
        return np.where(degenerate, 0.5 * (F_plus + F_minus), hlle)


RIEMANN_SOLVERS = {
    FluxKind.LLF: LaxFriedrichs,
    FluxKind.HLLE: HLLE,
}


def get_riemann_solver(params):
    return RIEMANN_SOLVERS[FluxKind(params.flux_kind)](params.g)


def numerical_flux(U_plus, U_minus, n, params):
    """Face flux of the configured kind for conservative traces."""
    return get_riemann_solver(params)(U_plus, U_minus, n)
