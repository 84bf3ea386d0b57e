"""Assembly of the full shape derivative on the vertex hat functions."""

import logging
from dataclasses import dataclass, field

import numpy as np

from apps.geometry_reg.penalties import penalty_gradients
from apps.shape_gradient.objective import TimeRule
from apps.shape_gradient.volume import volume_sensitivity

logger = logging.getLogger(__name__)

TERMS = ("J1", "J2", "J3", "J4")


@dataclass
class GradientAssembly:
    """
    DJ[phi_v e_d] for every vertex v and direction d, so that
    DJ[V] = sum_v values[v] . V[v] for piecewise-linear V.

    The volume part (J1, J2) is kept only on vertices whose hat function
    touches the obstacle; the surface part (J3, J4) lives on the obstacle.
    """

    values: np.ndarray
    mask: np.ndarray
    terms: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, mesh):
        zero = np.zeros((mesh.n_vertices, 2))
        return cls(
            values=zero.copy(),
            mask=mesh.obstacle_support.copy(),
            terms={name: zero.copy() for name in TERMS},
        )

    def apply(self, V):
        return float(np.sum(self.values * np.asarray(V, dtype=float)))

    def apply_terms(self, V):
        V = np.asarray(V, dtype=float)
        return {name: float(np.sum(G * V)) for name, G in self.terms.items()}

    def __mul__(self, scalar):
        return GradientAssembly(
            values=self.values * scalar,
            mask=self.mask,
            terms={name: G * scalar for name, G in self.terms.items()},
        )

    __rmul__ = __mul__

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))


def total_derivative(
    mesh,
    forward,
    adjoint,
    params,
    bathymetry,
    penalty_params,
    rule=TimeRule.TRAPEZOID,
    spatial_data=True,
    distance=None,
):
    """
    DJ = DJ1 + DJ2 + DJ3 + DJ4 assembled on every vertex hat function.
    ``distance`` is the oracle J4 was evaluated with.
    """
    mask = mesh.obstacle_support
    G1 = volume_sensitivity(forward, adjoint, params, bathymetry, rule, spatial_data).gradient()
    G2, G3, G4 = penalty_gradients(mesh, penalty_params, distance)
    G1[~mask] = 0.0
    G2 = G2.copy()
    G2[~mask] = 0.0

    terms = {"J1": G1, "J2": G2, "J3": G3, "J4": G4}
    assembly = GradientAssembly(values=G1 + G2 + G3 + G4, mask=mask.copy(), terms=terms)
    logger.debug(
        "Assembled shape derivative on %d supported vertices, max entry %.3e",
        int(mask.sum()),
        float(np.abs(assembly.values).max()),
    )
    return assembly
