"""
The shape optimization problem: everything needed to evaluate the objective
and its shape derivative on a mesh of the water domain.
"""

import logging
from dataclasses import dataclass, field

from django.db import models

from apps.dg_space.space import DGSpace
from apps.geometry_reg.distance import BoundaryPolylines
from apps.geometry_reg.eikonal import eikonal_solve
from apps.geometry_reg.penalties import PenaltyParams, penalties
from apps.mesh_core.mesh import BoundaryTag
from apps.optimizer.exceptions import OptimizerError
from apps.shape_gradient.assembly import total_derivative
from apps.shape_gradient.elasticity import ElasticityParams
from apps.shape_gradient.objective import TimeRule, objective_J1
from apps.swe_adjoint.solver import solve_adjoint
from apps.swe_adjoint.weights import ObjectiveWeights
from apps.swe_forward.params import SWEParams, TimeScheme
from apps.swe_forward.stepping import solve_forward

logger = logging.getLogger(__name__)


class DistanceOracle(models.TextChoices):
    POLYLINE = "polyline", "Exact polyline distance"
    EIKONAL = "eikonal", "Stabilized Eikonal distance"


@dataclass(frozen=True)
class Evaluation:
    """Objective values of one mesh together with the forward solve behind J1."""

    mesh: object
    space: object
    bathymetry: object
    forward: object
    J1: float
    J2: float
    J3: float
    J4: float
    distance: object = None

    @property
    def total(self):
        return self.J1 + self.J2 + self.J3 + self.J4

    @property
    def values(self):
        return {"J1": self.J1, "J2": self.J2, "J3": self.J3, "J4": self.J4}


@dataclass(frozen=True)
class ShapeProblem:
    """
    ``bathymetry(space)`` returns the bed on a DG space and
    ``initial_condition(space, bathymetry)`` the initial state. Both are
    re-evaluated on every mesh, so the data stay fixed in space while the
    obstacle moves.
    """

    swe: SWEParams
    T: float
    bathymetry: object
    initial_condition: object
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    penalty_params: PenaltyParams = field(default_factory=PenaltyParams)
    elasticity: ElasticityParams = field(default_factory=ElasticityParams)
    scheme: str = TimeScheme.SSPRK2
    rule: str = TimeRule.TRAPEZOID
    spatial_data: bool = True
    distance: str = DistanceOracle.POLYLINE
    times: tuple = None

    def check_mesh(self, mesh):
        if len(mesh.boundary_vertices(BoundaryTag.OBSTACLE)) == 0:
            raise OptimizerError("mesh has no obstacle boundary to optimize")
        if len(mesh.boundary_vertices(BoundaryTag.SHORE, BoundaryTag.OPEN_SEA)) == 0:
            raise OptimizerError("mesh has no shore or open-sea boundary to hold fixed")

    def distance_oracle(self, mesh):
        if DistanceOracle(self.distance) == DistanceOracle.EIKONAL:
            return eikonal_solve(mesh)
        return BoundaryPolylines.from_mesh(mesh)

    def evaluate(self, mesh):
        """Distance, forward solve and all four objective terms on ``mesh``."""
        distance = self.distance_oracle(mesh)
        space = DGSpace(mesh, order=self.swe.order)
        bathymetry = self.bathymetry(space)
        U0 = self.initial_condition(space, bathymetry)
        forward = solve_forward(
            U0, space, self.swe, bathymetry, self.T, self.scheme, times=self.times
        )
        J1 = objective_J1(forward, bathymetry, self.weights, self.rule)
        values = penalties(mesh, self.penalty_params, distance)
        logger.debug(
            "Objective J1=%.6e J2=%.6e J3=%.6e J4=%.6e", J1, values.J2, values.J3, values.J4
        )
        return Evaluation(
            mesh=mesh,
            space=space,
            bathymetry=bathymetry,
            forward=forward,
            J1=J1,
            J2=values.J2,
            J3=values.J3,
            J4=values.J4,
            distance=distance,
        )

    def terms(self, mesh):
        return self.evaluate(mesh).values

    def derivative(self, evaluation):
        """Adjoint solve and the assembled shape derivative at an evaluated mesh."""
        adjoint = solve_adjoint(evaluation.forward, self.swe, evaluation.bathymetry, self.weights)
        return total_derivative(
            evaluation.mesh,
            evaluation.forward,
            adjoint,
            self.swe,
            evaluation.bathymetry,
            self.penalty_params,
            self.rule,
            self.spatial_data,
            evaluation.distance,
        )
