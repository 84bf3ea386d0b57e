"""
Tests for the shape problem.

Tests the adjoint shape derivative of the shore mismatch against central
differences of full forward solves on a pinned time grid.
"""

from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from apps.geometry_reg.distance import BoundaryPolylines
from apps.geometry_reg.penalties import PenaltyParams
from apps.mesh_core.generators import half_disk_mesh
from apps.mesh_core.mesh import BoundaryTag
from apps.optimizer.problem import ShapeProblem
from apps.shape_gradient.checks import central_difference
from apps.swe_adjoint.weights import ObjectiveWeights
from apps.swe_forward.bathymetry import Bathymetry
from apps.swe_forward.params import ShockSensor, SWEParams

OBSTACLE_CENTER = np.array([0.0, 0.5])


def flat_bed(space):
    return Bathymetry.flat(space)


def offshore_wave(space, bathymetry):
    return space.project(
        lambda x, y: (1.0 + 0.05 * np.exp(-4.0 * (x**2 + (y - 1.3) ** 2)), 0.0, 0.0)
    )


def stretch(mesh):
    """Obstacle field widening the obstacle in x and flattening it in y."""
    V = np.zeros((mesh.n_vertices, 2))
    vertices = mesh.boundary_vertices(BoundaryTag.OBSTACLE)
    offset = mesh.vertices[vertices] - OBSTACLE_CENTER
    V[vertices] = offset * np.array([1.0, -1.0]) / np.abs(offset).max()
    return V


class MismatchDerivativeTest(SimpleTestCase):
    """Test cases for the shape derivative of J1 against finite differences."""

    @classmethod
    def setUpClass(cls):
        """Set up one wave scenario without friction, viscosity sensor or penalties."""
        super().setUpClass()
        cls.mesh = half_disk_mesh(h=0.4, n_obstacle=24)
        problem = ShapeProblem(
            swe=SWEParams(c_f=0.0, sensor=ShockSensor(eps_max=0.0)),
            T=0.3,
            bathymetry=flat_bed,
            initial_condition=offshore_wave,
            weights=ObjectiveWeights(C=(1.0, 0.0, 0.0), target=(1.0, 0.0, 0.0)),
            penalty_params=PenaltyParams(nu1=0.0, nu2=0.0, nu3=0.0),
        )
        cls.evaluation = problem.evaluate(cls.mesh)
        cls.problem = replace(problem, times=tuple(cls.evaluation.forward.times))
        cls.assembly = cls.problem.derivative(cls.evaluation)

    def test_stretch_matches_central_difference(self):
        """Test that DJ1 of an obstacle stretch agrees with central differences."""
        V = stretch(self.mesh)
        derivative = self.assembly.apply_terms(V)["J1"]
        difference = central_difference(self.problem.terms, self.mesh, V, 1e-4)["J1"]

        self.assertGreater(abs(difference), 0.0)
        self.assertEqual(np.sign(derivative), np.sign(difference))
        self.assertLess(abs(derivative - difference) / abs(difference), 0.3)

    def test_penalty_terms_vanish(self):
        """Test that switched-off penalties contribute nothing."""
        V = stretch(self.mesh)
        derivatives = self.assembly.apply_terms(V)

        self.assertEqual(derivatives["J2"], 0.0)
        self.assertEqual(derivatives["J3"], 0.0)
        self.assertEqual(derivatives["J4"], 0.0)

    def test_evaluation_keeps_distance_oracle(self):
        """Test that the evaluation keeps the oracle its penalties were evaluated with."""
        self.assertIsInstance(self.evaluation.distance, BoundaryPolylines)
