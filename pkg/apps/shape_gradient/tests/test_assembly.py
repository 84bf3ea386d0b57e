"""
Tests for the assembled shape derivative.

Tests the support of each term, scaling and the vanishing derivative for a
zero objective.
"""

import numpy as np
from django.test import SimpleTestCase

from apps.dg_space.space import DGSpace
from apps.geometry_reg.penalties import PenaltyParams
from apps.mesh_core.generators import half_disk_mesh
from apps.mesh_core.mesh import BoundaryTag
from apps.shape_gradient.assembly import TERMS, GradientAssembly, total_derivative
from apps.swe_adjoint.solver import solve_adjoint
from apps.swe_adjoint.weights import ObjectiveWeights
from apps.swe_forward.bathymetry import Bathymetry
from apps.swe_forward.params import SWEParams
from apps.swe_forward.stepping import solve_forward


class TotalDerivativeTest(SimpleTestCase):
    """Test cases for total_derivative."""

    @classmethod
    def setUpClass(cls):
        """Set up a short wave run towards the shore of a half disk."""
        super().setUpClass()
        cls.mesh = half_disk_mesh(h=0.3, n_obstacle=32)
        cls.space = DGSpace(cls.mesh)
        cls.params = SWEParams(c_f=0.0)
        cls.bathymetry = Bathymetry.from_function(cls.space, lambda x, y: 0.5 - 0.1 * y)
        U0 = cls.space.project(
            lambda x, y: (0.5 + 0.1 * y + 0.05 * np.exp(-4.0 * (y - 1.5) ** 2), 0.0, 0.0)
        )
        cls.forward = solve_forward(U0, cls.space, cls.params, cls.bathymetry, 0.01)
        cls.weights = ObjectiveWeights()
        cls.adjoint = solve_adjoint(cls.forward, cls.params, cls.bathymetry, cls.weights)
        cls.assembly = total_derivative(
            cls.mesh, cls.forward, cls.adjoint, cls.params, cls.bathymetry, PenaltyParams()
        )

    def test_terms_add_up(self):
        """Test that the per-term vectors sum to the assembled values."""
        self.assertEqual(tuple(self.assembly.terms), TERMS)
        total = sum(self.assembly.terms[name] for name in TERMS)
        np.testing.assert_allclose(self.assembly.values, total)
        self.assertTrue(self.assembly.is_finite())

    def test_volume_terms_masked(self):
        """Test that J1 and J2 vanish on vertices away from the obstacle."""
        outside = ~self.mesh.obstacle_support
        self.assertTrue(np.any(outside))
        for name in ("J1", "J2"):
            self.assertTrue(np.all(self.assembly.terms[name][outside] == 0.0))

    def test_surface_terms_on_obstacle(self):
        """Test that J3 and J4 live on obstacle vertices only."""
        off_obstacle = np.ones(self.mesh.n_vertices, dtype=bool)
        off_obstacle[self.mesh.boundary_vertices(BoundaryTag.OBSTACLE)] = False
        for name in ("J3", "J4"):
            self.assertTrue(np.all(self.assembly.terms[name][off_obstacle] == 0.0))
        self.assertGreater(np.abs(self.assembly.terms["J3"]).max(), 0.0)

    def test_apply_is_linear(self):
        """Test that DJ[a V1 + b V2] = a DJ[V1] + b DJ[V2] and terms add up."""
        rng = np.random.default_rng(2)
        V1 = rng.normal(size=(self.mesh.n_vertices, 2))
        V2 = rng.normal(size=(self.mesh.n_vertices, 2))

        combined = self.assembly.apply(0.5 * V1 + 2.0 * V2)
        separate = 0.5 * self.assembly.apply(V1) + 2.0 * self.assembly.apply(V2)
        self.assertAlmostEqual(combined, separate, delta=1e-12 * max(1.0, abs(separate)))
        self.assertAlmostEqual(
            sum(self.assembly.apply_terms(V1).values()),
            self.assembly.apply(V1),
            delta=1e-12 * max(1.0, abs(self.assembly.apply(V1))),
        )

    def test_zero_objective(self):
        """Test that zero weights and zero penalties give a zero derivative."""
        weights = ObjectiveWeights(C=(0.0, 0.0, 0.0))
        adjoint = solve_adjoint(self.forward, self.params, self.bathymetry, weights)
        assembly = total_derivative(
            self.mesh,
            self.forward,
            adjoint,
            self.params,
            self.bathymetry,
            PenaltyParams(nu1=0.0, nu2=0.0, nu3=0.0),
        )

        self.assertTrue(np.all(assembly.values == 0.0))


class GradientAssemblyTest(SimpleTestCase):
    """Test cases for GradientAssembly."""

    def setUp(self):
        """Set up an assembly with random values."""
        self.mesh = half_disk_mesh(h=0.5, n_obstacle=16)
        self.assembly = GradientAssembly.zeros(self.mesh)
        rng = np.random.default_rng(0)
        self.assembly.terms["J1"] = rng.normal(size=(self.mesh.n_vertices, 2))
        self.assembly.values = self.assembly.terms["J1"].copy()

    def test_zeros(self):
        """Test that a zero assembly applies to zero and carries the obstacle mask."""
        zero = GradientAssembly.zeros(self.mesh)
        V = np.ones((self.mesh.n_vertices, 2))

        self.assertEqual(zero.apply(V), 0.0)
        np.testing.assert_array_equal(zero.mask, self.mesh.obstacle_support)
        self.assertEqual(set(zero.terms), set(TERMS))

    def test_scaling(self):
        """Test that multiplication scales the values and every term."""
        scaled = 3.0 * self.assembly

        np.testing.assert_allclose(scaled.values, 3.0 * self.assembly.values)
        np.testing.assert_allclose(scaled.terms["J1"], 3.0 * self.assembly.terms["J1"])
        np.testing.assert_allclose((self.assembly * 3.0).values, scaled.values)

    def test_not_finite(self):
        """Test that a NaN entry is reported."""
        self.assertTrue(self.assembly.is_finite())
        self.assembly.values[0, 1] = np.nan
        self.assertFalse(self.assembly.is_finite())
