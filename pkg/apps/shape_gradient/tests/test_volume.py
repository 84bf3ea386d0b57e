"""
Tests for the volume form of the shape derivative.

Tests the sensitivity tensor against finite differences of the weak form on
moved meshes, the bathymetry coupling, the obstacle wall moments, linearity
and the trivial cases.
"""

import numpy as np
from django.test import SimpleTestCase

from apps.dg_space import cg
from apps.dg_space.space import DGSpace
from apps.mesh_core.generators import disk_mesh, rectangle_mesh
from apps.mesh_core.mesh import BoundaryTag
from apps.shape_gradient.exceptions import GradientError
from apps.shape_gradient.objective import TimeRule
from apps.shape_gradient.volume import (
    VolumeSensitivity,
    dj1_volume,
    level_terms,
    obstacle_faces,
    recovered_gradients,
    volume_sensitivity,
)
from apps.swe_adjoint.solver import AdjointTrajectory, solve_adjoint
from apps.swe_adjoint.weights import ObjectiveWeights
from apps.swe_forward.bathymetry import Bathymetry
from apps.swe_forward.params import SWEParams
from apps.swe_forward.stepping import solve_forward

G = 9.81
EPS_F = (0.01, 0.02)
STEP = 1e-6


def smooth_fields(mesh):
    x, y = mesh.vertices.T
    U = np.column_stack([1.0 + 0.1 * x + 0.05 * y**2, 0.2 * y - 0.1 * x, 0.1 * x * y])
    P = np.column_stack([np.sin(2.0 * x) * y, 0.3 + x * y, np.cos(y) - x])
    U_t = np.column_stack([0.2 * x * y, np.sin(x), -0.4 * y])
    z = 0.1 * y + 0.05 * x**2
    return U, P, U_t, z


def deformation(mesh):
    x, y = mesh.vertices.T
    return np.column_stack([np.sin(2.0 * x + y), x * y - 0.3 * y**2])


class LevelTermsTest(SimpleTestCase):
    """Test cases for the per-level sensitivities."""

    def setUp(self):
        """Set up smooth vertex fields on a rectangle."""
        self.mesh = rectangle_mesh(4, 3, width=1.2, height=1.0, origin=(-0.6, 0.0))
        self.space = DGSpace(self.mesh)
        self.U, self.P, self.U_t, self.z = smooth_fields(self.mesh)
        self.eps_v = 0.01 * (1.0 + np.arange(self.mesh.n_triangles) % 3)

    def integral(self, mesh, z=None):
        space = DGSpace(mesh)
        z = self.z if z is None else z
        return level_terms(space, self.U, self.P, self.U_t, self.eps_v, EPS_F, z, G).integral

    def test_tensor_matches_moved_meshes(self):
        """Test that S : grad V is the derivative of the weak form under x + sV."""
        V = deformation(self.mesh)
        terms = level_terms(self.space, self.U, self.P, self.U_t, self.eps_v, EPS_F, self.z, G)
        K = cg.cell_gradients(self.mesh, V)

        plus = self.integral(self.mesh.moved(self.mesh.vertices + STEP * V))
        minus = self.integral(self.mesh.moved(self.mesh.vertices - STEP * V))
        expected = (plus - minus) / (2.0 * STEP)
        self.assertAlmostEqual(float(np.sum(terms.S * K)), expected, delta=1e-6 * abs(expected))

    def test_bed_coupling(self):
        """Test that the bed coefficient is the derivative with respect to grad z."""
        x, y = self.mesh.vertices.T
        change = np.cos(3.0 * x) + y**2
        terms = level_terms(self.space, self.U, self.P, self.U_t, self.eps_v, EPS_F, self.z, G)

        plus = self.integral(self.mesh, self.z + STEP * change)
        minus = self.integral(self.mesh, self.z - STEP * change)
        expected = (plus - minus) / (2.0 * STEP)
        actual = float(np.sum(terms.bed * cg.cell_gradients(self.mesh, change)))
        self.assertAlmostEqual(actual, expected, delta=1e-6 * abs(expected))

    def test_dry_state_rejected(self):
        """Test that a non-positive projected height raises GradientError."""
        U = self.U.copy()
        U[3, 0] = -5.0
        with self.assertRaises(GradientError):
            level_terms(self.space, U, self.P, self.U_t, self.eps_v, EPS_F, self.z, G)

    def test_recovered_gradients_of_linear_field(self):
        """Test that recovery reproduces the gradient of a linear field."""
        x, y = self.mesh.vertices.T
        slopes = recovered_gradients(self.mesh, 2.0 * x - 0.5 * y)

        np.testing.assert_allclose(slopes, np.tile([2.0, -0.5], (self.mesh.n_vertices, 1)))


class VolumeSensitivityTest(SimpleTestCase):
    """Test cases for the time-integrated volume form."""

    @classmethod
    def setUpClass(cls):
        """Set up one short forward and adjoint solve shared by every test."""
        super().setUpClass()
        tags = {"bottom": BoundaryTag.SHORE, "top": BoundaryTag.OPEN_SEA}
        cls.mesh = rectangle_mesh(4, 4, width=2.0, height=2.0, origin=(-1.0, 0.0), tags=tags)
        cls.space = DGSpace(cls.mesh)
        cls.params = SWEParams(c_f=0.0, dt_max=5e-3)
        cls.bathymetry = Bathymetry.from_function(cls.space, lambda x, y: 0.1 * y)
        U0 = cls.space.project(
            lambda x, y: (1.0 + 0.2 * np.exp(-15.0 * x**2 - 15.0 * (y - 1.0) ** 2), 0.0, 0.0)
        )
        cls.forward = solve_forward(U0, cls.space, cls.params, cls.bathymetry, 0.02)
        cls.adjoint = solve_adjoint(cls.forward, cls.params, cls.bathymetry, ObjectiveWeights())

    def test_zero_field(self):
        """Test that V = 0 gives zero."""
        V = np.zeros((self.mesh.n_vertices, 2))
        self.assertEqual(
            dj1_volume(self.forward, self.adjoint, self.params, self.bathymetry, V), 0.0
        )

    def test_zero_adjoint(self):
        """Test that a vanishing adjoint gives zero for any V."""
        zero = AdjointTrajectory(
            space=self.space,
            times=list(self.forward.times),
            states=[self.space.zeros(3) for _ in self.forward.times],
        )
        V = deformation(self.mesh)
        self.assertEqual(dj1_volume(self.forward, zero, self.params, self.bathymetry, V), 0.0)

    def test_linearity(self):
        """Test DJ1[a V1 + b V2] = a DJ1[V1] + b DJ1[V2]."""
        sensitivity = volume_sensitivity(self.forward, self.adjoint, self.params, self.bathymetry)
        rng = np.random.default_rng(5)
        V1 = rng.normal(size=(self.mesh.n_vertices, 2))
        V2 = rng.normal(size=(self.mesh.n_vertices, 2))

        combined = sensitivity.derivative(2.0 * V1 - 3.0 * V2)
        separate = 2.0 * sensitivity.derivative(V1) - 3.0 * sensitivity.derivative(V2)
        self.assertAlmostEqual(combined, separate, delta=1e-12 * max(1.0, abs(separate)))

    def test_gradient_matches_tensor(self):
        """Test that the vertex gradient reproduces S : grad V for moving data."""
        sensitivity = volume_sensitivity(
            self.forward, self.adjoint, self.params, self.bathymetry, spatial_data=False
        )
        V = deformation(self.mesh)
        direct = float(np.sum(sensitivity.S * cg.cell_gradients(self.mesh, V)))

        self.assertAlmostEqual(
            sensitivity.derivative(V), direct, delta=1e-12 * max(1.0, abs(direct))
        )

    def test_translation_with_moving_data(self):
        """Test that a rigid translation carrying the data changes nothing."""
        sensitivity = volume_sensitivity(
            self.forward,
            self.adjoint,
            self.params,
            self.bathymetry,
            TimeRule.LEFT,
            spatial_data=False,
        )
        V = np.tile([0.4, -0.7], (self.mesh.n_vertices, 1))
        scale = float(np.abs(sensitivity.S).max())

        self.assertAlmostEqual(sensitivity.derivative(V), 0.0, delta=1e-10 * max(scale, 1.0))

    def test_time_grid_mismatch(self):
        """Test that adjoint levels differing from the forward raise GradientError."""
        shifted = AdjointTrajectory(
            space=self.space,
            times=[t + 1e-3 for t in self.forward.times],
            states=self.adjoint.states,
        )
        V = deformation(self.mesh)
        with self.assertRaises(GradientError):
            dj1_volume(self.forward, shifted, self.params, self.bathymetry, V)


class WallTermTest(SimpleTestCase):
    """Test cases for the obstacle wall moments."""

    def setUp(self):
        """Set up a rotating discharge around a polygonal hole."""
        self.mesh = disk_mesh(1.0, h=0.25, hole_radius=0.3, n_hole=16)
        self.space = DGSpace(self.mesh)
        x, y = self.mesh.vertices.T
        self.omega = 0.4
        self.U = np.column_stack([np.ones_like(x), -self.omega * y, self.omega * x])
        self.P = np.column_stack([np.ones_like(x), np.zeros_like(x), np.zeros_like(x)])
        self.z = np.zeros_like(x)

    def sensitivity(self, U):
        terms = level_terms(self.space, U, self.P, np.zeros_like(U), 0.0, EPS_F, self.z, G)
        n = self.mesh.n_vertices
        return VolumeSensitivity(
            mesh=self.mesh,
            S=np.zeros_like(terms.S),
            bed=np.zeros_like(terms.bed),
            initial=np.zeros((n, 3)),
            bed_slopes=np.zeros((n, 2)),
            initial_slopes=np.zeros((n, 3, 2)),
            wall_faces=obstacle_faces(self.mesh),
            wall=terms.wall,
            spatial_data=False,
        )

    def test_shear_of_the_hole(self):
        """Test int p n . (grad V Q) ds = omega |hole| for V = (0, x)."""
        V = np.column_stack([np.zeros(self.mesh.n_vertices), self.mesh.vertices[:, 0]])
        hole = -self.mesh.loop_area(self.mesh.obstacle_loops[0])

        derivative = self.sensitivity(self.U).derivative(V)
        self.assertAlmostEqual(derivative, self.omega * hole, places=12)

    def test_still_water(self):
        """Test that water at rest has no wall moments."""
        U = self.U.copy()
        U[:, 1:] = 0.0
        np.testing.assert_array_equal(self.sensitivity(U).wall, 0.0)
