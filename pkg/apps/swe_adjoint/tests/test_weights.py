"""
Tests for objective weights, targets and the mismatch source.

Tests validation, target evaluation on shore faces and the source density.
"""

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from apps.dg_space.space import DGSpace
from apps.mesh_core.generators import rectangle_mesh
from apps.mesh_core.mesh import BoundaryTag
from apps.swe_adjoint.exceptions import AdjointError
from apps.swe_adjoint.residual import adjoint_boundary_state, mismatch_source
from apps.swe_adjoint.weights import ObjectiveWeights, TraceTarget
from apps.swe_forward.bathymetry import Bathymetry
from apps.swe_forward.stepping import Trajectory


class ObjectiveWeightsTest(SimpleTestCase):
    """Test cases for ObjectiveWeights."""

    def setUp(self):
        """Set up a rectangle whose bottom side is the shore."""
        self.space = DGSpace(rectangle_mesh(3, 2))
        self.shore = self.space.mesh.topology.faces_with_tag(BoundaryTag.SHORE)

    def test_defaults(self):
        """Test unit weights and the still-water target."""
        weights = ObjectiveWeights()

        self.assertEqual(weights.C, (1.0, 1.0, 1.0))
        trace = weights.target_trace(0.0, self.space, self.shore)
        self.assertEqual(trace.shape, (len(self.shore), 3, len(self.space.edge_rule)))
        np.testing.assert_array_equal(trace[:, 0], 1.0)
        np.testing.assert_array_equal(trace[:, 1:], 0.0)

    def test_negative_weight_rejected(self):
        """Test that a negative weight raises ValidationError keyed by C."""
        with self.assertRaises(ValidationError) as caught:
            ObjectiveWeights(C=(1.0, -1.0, 0.0))
        self.assertIn("C", caught.exception.message_dict)

    def test_bad_target_rejected(self):
        """Test that a two-valued target raises ValidationError keyed by target."""
        with self.assertRaises(ValidationError) as caught:
            ObjectiveWeights(target=(1.0, 0.0))
        self.assertIn("target", caught.exception.message_dict)

    def test_callable_target(self):
        """Test that a function target is evaluated at the face points and time."""
        weights = ObjectiveWeights(target=lambda t, x, y: (1.0 + t * x, 0.0, y))
        trace = weights.target_trace(2.0, self.space, self.shore)
        points = self.space.face_points[self.shore]

        np.testing.assert_allclose(trace[:, 0], 1.0 + 2.0 * points[..., 0])
        np.testing.assert_allclose(trace[:, 2], points[..., 1])

    def test_non_finite_target(self):
        """Test that a target producing NaN raises AdjointError."""
        weights = ObjectiveWeights(target=lambda t, x, y: (np.nan * x, 0.0, 0.0))
        with self.assertRaises(AdjointError):
            weights.target_trace(0.0, self.space, self.shore)


class TraceTargetTest(SimpleTestCase):
    """Test cases for TraceTarget."""

    def test_linear_in_time(self):
        """Test interpolation between two stored levels and clamping outside."""
        space = DGSpace(rectangle_mesh(2, 2))
        bathymetry = Bathymetry.from_function(space, lambda x, y: 0.1 * x)
        low = space.project(lambda x, y: (1.0, 0.0, 0.0))
        high = space.project(lambda x, y: (2.0, 0.4, 0.0))
        trajectory = Trajectory(space=space, times=[0.0, 1.0], states=[low, high])
        target = TraceTarget(trajectory, bathymetry)
        faces = space.mesh.topology.boundary_faces
        z = bathymetry.face_values(0, faces)

        middle = target.trace(0.25, space, faces)
        np.testing.assert_allclose(middle[:, 0], 1.25 + z)
        np.testing.assert_allclose(middle[:, 1], 0.1)
        np.testing.assert_allclose(target.trace(5.0, space, faces)[:, 0], 2.0 + z)

    def test_other_topology_rejected(self):
        """Test that a different mesh raises AdjointError."""
        space = DGSpace(rectangle_mesh(2, 2))
        trajectory = Trajectory(space=space, times=[0.0], states=[space.zeros(3)])
        target = TraceTarget(trajectory, Bathymetry.flat(space))
        other = DGSpace(rectangle_mesh(3, 2))

        with self.assertRaises(AdjointError):
            target.trace(0.0, other, other.mesh.topology.boundary_faces)


class MismatchSourceTest(SimpleTestCase):
    """Test cases for mismatch_source."""

    def setUp(self):
        """Set up shore traces of still water over a bed at 0.2."""
        self.U = np.zeros((2, 3, 4))
        self.U[:, 0] = 0.8
        self.z = np.full((2, 4), 0.2)
        self.target = np.zeros((2, 3, 4))
        self.target[:, 0] = 1.0

    def test_matching_state(self):
        """Test that U_hat equal to the target gives no source."""
        source = mismatch_source(self.U, self.z, self.target, ObjectiveWeights())

        np.testing.assert_allclose(source, 0.0, atol=1e-15)

    def test_height_offset(self):
        """Test that H + z - H~ = 0.1 gives the density -0.1 on p."""
        U = self.U.copy()
        U[:, 0] += 0.1
        source = mismatch_source(U, self.z, self.target, ObjectiveWeights())

        np.testing.assert_allclose(source[:, 0], -0.1)
        np.testing.assert_allclose(source[:, 1:], 0.0)

    def test_zero_weights(self):
        """Test that C = 0 gives no source for any state."""
        source = mismatch_source(self.U + 3.0, self.z, self.target, ObjectiveWeights(C=(0, 0, 0)))

        np.testing.assert_array_equal(source, 0.0)

    def test_squared_weights(self):
        """Test that the discharge mismatch is weighted by C22 squared."""
        U = self.U.copy()
        U[:, 1] = 0.5
        source = mismatch_source(U, self.z, self.target, ObjectiveWeights(C=(1.0, 2.0, 1.0)))

        np.testing.assert_allclose(source[:, 1], -2.0)


class AdjointBoundaryStateTest(SimpleTestCase):
    """Test cases for adjoint_boundary_state."""

    def test_wall_mirrors_r(self):
        """Test that walls keep p and reverse the normal part of r."""
        ghost = adjoint_boundary_state(
            [0.3, 1.0, 0.5], [1.0, 0.0, 0.0], [1.0, 0.0], BoundaryTag.SHORE, 1.0
        )

        np.testing.assert_allclose(ghost, [0.3, -1.0, 0.5])

    def test_open_sea_at_rest(self):
        """Test that water at rest mirrors p about zero."""
        ghost = adjoint_boundary_state(
            [0.3, 1.0, 0.5], [1.0, 0.0, 0.0], [1.0, 0.0], BoundaryTag.OPEN_SEA, 1.0
        )

        np.testing.assert_allclose(ghost, [-0.3, 1.0, 0.5])

    def test_open_sea_with_outflow(self):
        """Test p_b = -2 (u.n)(r.n) with u = Q / H1."""
        ghost = adjoint_boundary_state(
            [0.3, 1.0, 0.5], [1.0, 0.5, 0.0], [1.0, 0.0], BoundaryTag.OPEN_SEA, 2.0
        )

        # u.n = 0.25, r.n = 1, p_b = -0.5
        np.testing.assert_allclose(ghost, [-1.3, 1.0, 0.5])
