"""
Tests for mesh file input and output.

Tests Gmsh MSH 2.2 loading, tag mapping and VTK export through meshio.
"""

import tempfile
from pathlib import Path

import meshio
import numpy as np
from django.test import SimpleTestCase

from apps.mesh_core.exceptions import MeshError, MeshFormatError
from apps.mesh_core.generators import half_disk_mesh, rectangle_mesh
from apps.mesh_core.mesh import BoundaryTag
from apps.mesh_core.mesh_io import load_msh, write_msh, write_vtk

SQUARE_MSH = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
5
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
5 5 5 0
$EndNodes
$Elements
6
1 1 2 1 1 1 2
2 1 2 2 2 2 3
3 1 2 2 2 3 4
4 1 2 1 1 4 1
5 2 2 10 10 {tri1}
6 2 2 10 10 {tri2}
$EndElements
"""


class MeshIOTest(SimpleTestCase):
    """Test cases for load_msh, write_msh and write_vtk."""

    def setUp(self):
        """Set up a scratch directory."""
        scratch = tempfile.TemporaryDirectory()
        self.addCleanup(scratch.cleanup)
        self.dir = Path(scratch.name)

    def write_square(self, tri1="1 2 3", tri2="1 3 4", text=None):
        path = self.dir / "square.msh"
        path.write_text(text or SQUARE_MSH.format(tri1=tri1, tri2=tri2))
        return path

    def test_load_two_triangle_square(self):
        """Test that a square loads with mapped tags and the stray node dropped."""
        mesh = load_msh(self.write_square())

        self.assertEqual(mesh.n_vertices, 4)
        self.assertEqual(mesh.n_triangles, 2)
        self.assertAlmostEqual(mesh.area, 1.0)
        self.assertEqual(len(mesh.topology.faces_with_tag(BoundaryTag.SHORE)), 2)
        self.assertEqual(len(mesh.topology.faces_with_tag(BoundaryTag.OPEN_SEA)), 2)

    def test_load_repairs_clockwise_triangles(self):
        """Test that clockwise triangles in the file come out counter-clockwise."""
        mesh = load_msh(self.write_square(tri1="1 3 2", tri2="1 4 3"))

        self.assertTrue(np.all(mesh.geometry.areas > 0))

    def test_custom_tag_map(self):
        """Test that a tag map can route physical tags to other classes."""
        mesh = load_msh(
            self.write_square(), tag_map={1: BoundaryTag.OPEN_SEA, 2: BoundaryTag.OPEN_SEA}
        )

        self.assertEqual(len(mesh.topology.faces_with_tag(BoundaryTag.OPEN_SEA)), 4)

    def test_unknown_tag_rejected(self):
        """Test that a physical tag outside the map raises MeshFormatError."""
        with self.assertRaises(MeshFormatError):
            load_msh(self.write_square(), tag_map={1: BoundaryTag.SHORE})

    def test_open_boundary_rejected(self):
        """Test that a missing boundary line leaves an untagged edge."""
        text = SQUARE_MSH.format(tri1="1 2 3", tri2="1 3 4")
        text = text.replace("6\n1 1 2 1 1 1 2\n", "5\n")
        with self.assertRaises(MeshError):
            load_msh(self.write_square(text=text))

    def test_missing_file(self):
        """Test that a missing path raises MeshFormatError."""
        with self.assertRaises(MeshFormatError):
            load_msh(self.dir / "absent.msh")

    def test_msh_round_trip(self):
        """Test that a written MSH file loads back with the same boundary classes."""
        mesh = half_disk_mesh(h=0.4, n_obstacle=24)
        path = self.dir / "half_disk.msh"
        write_msh(mesh, path)
        loaded = load_msh(path)

        self.assertEqual(loaded.n_triangles, mesh.n_triangles)
        self.assertAlmostEqual(loaded.area, mesh.area, places=10)
        for tag in BoundaryTag:
            self.assertEqual(
                len(loaded.topology.faces_with_tag(tag)), len(mesh.topology.faces_with_tag(tag))
            )

    def test_vtk_fields(self):
        """Test that VTK output carries the vertex and cell fields."""
        mesh = rectangle_mesh(3, 2)
        path = self.dir / "fields.vtk"
        W = mesh.vertices * 2.0
        write_vtk(
            mesh,
            path,
            point_data={"W": W, "phi": mesh.vertices[:, 0]},
            cell_data={"eps_v": np.arange(mesh.n_triangles, dtype=float)},
        )
        raw = meshio.read(path)

        np.testing.assert_allclose(raw.points[:, :2], mesh.vertices)
        np.testing.assert_allclose(raw.point_data["W"][:, :2], W)
        np.testing.assert_allclose(raw.point_data["phi"], mesh.vertices[:, 0])
        np.testing.assert_allclose(raw.cell_data["eps_v"][0], np.arange(mesh.n_triangles))

    def test_vtk_rejects_wrong_length(self):
        """Test that a field with the wrong length is refused."""
        mesh = rectangle_mesh(2, 2)
        with self.assertRaises(MeshError):
            write_vtk(mesh, self.dir / "bad.vtk", point_data={"u": np.zeros(2)})
