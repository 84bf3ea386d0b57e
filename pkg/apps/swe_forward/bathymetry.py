from dataclasses import dataclass
from functools import cached_property

import numpy as np

from apps.dg_space.fields import DGField


@dataclass
class Bathymetry:
    """Bed height z on a DG space, with cached quadrature-point data.

    Bathymetry built from vertex values is continuous across faces, which is
    what keeps the lake at rest steady without reconstruction.
    """

    space: object
    z: DGField
    continuous: bool = True

    @classmethod
    def flat(cls, space, level=0.0):
        return cls.from_vertex_values(space, np.full(space.mesh.n_vertices, float(level)))

    @classmethod
    def from_vertex_values(cls, space, values):
        return cls(space, space.interpolate_vertices(values), continuous=True)

    @classmethod
    def from_function(cls, space, f, continuous=True):
        if continuous:
            x, y = space.mesh.vertices.T
            values = np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape)
            return cls.from_vertex_values(space, values)
        return cls(space, space.project(f), continuous=False)

    @cached_property
    def values(self):
        """z at volume quadrature points, shape (n_cells, nq)."""
        return self.space.evaluate(self.z)[:, 0]

    @cached_property
    def gradient(self):
        """grad z at volume quadrature points, shape (n_cells, nq, 2)."""
        return self.space.gradient(self.z)[:, 0]

    def face_values(self, side, faces):
        return self.space.face_trace(self.z, side, faces)[:, 0]

    @cached_property
    def vertex_values(self):
        return self.space.dg_to_cg(self.z)[:, 0]
