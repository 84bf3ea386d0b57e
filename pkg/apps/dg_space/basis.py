"""Nodal Lagrange basis of order p on the reference triangle."""

from functools import lru_cache

import numpy as np

from apps.dg_space.exceptions import QuadratureError


def ndof(order):
    return (order + 1) * (order + 2) // 2


def _exponents(order):
    return [(a, total - a) for total in range(order + 1) for a in range(total, -1, -1)]


class LagrangeBasis:
    """
    Lagrange polynomials through equispaced nodes of the reference triangle.

    The first three nodes are the reference vertices, so the first three
    coefficients of a field are its vertex traces.
    """

    def __init__(self, order):
        if order < 1:
            raise QuadratureError(f"basis order must be at least 1, got {order}")
        self.order = int(order)
        self.ndof = ndof(self.order)
        self.exponents = np.array(_exponents(self.order), dtype=int)
        self.nodes = self._nodes()
        vandermonde = self._monomials(self.nodes)
        self.coefficients = np.linalg.inv(vandermonde)

    def _nodes(self):
        p = self.order
        grid = [(i, j) for j in range(p + 1) for i in range(p + 1 - j)]
        vertices = [(0, 0), (p, 0), (0, p)]
        rest = [node for node in grid if node not in vertices]
        return np.array(vertices + rest, dtype=float) / p

    def _monomials(self, points):
        x = points[:, 0][:, None]
        y = points[:, 1][:, None]
        return x ** self.exponents[:, 0] * y ** self.exponents[:, 1]

    def values(self, points):
        """Basis values at reference points, shape (n, ndof)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._monomials(points) @ self.coefficients

    def gradients(self, points):
        """Reference-coordinate gradients at reference points, shape (n, ndof, 2)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        x = points[:, 0][:, None]
        y = points[:, 1][:, None]
        a = self.exponents[:, 0]
        b = self.exponents[:, 1]
        dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0) * y**b, 0.0)
        dy = np.where(b > 0, b * x**a * y ** np.maximum(b - 1, 0), 0.0)
        return np.stack([dx @ self.coefficients, dy @ self.coefficients], axis=2)


@lru_cache(maxsize=None)
def lagrange_basis(order):
    return LagrangeBasis(order)
