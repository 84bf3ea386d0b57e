"""Gauss quadrature on the reference triangle and the unit interval."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from apps.dg_space.exceptions import QuadratureError

# Reference triangle vertices; barycentric coordinate j belongs to vertex j.
REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights of a quadrature rule exact up to ``degree``.

    Triangle rules hold barycentric points and weights summing to 1/2, the
    reference triangle area; edge rules hold parameters in [0, 1] and weights
    summing to 1.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)

    @property
    def reference_points(self):
        """Triangle points in reference (xi, eta) coordinates."""
        return self.points @ REFERENCE_VERTICES


def _check_degree(degree):
    if not isinstance(degree, (int, np.integer)) or degree < 0:
        raise QuadratureError(f"quadrature degree must be a non-negative integer, got {degree!r}")


SYMMETRIC_ORBITS = {
    1: [((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), 1.0)],
    2: [((2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0), 1.0 / 3.0)],
    4: [
        (
            (0.10810301816807022736, 0.44594849091596488632, 0.44594849091596488632),
            0.22338158967801146570,
        ),
        (
            (0.81684757298045851124, 0.09157621350977073438, 0.09157621350977073438),
            0.10995174365532186764,
        ),
    ],
}


def _symmetric_rule(degree):
    """Permutation-invariant rule built from (barycentric orbit, weight) pairs."""
    points, weights = [], []
    for (a, b, _), weight in SYMMETRIC_ORBITS[degree]:
        orbit = [(a, b, b)] if a == b else [(a, b, b), (b, a, b), (b, b, a)]
        points += orbit
        weights += [0.5 * weight] * len(orbit)
    return np.array(points), np.array(weights)


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """
    Quadrature on the reference triangle exact up to ``degree``.

    Degrees up to 4 use symmetric rules, so the result does not depend on the
    vertex order of a cell; higher degrees fall back to a collapsed (Duffy)
    Gauss-Legendre product rule.
    """
    _check_degree(degree)
    symmetric = next((d for d in sorted(SYMMETRIC_ORBITS) if d >= degree), None)
    if symmetric is not None:
        points, weights = _symmetric_rule(symmetric)
        points.setflags(write=False)
        weights.setflags(write=False)
        return QuadratureRule(points=points, weights=weights, degree=int(degree))
    n = max(1, int(np.ceil((degree + 2) / 2)))
    nodes, weights = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    xi, eta = np.meshgrid(s, s, indexing="ij")
    wxi, weta = np.meshgrid(w, w, indexing="ij")
    x = xi.ravel()
    y = (eta * (1.0 - xi)).ravel()
    weights = (wxi * weta * (1.0 - xi)).ravel()
    points = np.column_stack([1.0 - x - y, x, y])
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points=points, weights=weights, degree=int(degree))


@lru_cache(maxsize=None)
def edge_rule(degree):
    """Gauss-Legendre rule on the unit interval."""
    _check_degree(degree)
    n = max(1, int(np.ceil((degree + 1) / 2)))
    nodes, weights = np.polynomial.legendre.leggauss(n)
    points = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points=points, weights=weights, degree=int(degree))
