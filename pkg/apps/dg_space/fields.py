from dataclasses import dataclass

import numpy as np

from apps.dg_space.basis import ndof
from apps.dg_space.exceptions import FieldShapeError


@dataclass
class DGField:
    """Per-cell coefficients of a broken polynomial field.

    ``coeffs`` has shape (n_cells, n_components, ndof(order)); with the nodal
    basis the first three coefficients of a cell are its vertex values.
    """

    coeffs: np.ndarray
    order: int = 1

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 3:
            raise FieldShapeError(f"coefficients must be 3-dimensional, got {self.coeffs.shape}")
        if self.coeffs.shape[2] != ndof(self.order):
            raise FieldShapeError(
                f"order {self.order} needs {ndof(self.order)} dofs per cell, "
                f"got {self.coeffs.shape[2]}"
            )

    @classmethod
    def zeros(cls, n_cells, n_components, order=1):
        return cls(np.zeros((n_cells, n_components, ndof(order))), order)

    @property
    def n_cells(self):
        return self.coeffs.shape[0]

    @property
    def n_components(self):
        return self.coeffs.shape[1]

    @property
    def ndof(self):
        return self.coeffs.shape[2]

    @property
    def vertex_values(self):
        """Traces at the three cell vertices, shape (n_cells, n_components, 3)."""
        return self.coeffs[:, :, :3]

    def component(self, index):
        return DGField(self.coeffs[:, index : index + 1].copy(), self.order)

    def copy(self):
        return DGField(self.coeffs.copy(), self.order)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.coeffs)))

    def _check(self, other):
        if self.coeffs.shape != other.coeffs.shape:
            raise FieldShapeError(f"shape mismatch {self.coeffs.shape} vs {other.coeffs.shape}")

    def __add__(self, other):
        self._check(other)
        return DGField(self.coeffs + other.coeffs, self.order)

    def __sub__(self, other):
        self._check(other)
        return DGField(self.coeffs - other.coeffs, self.order)

    def __mul__(self, scalar):
        return DGField(self.coeffs * float(scalar), self.order)

    __rmul__ = __mul__

    def __neg__(self):
        return DGField(-self.coeffs, self.order)
