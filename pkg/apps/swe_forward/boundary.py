"""Ghost states for the advective boundary flux."""

import numpy as np

from apps.mesh_core.mesh import BoundaryTag
from apps.swe_forward.exceptions import SWEError
from apps.swe_forward.physics import check_height

WALL_TAGS = (BoundaryTag.SHORE, BoundaryTag.OBSTACLE)


def reflect(Q, n):
    """Mirror a vector field in the face: Q - 2 (Q.n) n."""
    Q = np.asarray(Q, dtype=float)
    n = np.asarray(n, dtype=float)
    return Q - 2.0 * np.sum(Q * n, axis=0) * n


def boundary_state(U, n, tag, H1):
    """
    Ghost state on a boundary face.

    Rigid walls (shore and obstacle) mirror the discharge; the open sea
    prescribes the height H1 and copies the discharge.
    """
    U = np.asarray(U, dtype=float)
    check_height(U[0])
    tag = BoundaryTag(int(tag))
    if tag in WALL_TAGS:
        return np.concatenate([U[:1], reflect(U[1:], n)])
    if not H1 > 0:
        raise SWEError(f"open-sea height H1 must be positive, got {H1}")
    return np.concatenate([np.full_like(U[:1], H1), U[1:]])
