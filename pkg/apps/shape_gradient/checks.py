"""Finite-difference checks of the assembled shape derivative."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from apps.shape_gradient.elasticity import outer_vertices

logger = logging.getLogger(__name__)

CHECK_HEADER = "shoreopt gradient check v1"
CHECK_COLUMNS = ("field", "term", "derivative", "finite_difference", "relative_error")
# Relative size of the perturbation against the mean cell diameter.
STEP_FACTOR = 1e-3


@dataclass(frozen=True)
class CheckRow:
    field: int
    term: str
    derivative: float
    finite_difference: float

    @property
    def relative_error(self):
        if self.finite_difference == 0.0:
            return 0.0 if self.derivative == 0.0 else float("inf")
        return abs(self.derivative - self.finite_difference) / abs(self.finite_difference)


def random_fields(mesh, mask, count, seed=0):
    """Random vertex fields supported on ``mask`` and zero on the outer boundary."""
    rng = np.random.default_rng(seed)
    support = np.asarray(mask, dtype=bool).copy()
    support[outer_vertices(mesh)] = False
    fields = []
    for _ in range(count):
        V = np.zeros((mesh.n_vertices, 2))
        V[support] = rng.standard_normal((int(support.sum()), 2))
        fields.append(V)
    return fields


def central_difference(evaluate, mesh, V, step):
    """(J(x + step V) - J(x - step V)) / 2 step for every term ``evaluate`` returns."""
    plus = evaluate(mesh.moved(mesh.vertices + step * V))
    minus = evaluate(mesh.moved(mesh.vertices - step * V))
    return {name: (plus[name] - minus[name]) / (2.0 * step) for name in plus}


def gradient_check(evaluate, mesh, assembly, count=3, seed=0, threads=1, step=None):
    """
    Compare DJ[V] with central differences for ``count`` random fields.

    ``evaluate(mesh)`` returns a mapping of term names to objective values on
    a moved mesh. Fields are checked concurrently; rows come back in field
    then term order.
    """
    fields = random_fields(mesh, assembly.mask, count, seed)
    if step is None:
        step = STEP_FACTOR * float(mesh.geometry.diameters.mean())

    def check(V):
        scaled = step / max(float(np.abs(V).max()), 1e-300)
        return central_difference(evaluate, mesh, V, scaled)

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        differences = list(pool.map(check, fields))

    rows = []
    for index, (V, difference) in enumerate(zip(fields, differences)):
        derivatives = assembly.apply_terms(V)
        for term, value in difference.items():
            row = CheckRow(
                field=index,
                term=term,
                derivative=derivatives.get(term, assembly.apply(V)),
                finite_difference=value,
            )
            rows.append(row)
            logger.info(
                "Field %d %s: DJ=%.6e FD=%.6e rel.err=%.2e",
                index,
                term,
                row.derivative,
                row.finite_difference,
                row.relative_error,
            )
    return rows


def write_check(rows, path):
    """Write check rows as comma-separated values with a versioned header comment."""
    lines = [f"# {CHECK_HEADER}", "# " + ",".join(CHECK_COLUMNS)]
    for row in rows:
        lines.append(
            f"{row.field},{row.term},{row.derivative:.17g},"
            f"{row.finite_difference:.17g},{row.relative_error:.17g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
    logger.debug("Wrote %d gradient check rows to %s", len(rows), path)
