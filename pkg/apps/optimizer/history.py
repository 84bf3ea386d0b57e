"""Per-iteration record of an optimization run."""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

HISTORY_HEADER = "shoreopt optimization history v1"
HISTORY_COLUMNS = ("iteration", "J_total", "J1", "J2", "J3", "J4", "grad_norm", "step")


@dataclass(frozen=True)
class IterationRecord:
    """
    State of one iterate. ``step`` is the line-search step accepted from this
    iterate, zero when the run stopped here. ``max_curvature`` is the largest
    absolute turning-angle curvature of the obstacle boundary.
    """

    iteration: int
    J1: float
    J2: float
    J3: float
    J4: float
    grad_norm: float
    step: float
    valid: bool = True
    min_area: float = 0.0
    max_curvature: float = 0.0

    @property
    def J_total(self):
        return self.J1 + self.J2 + self.J3 + self.J4


@dataclass
class OptHistory:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, record):
        self.records.append(record)

    @property
    def totals(self):
        return np.array([record.J_total for record in self.records])

    @property
    def grad_norms(self):
        return np.array([record.grad_norm for record in self.records])

    def is_decreasing(self):
        return bool(np.all(np.diff(self.totals) < 0.0))

    def all_valid(self):
        return all(record.valid for record in self.records)


def write_history(history, path):
    """Write the history as comma-separated values with a versioned header comment."""
    table = np.array(
        [[getattr(record, column) for column in HISTORY_COLUMNS] for record in history],
        dtype=float,
    )
    np.savetxt(
        Path(path),
        table.reshape(-1, len(HISTORY_COLUMNS)),
        delimiter=",",
        fmt=["%d"] + ["%.17g"] * (len(HISTORY_COLUMNS) - 1),
        header=HISTORY_HEADER + "\n" + ",".join(HISTORY_COLUMNS),
        comments="# ",
    )
    logger.debug("Wrote %d history rows to %s", len(history), path)
