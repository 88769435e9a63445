"""Occupancy grid over undiscovered objects, with birth-aware prediction."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import AgentPose, Bounds
from .motion import SensorModel, detection_probability


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Row-major grid of cell occupancy probabilities; row 0 is the lowest y."""

    cells: np.ndarray
    bounds: Bounds
    r_B: float = 0.005
    p_S: float = 0.99

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-D array")
        if np.any(cells < 0) or np.any(cells > 1):
            raise ValueError("cell probabilities must lie in [0, 1]")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @classmethod
    def uniform(cls, bounds: Bounds, rows: int = 100, cols: int = 100, r_B=0.005, p_S=0.99):
        return cls(np.full((rows, cols), r_B), bounds, r_B, p_S)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    @property
    def n_cells(self) -> int:
        return self.cells.size

    @property
    def cell_size(self) -> tuple[float, float]:
        rows, cols = self.shape
        return (self.bounds.width / cols, self.bounds.height / rows)

    def centers(self) -> np.ndarray:
        """(rows, cols, 2) array of cell-centre coordinates."""
        rows, cols = self.shape
        dx, dy = self.cell_size
        xs = self.bounds.xmin + (np.arange(cols) + 0.5) * dx
        ys = self.bounds.ymin + (np.arange(rows) + 0.5) * dy
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        rows, cols = self.shape
        dx, dy = self.cell_size
        c = int(np.clip((x - self.bounds.xmin) // dx, 0, cols - 1))
        r = int(np.clip((y - self.bounds.ymin) // dy, 0, rows - 1))
        return r, c

    def with_cells(self, cells) -> "OccupancyGrid":
        return replace(self, cells=cells)


def predict_occupancy(r, r_B: float, p_S: float):
    return r_B * (1.0 - r) + r * p_S


def empty_update(r, p_d):
    """Occupancy after an empty observation from a sensor with detection probability p_d."""
    q = 1.0 - p_d
    num = q * r
    den = 1.0 - r + num
    return np.divide(num, den, out=np.zeros_like(np.asarray(num, dtype=float)), where=den > 0)


def binary_entropy(r):
    """Elementwise Bernoulli entropy in nats, with 0 log 0 = 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(r * np.log(r) + (1.0 - r) * np.log1p(-r))
    return np.where(np.isnan(h), 0.0, h)


def grid_predict(grid: OccupancyGrid) -> OccupancyGrid:
    return grid.with_cells(predict_occupancy(grid.cells, grid.r_B, grid.p_S))


def cell_detection_probability(grid: OccupancyGrid, pose: AgentPose, sensor: SensorModel):
    return detection_probability(pose, grid.centers(), sensor)


def grid_update(
    grid: OccupancyGrid, poses: Sequence[AgentPose], sensor: SensorModel
) -> OccupancyGrid:
    """Empty-measurement update for every agent, applied in agent order."""
    cells = grid.cells
    centers = grid.centers()
    for pose in sorted(poses, key=lambda p: p.agent_id):
        cells = empty_update(cells, detection_probability(pose, centers, sensor))
    return grid.with_cells(cells)


def grid_entropy(grid: OccupancyGrid) -> float:
    """Shannon entropy of the grid in nats."""
    return float(np.sum(binary_entropy(grid.cells)))


def mean_cell_entropy(grid: OccupancyGrid) -> float:
    return grid_entropy(grid) / grid.n_cells
