"""
Sample Grids

Uniform grid over the declared chart ranges plus seeded pseudo-random
interior points. Every (identity, point) pair gets its own generator so
results do not depend on evaluation order.
"""

import itertools
import logging
import zlib
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np


logger = logging.getLogger(__name__)


@dataclass
class SampleGrid:
    """Points of one run; grid points come first"""
    points: List[np.ndarray]
    grid_count: int
    random_count: int
    seed: int

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def grid_points(ranges: Sequence[Sequence[float]], per_axis: int) -> List[np.ndarray]:
    axes = []
    for low, high in ranges:
        if per_axis == 1 or low == high:
            axes.append(np.array([0.5 * (low + high)]))
        else:
            axes.append(np.linspace(low, high, per_axis))
    return [np.array(combo, dtype=float) for combo in itertools.product(*axes)]


def random_points(ranges: Sequence[Sequence[float]], count: int, seed: int) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    low = np.array([r[0] for r in ranges], dtype=float)
    high = np.array([r[1] for r in ranges], dtype=float)
    return [low + (high - low) * rng.uniform(0.05, 0.95, size=len(ranges)) for _ in range(count)]


def build_grid(ranges: Sequence[Sequence[float]], per_axis: int, count: int, seed: int) -> SampleGrid:
    """
    Build the sample grid of a run

    Args:
        ranges: [low, high] per chart coordinate
        per_axis: Uniform grid points per axis
        count: Number of random interior points
        seed: Seed for the random points

    Returns:
        SampleGrid
    """
    uniform = grid_points(ranges, per_axis) if per_axis > 0 else []
    extra = random_points(ranges, count, seed)
    logger.debug(f"Sample grid: {len(uniform)} grid + {len(extra)} random points (seed {seed})")
    return SampleGrid(points=uniform + extra, grid_count=len(uniform),
                      random_count=len(extra), seed=seed)


def point_rng(seed: int, point_index: int, identity_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, point_index, zlib.crc32(identity_id.encode('utf-8'))])


def random_vectors(rng: np.random.Generator, dim: int, count: int) -> List[np.ndarray]:
    return [rng.standard_normal(dim) for _ in range(count)]
