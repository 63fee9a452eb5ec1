"""
Deterministic low-discrepancy sampling of chart boxes and of hypersurfaces.
"""

import logging
from typing import List, Sequence

import numpy as np
from scipy.stats import qmc

try:
    from .errors import ChartBreakdownError
except ImportError:
    from errors import ChartBreakdownError

logger = logging.getLogger(__name__)


def halton_points(domain: Sequence[Sequence[float]], count: int, seed: int) -> np.ndarray:
    """Scrambled Halton points in a box given as (lower, upper) per axis."""
    domain = np.asarray(domain, dtype=float)
    if count <= 0:
        return np.empty((0, len(domain)))
    sampler = qmc.Halton(d=len(domain), scramble=True, seed=seed)
    unit = sampler.random(count)
    return qmc.scale(unit, domain[:, 0], domain[:, 1])


def sample_hypersurface(scenario, count: int, seed: int, max_attempts: int = 4) -> List[np.ndarray]:
    """Points of L from Halton points projected along the graph coordinate.

    Points whose root-solve leaves the chart are skipped; further Halton
    points are drawn until ``count`` points are collected or the attempt
    budget is spent.
    """
    points: List[np.ndarray] = []
    drawn = 0
    for attempt in range(max_attempts):
        batch = halton_points(scenario.sampling_domain, count * (attempt + 1), seed)[drawn:]
        drawn += len(batch)
        for candidate in batch:
            try:
                points.append(scenario.project(candidate))
            except ChartBreakdownError as exc:
                logger.debug("Skipping sample %s: %s", np.round(candidate, 6).tolist(), exc)
            if len(points) == count:
                return points
    logger.warning("Only %d of %d samples landed on %s", len(points), count, scenario.name)
    return points
