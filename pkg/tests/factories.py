"""Test factories for creating test data."""

import random

import numpy as np
from factory import Factory, LazyAttribute, LazyFunction, SubFactory

from lgpac.models.frechet import GridFunction, SpatialGrid


class SpatialGridFactory(Factory):
    """Creates uniform grids with a random start and length"""

    class Meta:  # pylint: disable=too-few-public-methods
        """Meta class"""

        model = SpatialGrid

    lower = LazyFunction(lambda: random.choice([0.0, 0.5, 1.0, 2.0]))
    upper = LazyAttribute(lambda o: o.lower + random.choice([2.0, 3.0, 5.0]))
    points = LazyAttribute(lambda o: tuple(float(p) for p in np.linspace(o.lower, o.upper, random.randint(3, 17))))


class GridFunctionFactory(Factory):
    """Creates grid functions with values in [-3, 3]"""

    class Meta:  # pylint: disable=too-few-public-methods
        """Meta class"""

        model = GridFunction

    grid = SubFactory(SpatialGridFactory)
    values = LazyAttribute(lambda o: np.random.uniform(-3.0, 3.0, o.grid.size))


def grid_function_pair(grid=None, scale: float = 1.0):
    """Two grid functions on one grid; scale controls how far apart they are"""
    grid = grid or SpatialGridFactory()
    f = GridFunctionFactory(grid=grid)
    g = GridFunction(grid, f.values + scale * np.random.uniform(-1.0, 1.0, grid.size))
    return f, g
