import numpy as np
import pytest

from pmetraj import Grid, SolverParams, make_problem, quadratic_bump


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def quad_spec():
    def factory(M=32, m=2.0):
        return make_problem(m, Grid(0.0, 1.0, M), quadratic_bump)
    return factory


@pytest.fixture
def params_for():
    def factory(grid, **kw):
        kw.setdefault("tau", grid.h)
        return SolverParams(**kw)
    return factory
