import os

os.environ['APP_SETTINGS'] = 'slopelab.config.TestingConfig'

import numpy as np
import pytest

from slopelab import app as slopelab_app
from slopelab.models import FiniteMetricSpace, ScalarField, EuclideanGrid

RESOURCES = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'slopelab', 'resources')


@pytest.fixture
def resource():
    def path(*parts):
        return os.path.join(RESOURCES, *parts)
    return path


@pytest.fixture
def app():
    with slopelab_app.app_context():
        yield slopelab_app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def triangle():
    """
    Three points at unit mutual distance with f = (0, 0.4, 1).
    """
    space = FiniteMetricSpace(np.ones((3, 3)) - np.eye(3))
    return space, ScalarField(space, [0.0, 0.4, 1.0], name='f')


@pytest.fixture
def path3():
    space = FiniteMetricSpace([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    return space, ScalarField(space, [0.0, 1.0, 2.0], name='f')


@pytest.fixture
def line_grid():
    return EuclideanGrid(1, [0.0], 1.0, 0.25)
