import numpy as np
import pytest

from simulation.scenarios import builtin_scenario, run_scenario


@pytest.fixture(scope='session')
def scenario1():
    return builtin_scenario('scenario1')


@pytest.fixture(scope='session')
def scenario1_short_trace(scenario1):
    return run_scenario(scenario1.with_overrides(t_end=50.0))


@pytest.fixture(scope='session')
def scenario1_trace(scenario1):
    return run_scenario(scenario1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def field_doc():
    return {
        'name': 'test',
        'm': 2,
        'field': {'c1': 3.0, 'hessian': [[1.0, 0.2], [0.2, 2.0]],
                  'extremum': [{'offset': 1.0, 'terms': []}, {'offset': 2.0, 'terms': []}]},
        'agent': [{'offset': 0.0, 'terms': [{'amplitude': 1.0, 'frequency': 4.0}, {'amplitude': 1.0, 'frequency': 5.0}]},
                  {'offset': 0.0, 'terms': [{'amplitude': 1.0, 'frequency': 2.0}, {'amplitude': 1.0, 'frequency': 3.0}]}],
    }
