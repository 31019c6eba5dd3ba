import numpy as np
import pytest

from simulation.config import scenario_from_container
from simulation.integrator import CoupledSystem, integrate_linear_filter, integrate_step
from utils.errors import DivergenceError


@pytest.fixture
def quiet_config(field_doc):
    # F == 0 and Psi == 0 along the path
    field_doc['field']['c1'] = 0.0
    field_doc['field']['extremum'] = [{'offset': 0.0, 'terms': []}, {'offset': 0.0, 'terms': []}]
    field_doc['agent'] = [{'offset': 0.0, 'terms': []}, {'offset': 0.0, 'terms': []}]
    field_doc['projection'] = {'enabled': False}
    return scenario_from_container(field_doc)


def test_zero_dynamics(quiet_config):
    state = np.zeros(CoupledSystem(quiet_config).size)
    np.testing.assert_array_equal(integrate_step(state, 0.0, 0.1, quiet_config), state)


def test_single_step_of_linear_filter():
    xi = integrate_linear_filter(0.5, lambda t: 1.0, 0.1, 0.1)
    assert xi == pytest.approx((1 - np.exp(-0.05)) / 0.5, abs=1e-9)


def test_fourth_order_convergence():
    a, w = 10.0, 3.0
    exact = (a * np.sin(w) - w * np.cos(w) + w * np.exp(-a)) / (a ** 2 + w ** 2)
    errors = [abs(integrate_linear_filter(a, lambda t: np.sin(w * t), 1.0, dt) - exact)
              for dt in (1e-2, 5e-3, 2.5e-3)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all((orders >= 3.7) & (orders <= 4.3))


def test_step_matches_derivative(field_doc):
    field_doc['projection'] = {'enabled': False}
    config = scenario_from_container(field_doc)
    system = CoupledSystem(config)
    state = system.initial_state()
    dt = 1e-6
    new = system.integrate_step(state, 2.0, dt)
    np.testing.assert_allclose((new - state) / dt, system.derivative(2.0 + dt / 2, state), rtol=1e-4, atol=1e-6)


def test_initial_state_is_projected(field_doc):
    field_doc['theta0'] = [-1.0, 3.0, 0.5, 0.0, 0.0]
    system = CoupledSystem(scenario_from_container(field_doc))
    state = system.initial_state()
    _, estimator = system.split(state)
    H = estimator.theta_hat.theta_H
    assert H[0] >= 0.05 and H[2] >= abs(H[1]) + 0.05
    assert np.all(state[:1 + system.k] == 0)


def test_divergence_is_reported(field_doc):
    config = scenario_from_container(field_doc)
    state = np.full(CoupledSystem(config).size, np.nan)
    with pytest.raises(DivergenceError) as e:
        integrate_step(state, 1.5, 1e-3, config)
    assert e.value.t == 1.5
