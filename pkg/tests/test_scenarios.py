import numpy as np
import pytest

from signal_field.parametrization import pack_theta
from simulation.config import scenario_from_container, scenario_to_dict
from simulation.integrator import CoupledSystem
from simulation.scenarios import builtin_scenario, run_scenario, scale_drift, scale_noise, trace_from_frame
from utils.errors import RejectedInputError
from utils.utils import load_trace_csv, save_trace_csv


def test_builtin_scenarios():
    s1 = builtin_scenario('scenario1')
    assert not s1.noise.active and s1.is_stationary
    np.testing.assert_array_equal(s1.field.extremum_at(0.0), [1.0, 2.0])
    s4 = builtin_scenario('scenario4')
    assert s4.noise.active and s4.noise.variance == 0.05
    assert not s4.is_stationary
    assert s4.field.extremum.drift_bound() == pytest.approx(2.22e-3, rel=1e-3)


def test_unknown_builtin_is_rejected():
    with pytest.raises(RejectedInputError):
        builtin_scenario('scenario9')


def test_scale_noise_and_drift():
    s4 = builtin_scenario('scenario4')
    assert scale_noise(s4, 2.0).noise.variance == pytest.approx(0.2)
    assert scale_drift(s4, 0.5).field.extremum.drift_bound() == pytest.approx(s4.field.extremum.drift_bound() / 2)


def test_exact_start_stays_put():
    # with c1 = x^T H x / 2 the filtered residual vanishes and theta* is a fixed point
    config = builtin_scenario('scenario1')
    H, x = config.field.H, np.array([1.0, 2.0])
    config = scenario_from_container(dict(
        scenario_to_dict(config), theta0=pack_theta(H, x).data.tolist(),
        field={'c1': 0.5 * x @ H @ x, 'hessian': H.tolist(), 'extremum': config.field.extremum.to_dict()}))
    trace = run_scenario(config.with_overrides(t_end=20.0))
    assert trace.err_theta.max() < 1e-9
    assert trace.err_x.max() < 1e-9
    assert np.all(trace.in_set)


def test_run_matches_single_steps():
    config = builtin_scenario('scenario2').with_overrides(t_end=5.0)
    trace = run_scenario(config)
    system = CoupledSystem(config)
    state = system.initial_state()
    for i in range(4500):
        state = system.integrate_step(state, i * config.dt, config.dt, config.noise.sample(i))
    np.testing.assert_allclose(state[1 + system.k:], trace.theta_hat[4500], rtol=1e-10, atol=1e-12)


def test_runs_are_deterministic():
    config = builtin_scenario('scenario2').with_overrides(t_end=5.0, seed=7)
    first, second = run_scenario(config), run_scenario(config)
    np.testing.assert_array_equal(first.F_meas, second.F_meas)
    np.testing.assert_array_equal(first.theta_hat, second.theta_hat)


def test_trace_columns_are_consistent(scenario1_short_trace):
    trace = scenario1_short_trace
    assert len(trace) == 50001
    np.testing.assert_array_equal(trace.F_meas, trace.F_true)
    np.testing.assert_allclose(trace.err_H, np.linalg.norm(trace.H_hat - trace.config.field.H, axis=(1, 2)))
    np.testing.assert_array_equal(trace.H_hat, np.swapaxes(trace.H_hat, 1, 2))
    assert np.all(trace.in_set)


def test_trace_reloads_from_csv(scenario1_short_trace, tmp_path):
    save_trace_csv(tmp_path / 'trace.csv', scenario1_short_trace, full_trace=True)
    again = trace_from_frame(load_trace_csv(tmp_path / 'trace.csv'), scenario1_short_trace.config)
    for name in ('t', 'y', 'z', 'phi', 'theta_hat', 'H_hat', 'x_hat', 'err_x', 'err_theta', 'residual'):
        np.testing.assert_array_equal(getattr(again, name), getattr(scenario1_short_trace, name))
