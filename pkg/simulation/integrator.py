import numpy as np

from estimation.estimator import EstimatorState, gradient_rate, project
from estimation.filters import FilterState, filter_rates
from signal_field.field import eval_field
from signal_field.parametrization import ThetaVector, psi_rows, theta_size
from simulation.rk4 import rk4_step
from utils.errors import DivergenceError


class CoupledSystem:
    '''
    Filters and adaptive law advanced together on one clock. The state vector is laid out
    as [xi1, xi2 (k entries), theta_hat (k entries)] with k the parameter vector length.
    '''

    def __init__(self, config):
        self.config = config
        self.m = config.m
        self.layout = config.layout
        self.k = theta_size(self.m, self.layout)
        self.a = config.a
        self.gamma = config.gamma
        self.projection = config.projection

    @property
    def size(self):
        return 1 + 2 * self.k

    def initial_state(self):
        if self.config.theta0 is None:
            theta = np.zeros(self.k)
        else:
            theta = np.asarray(self.config.theta0, dtype=float)
        state = np.zeros(self.size)
        state[1 + self.k:] = self._projected(theta)
        return state

    def split(self, state):
        '''(FilterState, EstimatorState) views of a coupled state vector.'''
        k = self.k
        theta = ThetaVector(state[1 + k:], self.m, self.layout)
        return FilterState(float(state[0]), state[1:1 + k], self.a), EstimatorState(theta, self.gamma)

    def inputs(self, times):
        '''Noise-free field values and regressors along the agent path at the given times.'''
        y = self.config.agent.value(times)
        return eval_field(self.config.field, y, times), psi_rows(y, self.layout)

    def rate(self, state, F_meas, psi):
        k = self.k
        z, phi = filter_rates(state[0], state[1:1 + k], self.a, F_meas, psi)
        out = np.empty_like(state)
        out[0] = z
        out[1:1 + k] = phi
        out[1 + k:] = gradient_rate(state[1 + k:], self.gamma, z, phi)
        return out

    def derivative(self, t, state, noise_sample=0.0):
        F, psi = self.inputs(t)
        return self.rate(state, F + noise_sample, psi)

    def _projected(self, theta):
        if not self.projection.enabled:
            return theta
        return project(ThetaVector(theta, self.m, self.layout), self.projection).data

    def advance(self, state, F_stages, psi_stages, dt):
        '''
        RK4 step with inputs precomputed at t, t + dt/2 and t + dt, followed by projection
        of theta_hat.
        '''
        k1 = self.rate(state, F_stages[0], psi_stages[0])
        k2 = self.rate(state + 0.5 * dt * k1, F_stages[1], psi_stages[1])
        k3 = self.rate(state + 0.5 * dt * k2, F_stages[1], psi_stages[1])
        k4 = self.rate(state + dt * k3, F_stages[2], psi_stages[2])
        new = state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(new)):
            return new
        new[1 + self.k:] = self._projected(new[1 + self.k:])
        return new

    def integrate_step(self, state, t, dt, noise_sample=0.0):
        '''
        Advance the coupled state from t to t + dt. The noise sample is held over the step.
        '''
        state = np.asarray(state, dtype=float)
        if not np.all(np.isfinite(state)):
            raise DivergenceError('Non-finite coupled state', t)
        F, psi = self.inputs(np.array([t, t + 0.5 * dt, t + dt]))
        new = self.advance(state, F + noise_sample, psi, dt)
        if not np.all(np.isfinite(new)):
            raise DivergenceError('Coupled state diverged', t)
        return new


def integrate_step(state, t, dt, config, noise_sample=0.0):
    return CoupledSystem(config).integrate_step(state, t, dt, noise_sample)


def integrate_linear_filter(a, forcing, t_end, dt):
    '''
    Integrate the scalar filter d xi/dt = -a xi + forcing(t) from xi(0) = 0 with RK4.
    Used for order studies of the scheme shared by the coupled system.
    '''
    n = int(round(t_end / dt))
    xi = np.zeros(1)
    for i in range(n):
        xi = rk4_step(lambda t, s: np.array([filter_rates(s[0], 0.0, a, forcing(t), 0.0)[0]]), i * dt, xi, dt)
    return float(xi[0])
