from dataclasses import dataclass

import numpy as np

from utils.errors import RejectedInputError, require_finite


@dataclass(frozen=True, eq=False)
class FilterState:
    '''
    States of the two first order filters 1/(s+a): xi1 filters the measured field value,
    xi2 filters the regressor. Both start at zero.
    '''
    xi1: float
    xi2: np.ndarray
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise RejectedInputError('Filter pole must be positive, got {}'.format(self.a))

    @classmethod
    def zeros(cls, k, a):
        return cls(0.0, np.zeros(k), a)


@dataclass(frozen=True, eq=False)
class FilterOutput:
    z: float
    phi: np.ndarray


def filter_rates(xi1, xi2, a, F_meas, psi):
    # -a xi + input: the filter derivative, which is also the filter output (z, phi)
    return F_meas - a * xi1, psi - a * xi2


def _check(state, F_meas, psi):
    psi = getattr(psi, 'data', psi)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != np.shape(state.xi2):
        raise RejectedInputError('Regressor of shape {} does not match filter state {}'
                                 .format(psi.shape, np.shape(state.xi2)))
    require_finite(state.xi1, state.xi2, F_meas, psi, what='filter input')
    return psi


def filter_output(state, F_meas, psi):
    '''z = -a xi1 + F and phi = -a xi2 + Psi.'''
    psi = _check(state, F_meas, psi)
    z, phi = filter_rates(state.xi1, state.xi2, state.a, F_meas, psi)
    return FilterOutput(float(z), phi)


def filter_derivative(state, F_meas, psi):
    '''Time derivatives (d xi1, d xi2) of the filter states.'''
    psi = _check(state, F_meas, psi)
    d_xi1, d_xi2 = filter_rates(state.xi1, state.xi2, state.a, F_meas, psi)
    return float(d_xi1), d_xi2
