import logging
from dataclasses import dataclass, replace

import numpy as np

from signal_field.parametrization import ThetaVector, triu_indices, unpack_H
from simulation.rk4 import rk4_step
from utils.errors import RejectedInputError, require_finite

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionConfig:
    '''
    Admissible set S_H: H_ii >= eps_diag and H_ii >= sum_{j != i} |H_ij| + delta for every row.
    '''
    eps_diag: float = 0.01
    delta: float = 0.05
    enabled: bool = True

    def __post_init__(self):
        if not self.eps_diag > 0:
            raise RejectedInputError('eps_diag must be positive, got {}'.format(self.eps_diag))
        if not self.delta >= 0:
            raise RejectedInputError('delta must be nonnegative, got {}'.format(self.delta))

    @property
    def diag_floor(self):
        return max(self.eps_diag, self.delta)


@dataclass(frozen=True, eq=False)
class EstimatorState:
    theta_hat: ThetaVector
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise RejectedInputError('Adaptation gain must be positive, got {}'.format(self.gamma))


def gradient_rate(theta, gamma, z, phi):
    return gamma * phi * (z - theta @ phi)


def _check_estimator_input(theta, out):
    if np.shape(out.phi) != theta.shape:
        raise RejectedInputError('Regressor of shape {} does not match parameter vector {}'
                                 .format(np.shape(out.phi), theta.shape))
    require_finite(theta, out.z, out.phi, what='estimator input')


def estimator_derivative(state, out):
    '''Gradient adaptive law gamma * phi * (z - theta_hat^T phi).'''
    theta = state.theta_hat.data
    _check_estimator_input(theta, out)
    return gradient_rate(theta, state.gamma, out.z, out.phi)


def _off_row_sums(H):
    m = H.shape[-1]
    return (np.abs(H) * (1.0 - np.eye(m))).sum(axis=-1)


def members(H, cfg):
    '''Membership in S_H for one Hessian (m, m) or a batch (n, m, m).'''
    diag = np.diagonal(H, axis1=-2, axis2=-1)
    ok = (diag >= cfg.eps_diag) & (diag >= _off_row_sums(H) + cfg.delta)
    return ok.all(axis=-1)


def in_set(theta_H, cfg, layout='full'):
    return bool(members(unpack_H(theta_H, layout), cfg))


def _repair(theta_H, cfg, layout):
    H = unpack_H(theta_H, layout)
    m = H.shape[0]
    diag = np.maximum(np.diag(H), cfg.diag_floor)
    if layout == 'reduced':
        return diag
    off = H - np.diag(np.diag(H))
    r = _off_row_sums(off)
    slack = diag - cfg.delta
    if np.any(slack < r):
        with np.errstate(divide='ignore', invalid='ignore'):
            ratios = np.where(r > 0, slack / r, np.inf)
        s = float(np.clip(ratios.min(), 0.0, 1.0))
        # rounding in s * H_ij can leave a row a few ulps short of the margin
        while s > 0 and not members(off * s + np.diag(diag), cfg):
            s = np.nextafter(s, 0.0)
        off = off * s
    H_new = off + np.diag(diag)
    rows, cols = triu_indices(m)
    return H_new[rows, cols]


def project(theta, cfg):
    '''
    Repair map onto S_H. Only theta_H changes: diagonals are raised to max(eps_diag, delta),
    then all off-diagonal entries are scaled by one common factor until every row is
    dominant by the margin delta. Members of S_H are returned unchanged.
    '''
    require_finite(theta.data, what='parameter vector')
    if in_set(theta.theta_H, cfg, theta.layout):
        return theta
    logger.debug('Projecting theta_H=%s onto S_H', theta.theta_H)
    return theta.with_H(_repair(theta.theta_H, cfg, theta.layout))


def step_projected(state, out, dt, cfg):
    '''
    Advance theta_hat over dt with the filter output held fixed, then project when enabled.
    '''
    if not dt > 0:
        raise RejectedInputError('Step size must be positive, got {}'.format(dt))
    theta = state.theta_hat
    _check_estimator_input(theta.data, out)
    data = rk4_step(lambda _t, th: gradient_rate(th, state.gamma, out.z, out.phi), 0.0, theta.data, dt)
    theta = ThetaVector(data, theta.m, theta.layout)
    if cfg.enabled:
        theta = project(theta, cfg)
    return replace(state, theta_hat=theta)
