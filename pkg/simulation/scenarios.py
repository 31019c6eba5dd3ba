import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
from omegaconf import OmegaConf

from estimation.estimator import members
from estimation.pe import pe_bounds
from signal_field.field import FieldParams, NoiseSpec
from signal_field.parametrization import h_size, triu_indices, unpack_H
from simulation.config import ScenarioConfig, scenario_from_container
from simulation.integrator import CoupledSystem
from utils.errors import DivergenceError, RejectedInputError
from utils.utils import format_time

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / 'cfg' / 'scenario'
BUILTIN_SCENARIOS = ('scenario1', 'scenario2', 'scenario3', 'scenario4')
# Steps whose stage inputs are evaluated in one vectorized batch
CHUNK = 4096
# Condition number above which an estimated Hessian is treated as not invertible
MAX_COND = 1e12


@dataclass(eq=False)
class SimulationTrace:
    '''
    Uniformly sampled record of one run. Rows are time samples t_k = k dt.
    '''
    t: np.ndarray
    y: np.ndarray
    x_true: np.ndarray
    F_true: np.ndarray
    F_meas: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    theta_hat: np.ndarray
    H_hat: np.ndarray
    x_hat: np.ndarray
    err_x: np.ndarray
    err_H: np.ndarray
    err_theta: np.ndarray
    residual: np.ndarray
    in_set: np.ndarray
    config: Optional[ScenarioConfig] = None

    def __len__(self):
        return self.t.size

    @property
    def H_hat_packed(self):
        rows, cols = triu_indices(self.H_hat.shape[-1])
        return self.H_hat[:, rows, cols]


def builtin_scenario(name):
    '''Scenario configuration shipped in cfg/scenario.'''
    if name not in BUILTIN_SCENARIOS:
        raise RejectedInputError('Unknown scenario {!r}, expected one of {}'.format(name, BUILTIN_SCENARIOS))
    return scenario_from_container(OmegaConf.load(SCENARIO_DIR / '{}.yaml'.format(name)))


def scale_noise(config, factor):
    '''Same scenario with the noise standard deviation multiplied by factor.'''
    noise = NoiseSpec(config.noise.variance * factor ** 2, config.noise.seed, config.noise.kind)
    return replace(config, noise=noise)


def scale_drift(config, factor):
    '''Same scenario with the extremum drift amplitude multiplied by factor, frequencies unchanged.'''
    field = FieldParams(config.field.c1, config.field.H, config.field.extremum.scaled(factor))
    return replace(config, field=field)


def build_trace(config, times, states, noise):
    '''Derive every trace column from the raw coupled states and the noise samples.'''
    system = CoupledSystem(config)
    k, m = system.k, config.m
    y = config.agent.value(times)
    x_true = config.field.extremum_at(times)
    F_true, psi = system.inputs(times)
    F_meas = F_true + noise
    z = F_meas - config.a * states[:, 0]
    phi = psi - config.a * states[:, 1:1 + k]
    theta_hat = states[:, 1 + k:]
    nh = h_size(m, config.layout)
    H_hat = unpack_H(theta_hat[:, :nh], config.layout, m)
    theta_x = theta_hat[:, nh:]

    H = config.field.H
    if config.layout == 'full':
        rows, cols = triu_indices(m)
        theta_star_H = H[rows, cols]
    else:
        theta_star_H = np.diag(H)
    theta_star = np.concatenate([np.broadcast_to(theta_star_H, (times.size, nh)), x_true @ H], axis=1)

    x_hat = np.full((times.size, m), np.nan)
    ok = np.all(np.isfinite(H_hat), axis=(1, 2)) & np.all(np.isfinite(theta_x), axis=1)
    if np.any(ok):
        with np.errstate(divide='ignore', invalid='ignore'):
            cond = np.linalg.cond(H_hat[ok])
        idx = np.flatnonzero(ok)[cond < MAX_COND]
        x_hat[idx] = np.linalg.solve(H_hat[idx], theta_x[idx][..., None])[..., 0]

    return SimulationTrace(
        t=times, y=y, x_true=x_true, F_true=F_true, F_meas=F_meas, z=z, phi=phi, theta_hat=theta_hat,
        H_hat=H_hat, x_hat=x_hat,
        err_x=np.linalg.norm(x_hat - x_true, axis=1),
        err_H=np.linalg.norm(H_hat - H, axis=(1, 2)),
        err_theta=np.linalg.norm(theta_hat - theta_star, axis=1),
        residual=z - np.einsum('ni,ni->n', theta_star, phi),
        in_set=members(H_hat, config.projection),
        config=config)


def run_scenario(config: ScenarioConfig) -> SimulationTrace:
    '''
    Integrate filters and adaptive law along the agent path over [0, t_end] with fixed step dt.
    Deterministic for a fixed configuration and seed.
    '''
    start_time = time.time()
    system = CoupledSystem(config)
    dt, n_steps = config.dt, config.n_steps
    logger.info('Running %s: m=%d, layout=%s, dt=%g, t_end=%g (%d steps)',
                config.name, config.m, config.layout, dt, config.t_end, n_steps)

    states = np.empty((n_steps + 1, system.size))
    states[0] = state = system.initial_state()
    noise = config.noise.samples(0, n_steps + 1)
    report_every = max(1, n_steps // 10)

    for start in range(0, n_steps, CHUNK):
        count = min(CHUNK, n_steps - start)
        t0 = np.arange(start, start + count) * dt
        stage_t = np.stack([t0, t0 + 0.5 * dt, t0 + dt], axis=1)
        F, psi = system.inputs(stage_t.reshape(-1))
        F = F.reshape(count, 3) + noise[start:start + count, None]
        psi = psi.reshape(count, 3, system.k)
        for i in range(count):
            state = system.advance(state, F[i], psi[i], dt)
            if not np.all(np.isfinite(state)):
                raise DivergenceError('Coupled state diverged', t0[i])
            states[start + i + 1] = state
            if (start + i + 1) % report_every == 0:
                logger.info('%s: t=%.1f of %g', config.name, (start + i + 1) * dt, config.t_end)

    trace = build_trace(config, np.arange(n_steps + 1) * dt, states, noise)
    logger.info('Finished %s in %s', config.name, format_time(time.time() - start_time))
    return trace


def pe_report(trace, T=None, stride=None):
    settings = trace.config.metrics
    T = settings.pe_window if T is None else T
    if stride is None:
        stride = settings.pe_stride if settings.pe_stride is not None else T / 2
    return pe_bounds(trace.t, trace.phi, T, stride)


def trace_from_frame(frame, config):
    '''
    Rebuild a SimulationTrace from a loaded trace CSV. Regressor columns are only present
    in full traces; phi is None otherwise.
    '''
    m = config.m
    k = sum(1 for c in frame.columns if c.startswith('thetahat_'))
    rows, cols = triu_indices(m)
    packed = frame[['Hhat_{}{}'.format(i + 1, j + 1) for i, j in zip(rows, cols)]].to_numpy()
    H_hat = np.zeros((len(frame), m, m))
    H_hat[:, rows, cols] = packed
    H_hat[:, cols, rows] = packed
    phi_cols = ['phi_{}'.format(i + 1) for i in range(k)]
    t = frame['t'].to_numpy()
    return SimulationTrace(
        t=t, y=frame[['y_{}'.format(i + 1) for i in range(m)]].to_numpy(), x_true=config.field.extremum_at(t),
        F_true=frame['F_true'].to_numpy(), F_meas=frame['F_meas'].to_numpy(), z=frame['z'].to_numpy(),
        phi=frame[phi_cols].to_numpy() if all(c in frame.columns for c in phi_cols) else None,
        theta_hat=frame[['thetahat_{}'.format(i + 1) for i in range(k)]].to_numpy(),
        H_hat=H_hat, x_hat=frame[['xhat_{}'.format(i + 1) for i in range(m)]].to_numpy(),
        err_x=frame['err_x'].to_numpy(), err_H=frame['err_H'].to_numpy(), err_theta=frame['err_theta'].to_numpy(),
        residual=frame['residual'].to_numpy(), in_set=members(H_hat, config.projection), config=config)
