from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg

from utils.errors import RejectedInputError

DEFAULT_WINDOW = 10.0


@dataclass
class PEReport:
    '''
    Persistent excitation diagnostic: for every window [t, t+T] the extreme eigenvalues of
    the Gram integral of phi phi^T, and their extrema over all windows.
    '''
    T: float
    stride: float
    windows: List[Tuple[float, float, float]] = field(default_factory=list)
    alpha1: float = float('nan')
    alpha2: float = float('nan')

    def to_dict(self):
        return {'T': self.T, 'stride': self.stride, 'alpha1': self.alpha1, 'alpha2': self.alpha2,
                'windows': [{'t_start': t, 'lambda_min': lo, 'lambda_max': hi} for t, lo, hi in self.windows]}

    @classmethod
    def from_dict(cls, d):
        return cls(d['T'], d['stride'], [(w['t_start'], w['lambda_min'], w['lambda_max']) for w in d['windows']],
                   d['alpha1'], d['alpha2'])


def _grid_step(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise RejectedInputError('Need a 1-d time grid with at least two samples')
    return times, (times[-1] - times[0]) / (times.size - 1)


GRID_TOL = 1e-6


def _grid_count(span, dt, what):
    '''Number of grid steps in span; spans more than GRID_TOL steps off the grid are rejected.'''
    k = span / dt
    n = int(round(k))
    if abs(k - n) > GRID_TOL:
        raise RejectedInputError('{} {} is not a multiple of the sample step {}'.format(what, span, dt))
    return n


def _window_slice(times, dt, t, T):
    i0 = _grid_count(t - times[0], dt, 'Window start offset')
    n = _grid_count(T, dt, 'Window length')
    if i0 < 0 or i0 + n > times.size - 1:
        raise RejectedInputError('Window [{}, {}] exceeds the trace extent [{}, {}]'
                                 .format(t, t + T, times[0], times[-1]))
    return slice(i0, i0 + n + 1)


def gram_matrix(times, phi, t, T):
    '''
    Trapezoidal approximation of the integral of phi(tau) phi(tau)^T over [t, t+T] on a
    uniform sample grid. Both t and t+T must fall on sample instants.
    '''
    if not T > 0:
        raise RejectedInputError('Window length must be positive, got {}'.format(T))
    times, dt = _grid_step(times)
    phi = np.asarray(phi, dtype=float)
    if phi.shape[0] != times.size:
        raise RejectedInputError('Got {} regressor samples for {} time stamps'.format(phi.shape[0], times.size))
    window = phi[_window_slice(times, dt, t, T)]
    G = scipy.integrate.trapezoid(np.einsum('ni,nj->nij', window, window), dx=dt, axis=0)
    return 0.5 * (G + G.T)


def pe_bounds(times, phi, T=DEFAULT_WINDOW, stride=None, t_start=None):
    '''
    Slides a window of length T with the given stride (T/2 by default) over the trace and
    reports the smallest and largest Gram eigenvalues. T and the stride must be whole
    multiples of the sample step.
    '''
    times, dt = _grid_step(times)
    if stride is None:
        stride = T / 2
    if not stride > 0:
        raise RejectedInputError('Stride must be positive, got {}'.format(stride))
    start = times[0] if t_start is None else t_start
    n = _grid_count(T, dt, 'Window length')

    def fits(t):
        return _grid_count(t - times[0], dt, 'Window start offset') + n <= times.size - 1

    if not fits(start):
        raise RejectedInputError('Trace [{}, {}] is shorter than the window {}'.format(start, times[-1], T))
    report = PEReport(T=float(T), stride=float(stride))
    k = 0
    while fits(start + k * stride):
        t = start + k * stride
        eig = scipy.linalg.eigh(gram_matrix(times, phi, t, T), eigvals_only=True)
        report.windows.append((float(t), float(eig[0]), float(eig[-1])))
        k += 1
    report.alpha1 = min(w[1] for w in report.windows)
    report.alpha2 = max(w[2] for w in report.windows)
    return report
