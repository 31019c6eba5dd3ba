import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from utils.errors import NumericalError, RejectedInputError

LAYOUTS = ('full', 'reduced')


def check_layout(layout):
    if layout not in LAYOUTS:
        raise RejectedInputError('Unknown layout {!r}, expected one of {}'.format(layout, LAYOUTS))


def h_size(m, layout):
    '''Length of the Hessian block theta_H.'''
    check_layout(layout)
    return m * (m + 1) // 2 if layout == 'full' else m


def theta_size(m, layout):
    return h_size(m, layout) + m


def dim_from_theta_size(k, layout):
    check_layout(layout)
    if layout == 'reduced':
        if k % 2:
            raise RejectedInputError('Reduced parameter vector must have even length, got {}'.format(k))
        return k // 2
    m = int(round((-3 + np.sqrt(9 + 8 * k)) / 2))
    if m < 1 or m * (m + 3) // 2 != k:
        raise RejectedInputError('{} is not a valid full parameter length m(m+3)/2'.format(k))
    return m


def index_of(i, j, m):
    '''
    Position of H_ij (1-based, i <= j) in theta_H, packed as the row-major upper triangle
    H_11, H_12, ..., H_1m, H_22, ..., H_mm.
    '''
    if not 1 <= i <= j <= m:
        raise RejectedInputError('Need 1 <= i <= j <= m, got i={}, j={}, m={}'.format(i, j, m))
    return (i - 1) * m - (i - 1) * (i - 2) // 2 + (j - i)


@lru_cache(maxsize=None)
def triu_indices(m):
    '''Row and column indices of theta_H entries, in packing order.'''
    rows, cols = np.triu_indices(m)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True, eq=False)
class ThetaVector:
    data: np.ndarray
    m: int
    layout: str = 'full'

    def __post_init__(self):
        data = np.array(self.data, dtype=float).reshape(-1)
        if data.size != theta_size(self.m, self.layout):
            raise RejectedInputError('Parameter vector of length {} does not fit m={} with {} layout'
                                     .format(data.size, self.m, self.layout))
        object.__setattr__(self, 'data', data)

    @classmethod
    def from_data(cls, data, layout='full'):
        data = np.asarray(data, dtype=float).reshape(-1)
        return cls(data, dim_from_theta_size(data.size, layout), layout)

    @property
    def theta_H(self):
        return self.data[:h_size(self.m, self.layout)]

    @property
    def theta_x(self):
        return self.data[h_size(self.m, self.layout):]

    def with_H(self, theta_H):
        return ThetaVector(np.concatenate([theta_H, self.theta_x]), self.m, self.layout)


@dataclass(frozen=True, eq=False)
class PsiVector:
    data: np.ndarray
    layout: str = 'full'


def pack_theta(H, x, layout='full'):
    H = np.asarray(H, dtype=float)
    x = np.asarray(x, dtype=float)
    m = H.shape[0]
    if H.shape != (m, m) or x.shape != (m,):
        raise RejectedInputError('Incompatible shapes H {} and x {}'.format(H.shape, x.shape))
    if not np.array_equal(H, H.T):
        raise RejectedInputError('Hessian must be symmetric')
    check_layout(layout)
    if layout == 'full':
        rows, cols = triu_indices(m)
        theta_H = H[rows, cols]
    else:
        if np.any(H[~np.eye(m, dtype=bool)] != 0):
            raise RejectedInputError('Reduced layout requires a diagonal Hessian, got {}'.format(H.tolist()))
        theta_H = np.diag(H).copy()
    return ThetaVector(np.concatenate([theta_H, H @ x]), m, layout)


def psi_rows(ys, layout='full'):
    '''
    Regressor for one position (m,) or a batch (n, m): -1/2 y_i^2 on the diagonal entries,
    -y_i y_j on the off-diagonal entries, then y itself.
    '''
    ys = np.asarray(ys, dtype=float)
    check_layout(layout)
    m = ys.shape[-1]
    if layout == 'full':
        rows, cols = triu_indices(m)
        quad = ys[..., rows] * ys[..., cols]
        quad = np.where(rows == cols, -0.5 * quad, -quad)
    else:
        quad = -0.5 * ys * ys
    return np.concatenate([quad, ys], axis=-1)


def build_psi(y, layout='full'):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise RejectedInputError('Position must be a vector, got shape {}'.format(y.shape))
    return PsiVector(psi_rows(y, layout), layout)


def unpack_H(theta_H, layout='full', m=None):
    '''
    Symmetric matrix for a Hessian block. Also accepts a batch (n, k) and returns (n, m, m).
    '''
    theta_H = np.asarray(theta_H, dtype=float)
    k = theta_H.shape[-1]
    check_layout(layout)
    if layout == 'reduced':
        if m is not None and m != k:
            raise RejectedInputError('Reduced Hessian block of length {} does not fit m={}'.format(k, m))
        out = np.zeros(theta_H.shape[:-1] + (k, k))
        idx = np.arange(k)
        out[..., idx, idx] = theta_H
        return out
    n = int(round((np.sqrt(8 * k + 1) - 1) / 2))
    if n * (n + 1) // 2 != k or (m is not None and n != m):
        raise RejectedInputError('Hessian block of length {} does not fit m={}'.format(k, m if m else '?'))
    rows, cols = triu_indices(n)
    out = np.zeros(theta_H.shape[:-1] + (n, n))
    out[..., rows, cols] = theta_H
    out[..., cols, rows] = theta_H
    return out


def estimate_x(theta):
    '''
    Extremum estimate from x_hat = H_hat^-1 theta_x, by a pivoted linear solve.
    '''
    H_hat = unpack_H(theta.theta_H, theta.layout, theta.m)
    if not np.all(np.isfinite(H_hat)) or not np.all(np.isfinite(theta.theta_x)):
        raise NumericalError('Non-finite Hessian estimate', matrix=H_hat)
    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(H_hat, theta.theta_x, assume_a='gen')
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
            raise NumericalError('Singular Hessian estimate: {}'.format(e), matrix=H_hat) from e
