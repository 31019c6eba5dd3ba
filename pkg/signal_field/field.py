from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from simulation.paths import SinusoidPath
from utils.errors import RejectedInputError

NOISE_KINDS = ('none', 'gaussian-white')
# Noise draws are generated in independent blocks so any step can be looked up directly
NOISE_BLOCK = 4096


def check_assumption1(H):
    '''
    True iff H has a positive diagonal and is strictly diagonally dominant by rows.
    No tolerance is applied.
    '''
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    diag = np.diag(H)
    off_sums = np.abs(H).sum(axis=1) - np.abs(diag)
    return bool(np.all(diag > 0) and np.all(diag > off_sums))


@dataclass(frozen=True, eq=False)
class FieldParams:
    '''
    Ground truth quadratic field F(y, t) = c1 - 1/2 (y - x(t))^T H (y - x(t)).
    '''
    c1: float
    H: np.ndarray
    extremum: SinusoidPath

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
            raise RejectedInputError('Hessian must be a non-empty square matrix, got shape {}'.format(H.shape))
        if not np.array_equal(H, H.T):
            raise RejectedInputError('Hessian must be symmetric: {}'.format(H.tolist()))
        if not check_assumption1(H):
            raise RejectedInputError('Hessian violates Assumption 1 (positive, strictly diagonally dominant '
                                     'diagonal): {}'.format(H.tolist()))
        if self.extremum.m != H.shape[0]:
            raise RejectedInputError('Extremum path has {} axes but the Hessian is {}x{}'
                                     .format(self.extremum.m, *H.shape))
        H.setflags(write=False)
        object.__setattr__(self, 'H', H)
        object.__setattr__(self, 'c1', float(self.c1))

    @property
    def m(self):
        return self.H.shape[0]

    def extremum_at(self, t):
        return self.extremum.value(t)


@dataclass(frozen=True)
class NoiseSpec:
    variance: float = 0.0
    seed: int = 0
    kind: str = 'none'

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise RejectedInputError('Unknown noise kind {!r}, expected one of {}'.format(self.kind, NOISE_KINDS))
        if not self.variance >= 0:
            raise RejectedInputError('Noise variance must be nonnegative, got {}'.format(self.variance))

    @property
    def active(self):
        return self.kind != 'none' and self.variance > 0

    def samples(self, start, count):
        '''Noise samples for steps start, ..., start + count - 1.'''
        if start < 0:
            raise RejectedInputError('Step index must be nonnegative, got {}'.format(start))
        if not self.active:
            return np.zeros(count)
        out = np.empty(count)
        pos = 0
        while pos < count:
            block, offset = divmod(start + pos, NOISE_BLOCK)
            n = min(NOISE_BLOCK - offset, count - pos)
            out[pos:pos + n] = _standard_normal_block(self.seed, block)[offset:offset + n]
            pos += n
        return np.sqrt(self.variance) * out

    def sample(self, step_index):
        return float(self.samples(step_index, 1)[0])


@lru_cache(maxsize=64)
def _standard_normal_block(seed, block):
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),))
    draws = np.random.default_rng(seq).standard_normal(NOISE_BLOCK)
    draws.setflags(write=False)
    return draws


def eval_field(params, y, t):
    '''
    Noise-free field value at position y and time t. y may be a single point of shape (m,)
    or a batch of shape (n, m) with t of shape (n,).
    '''
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (params.m,):
        raise RejectedInputError('Position has shape {}, expected trailing dimension {}'.format(y.shape, params.m))
    d = y - params.extremum_at(t)
    quad = np.einsum('...i,ij,...j->...', d, params.H, d)
    value = params.c1 - 0.5 * quad
    return float(value) if np.ndim(value) == 0 else value


def eval_field_measured(params, y, t, noise, step_index):
    '''
    Field value plus the noise sample held for integration step step_index.
    '''
    return eval_field(params, y, t) + noise.sample(step_index)
