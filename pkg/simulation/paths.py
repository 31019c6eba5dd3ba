from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from utils.errors import RejectedInputError


@dataclass(frozen=True)
class SinusoidTerm:
    amplitude: float
    frequency: float
    phase: float = 0.0


@dataclass(frozen=True)
class AxisPath:
    offset: float = 0.0
    terms: Tuple[SinusoidTerm, ...] = field(default_factory=tuple)


@dataclass(frozen=True, eq=False)
class SinusoidPath:
    '''
    Closed-form path p(t) in R^m. Every axis is an offset plus a sum of sinusoids
    amplitude * sin(frequency * t + phase). Used both for the agent trajectory y(t)
    and for the extremum location x(t); a path without terms is constant.
    '''
    axes: Tuple[AxisPath, ...]

    def __post_init__(self):
        if len(self.axes) < 1:
            raise RejectedInputError('A path needs at least one axis')
        params = [a.offset for a in self.axes]
        params += [v for a in self.axes for s in a.terms for v in (s.amplitude, s.frequency, s.phase)]
        if not np.all(np.isfinite(params)):
            raise RejectedInputError('Path parameters must be finite: {}'.format(params))

    @classmethod
    def constant(cls, point):
        return cls(tuple(AxisPath(offset=float(p)) for p in point))

    @property
    def m(self):
        return len(self.axes)

    @property
    def is_constant(self):
        return all(s.amplitude == 0.0 or s.frequency == 0.0 for a in self.axes for s in a.terms)

    def _evaluate(self, t, order):
        # order-th time derivative; t may be a scalar or a 1-d array
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (self.m,))
        for i, axis in enumerate(self.axes):
            acc = np.full(t.shape, axis.offset if order == 0 else 0.0)
            for s in axis.terms:
                arg = s.frequency * t + s.phase
                if order == 0:
                    acc = acc + s.amplitude * np.sin(arg)
                elif order == 1:
                    acc = acc + s.amplitude * s.frequency * np.cos(arg)
                else:
                    acc = acc - s.amplitude * s.frequency ** 2 * np.sin(arg)
            out[..., i] = acc
        return out

    def value(self, t):
        return self._evaluate(t, 0)

    def derivative(self, t):
        return self._evaluate(t, 1)

    def second_derivative(self, t):
        return self._evaluate(t, 2)

    def bounds(self):
        '''
        Analytic bounds (sup|p|, sup|p'|, sup|p''|) in the Euclidean norm, built from
        per-axis sums of |A|, |A w| and |A w^2|.
        '''
        b0 = [abs(a.offset) + sum(abs(s.amplitude) for s in a.terms) for a in self.axes]
        b1 = [sum(abs(s.amplitude * s.frequency) for s in a.terms) for a in self.axes]
        b2 = [sum(abs(s.amplitude) * s.frequency ** 2 for s in a.terms) for a in self.axes]
        return float(np.linalg.norm(b0)), float(np.linalg.norm(b1)), float(np.linalg.norm(b2))

    def drift_bound(self):
        return self.bounds()[1]

    def scaled(self, factor):
        '''Same path with every sinusoid amplitude multiplied by factor.'''
        return SinusoidPath(tuple(
            AxisPath(a.offset, tuple(SinusoidTerm(s.amplitude * factor, s.frequency, s.phase) for s in a.terms))
            for a in self.axes))

    def to_dict(self):
        return [{'offset': a.offset,
                 'terms': [{'amplitude': s.amplitude, 'frequency': s.frequency, 'phase': s.phase} for s in a.terms]}
                for a in self.axes]

    @classmethod
    def from_dict(cls, axes):
        return cls(tuple(
            AxisPath(float(a['offset']),
                     tuple(SinusoidTerm(float(s['amplitude']), float(s['frequency']), float(s['phase']))
                           for s in a['terms']))
            for a in axes))
