import numpy as np


class LocalizationError(Exception):
    """Base class for all errors raised by the localization code."""


class RejectedInputError(LocalizationError, ValueError):
    pass


class NumericalError(LocalizationError, ArithmeticError):
    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class DivergenceError(NumericalError):
    def __init__(self, message, t):
        super().__init__('{} (t={})'.format(message, t))
        self.t = t


class ConfigError(LocalizationError, ValueError):
    def __init__(self, message, path=''):
        if path:
            message = '{}: {}'.format(path, message)
        super().__init__(message)
        self.path = path


def require_finite(*arrays, what='input'):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalError('Non-finite {}: {}'.format(what, a))
