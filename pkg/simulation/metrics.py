from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

# Parameter errors below this are at round-off level and are left out of the rate fit
FIT_FLOOR = 1e-12
MIN_FIT_SAMPLES = 10


@dataclass
class MetricsSummary:
    final_err_x: float
    rms_err_x: float
    sup_err_x: float
    final_err_H: float
    rms_err_H: float
    sup_err_H: float
    transient: float
    fit_rate: Optional[float]
    fit_r2: Optional[float]
    fit_failed: bool
    fit_window: tuple
    residual_max_deviation: Optional[float]
    drift_bound: float

    def to_dict(self):
        d = asdict(self)
        d['fit_window'] = list(self.fit_window)
        return d


def _nan_to_inf(values):
    # samples without an invertible estimate count as unbounded error
    return np.where(np.isnan(values), np.inf, values)


def fit_decay_rate(t, err, floor=FIT_FLOOR):
    '''
    Least squares fit of log err = b - rate * t. Returns (rate, r2, failed); the fit fails
    on too few usable samples or when the data do not decay.
    '''
    mask = np.isfinite(err) & (err > floor)
    if np.count_nonzero(mask) < MIN_FIT_SAMPLES:
        return None, None, True
    X = t[mask].reshape(-1, 1)
    log_err = np.log(err[mask])
    reg = LinearRegression().fit(X, log_err)
    rate = float(-reg.coef_[0])
    r2 = float(r2_score(log_err, reg.predict(X)))
    return rate, r2, not rate > 0


def residual_reference(config, t):
    '''(c1 - 1/2 x^T H x) exp(-a t): the exact filtered model residual for a fixed extremum.'''
    x = config.field.extremum_at(0.0)
    c = config.field.c1 - 0.5 * x @ config.field.H @ x
    return c * np.exp(-config.a * t)


def error_metrics(trace, transient=None, fit_window=None):
    '''
    Final, RMS and supremum (after the transient) localization and Hessian errors, the fitted
    exponential decay rate of the parameter error, and the deviation of the filtered model
    residual from its closed form on stationary noise-free runs.
    '''
    config = trace.config
    if transient is None:
        transient = config.metrics.transient if config is not None else 0.0
    if fit_window is None:
        if config is not None:
            fit_window = (config.metrics.fit_start, config.metrics.fit_end)
        else:
            fit_window = (trace.t[0], None)
    fit_start, fit_end = fit_window
    fit_end = trace.t[-1] if fit_end is None else fit_end

    after = trace.t >= transient
    if not np.any(after):
        after = np.zeros_like(trace.t, dtype=bool)
        after[-1] = True
    err_x = _nan_to_inf(trace.err_x)
    err_H = trace.err_H

    in_fit = (trace.t >= fit_start) & (trace.t <= fit_end)
    rate, r2, failed = fit_decay_rate(trace.t[in_fit], trace.err_theta[in_fit])

    deviation = None
    drift = 0.0
    if config is not None:
        drift = config.field.extremum.drift_bound()
        if config.is_stationary and not config.noise.active:
            deviation = float(np.max(np.abs(trace.residual - residual_reference(config, trace.t))))

    return MetricsSummary(
        final_err_x=float(err_x[-1]),
        rms_err_x=float(np.sqrt(np.mean(err_x[after] ** 2))),
        sup_err_x=float(np.max(err_x[after])),
        final_err_H=float(err_H[-1]),
        rms_err_H=float(np.sqrt(np.mean(err_H[after] ** 2))),
        sup_err_H=float(np.max(err_H[after])),
        transient=float(transient),
        fit_rate=rate,
        fit_r2=r2,
        fit_failed=failed,
        fit_window=(float(fit_start), float(fit_end)),
        residual_max_deviation=deviation,
        drift_bound=float(drift))
