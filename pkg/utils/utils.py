import json
import math
import os

import numpy as np
import pandas as pd
from omegaconf import OmegaConf
from omegaconf.omegaconf import open_dict

# 17 significant digits re-parse to the identical double
FLOAT_FORMAT = '%.17g'


def trace_columns(m, k, full_trace):
    columns = ['t'] + ['y_{}'.format(i + 1) for i in range(m)] + ['F_true', 'F_meas', 'z']
    if full_trace:
        columns += ['phi_{}'.format(i + 1) for i in range(k)]
    columns += ['thetahat_{}'.format(i + 1) for i in range(k)]
    columns += ['Hhat_{}{}'.format(i, j) for i in range(1, m + 1) for j in range(i, m + 1)]
    columns += ['xhat_{}'.format(i + 1) for i in range(m)]
    columns += ['err_x', 'err_H', 'residual', 'err_theta']
    return columns


def trace_frame(trace, full_trace=False):
    m = trace.y.shape[1]
    k = trace.theta_hat.shape[1]
    H_packed = trace.H_hat_packed
    blocks = [trace.t[:, None], trace.y, trace.F_true[:, None], trace.F_meas[:, None], trace.z[:, None]]
    if full_trace:
        blocks.append(trace.phi)
    blocks += [trace.theta_hat, H_packed, trace.x_hat,
               np.stack([trace.err_x, trace.err_H, trace.residual, trace.err_theta], axis=1)]
    return pd.DataFrame(np.hstack(blocks), columns=trace_columns(m, k, full_trace))


def save_trace_csv(path, trace, full_trace=False):
    trace_frame(trace, full_trace).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def load_trace_csv(path):
    return pd.read_csv(path, float_precision='round_trip')


def _json_ready(value):
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def save_json(path, data):
    with open(path, 'w') as f:
        json.dump(_json_ready(data), f, indent=2, allow_nan=False)
        f.write('\n')


def load_json(path):
    with open(path, 'r') as f:
        return json.load(f)


def ensure_dir(path):
    if not os.path.exists(path):
        os.makedirs(path)


def update_cfg(cfg, key, val):
    OmegaConf.set_struct(cfg, True)
    with open_dict(cfg):
        setattr(cfg, key, val)


def init_experiment(logging_cfg, params, tags):
    '''Neptune run for experiment tracking, or None when tracking is disabled.'''
    if not logging_cfg.logging_enabled:
        return None
    import neptune
    experiment = neptune.init_run(project=logging_cfg.project_name, name=logging_cfg.experiment_name, tags=tags)
    experiment['parameters'] = _json_ready(params)
    return experiment


def log_run_metrics(experiment, name, metrics, pe):
    if experiment is None:
        return
    prefix = '{}/'.format(name)
    for key, value in _json_ready(metrics).items():
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            experiment[prefix + key] = value
    experiment[prefix + 'alpha1'] = pe.alpha1
    experiment[prefix + 'alpha2'] = pe.alpha2


def format_time(time_as_seconds):
    minutes, seconds = divmod(int(round(time_as_seconds)), 60)
    hours, minutes = divmod(minutes, 60)
    days, hours = divmod(hours, 24)
    return '{} days, {} hours, {} minutes and {} seconds'.format(days, hours, minutes, seconds)
