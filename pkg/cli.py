import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from estimation.pe import PEReport
from signal_field.field import eval_field
from simulation.config import scenario_from_container, scenario_to_dict
from simulation.metrics import error_metrics
from simulation.scenarios import BUILTIN_SCENARIOS, builtin_scenario, pe_report, run_scenario
from utils.errors import ConfigError, LocalizationError, NumericalError, RejectedInputError
from utils.sweep_utils import run_many
from utils.utils import FLOAT_FORMAT, ensure_dir, save_json, save_trace_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3
MESH_POINTS = 41


@dataclass
class RunArtifacts:
    trace: Optional[Path]
    summary: Optional[Path]
    pe: Optional[Path]
    panels: Optional[Path] = None
    fmesh: Optional[Path] = None
    exit_status: int = EXIT_OK


def parse_config(source):
    '''
    Scenario configuration from a JSON file path or inline JSON text. Unknown keys are
    rejected and omitted optional fields take their defaults.
    '''
    text = str(source)
    if not text.lstrip().startswith('{'):
        text = Path(source).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('Malformed JSON: {}'.format(e.msg), path='line {} column {}'.format(e.lineno, e.colno)) \
            from e
    if not isinstance(doc, dict):
        raise ConfigError('Top level of a scenario document must be an object')
    return scenario_from_container(doc)


def _panel_frame(trace, stride):
    config = trace.config
    m = config.m
    rows = slice(None, None, max(1, stride))
    data = {'t': trace.t[rows]}
    for i in range(m):
        for j in range(i, m):
            data['H_{}{}'.format(i + 1, j + 1)] = np.full(trace.t[rows].size, config.field.H[i, j])
            data['Hhat_{}{}'.format(i + 1, j + 1)] = trace.H_hat[rows, i, j]
    for i in range(m):
        data['x_{}'.format(i + 1)] = trace.x_true[rows, i]
        data['xhat_{}'.format(i + 1)] = trace.x_hat[rows, i]
    return pd.DataFrame(data)


def _mesh_frame(trace):
    # field over the agent's bounding box, true and rebuilt from the final estimates
    config = trace.config
    lo, hi = trace.y.min(axis=0), trace.y.max(axis=0)
    pad = 0.1 * (hi - lo) + 1e-9
    g1, g2 = np.meshgrid(np.linspace(lo[0] - pad[0], hi[0] + pad[0], MESH_POINTS),
                         np.linspace(lo[1] - pad[1], hi[1] + pad[1], MESH_POINTS), indexing='ij')
    ys = np.stack([g1.ravel(), g2.ravel()], axis=1)
    t_end = trace.t[-1]
    F_true = eval_field(config.field, ys, np.full(ys.shape[0], t_end))
    d = ys - trace.x_hat[-1]
    F_est = config.field.c1 - 0.5 * np.einsum('ni,ij,nj->n', d, trace.H_hat[-1], d)
    return pd.DataFrame({'y_1': ys[:, 0], 'y_2': ys[:, 1], 'F_true': F_true, 'F_est': F_est})


def execute(config, out_dir, full_trace=False, panels=True, panel_stride=100):
    '''Run one scenario and write its artifacts into out_dir.'''
    out_dir = Path(out_dir)
    ensure_dir(out_dir)
    trace = run_scenario(config)
    metrics = error_metrics(trace)
    try:
        pe = pe_report(trace)
    except RejectedInputError as e:
        logger.warning('No persistent excitation report for %s: %s', config.name, e)
        pe = PEReport(T=config.metrics.pe_window, stride=config.metrics.pe_stride or config.metrics.pe_window / 2)

    artifacts = RunArtifacts(out_dir / 'trace.csv', out_dir / 'summary.json', out_dir / 'pe.json')
    save_trace_csv(artifacts.trace, trace, full_trace=full_trace)
    agent_bounds = config.agent.bounds()
    extremum_bounds = config.field.extremum.bounds()
    save_json(artifacts.summary, {
        'config': scenario_to_dict(config),
        'metrics': metrics.to_dict(),
        'pe': {'T': pe.T, 'stride': pe.stride, 'alpha1': pe.alpha1, 'alpha2': pe.alpha2},
        'path_bounds': {'agent': {'sup_y': agent_bounds[0], 'sup_dy': agent_bounds[1], 'sup_ddy': agent_bounds[2]},
                        'extremum': {'sup_x': extremum_bounds[0], 'sup_dx': extremum_bounds[1],
                                     'epsilon': extremum_bounds[1]}},
        'samples': len(trace),
        'full_trace': full_trace,
    })
    save_json(artifacts.pe, pe.to_dict())
    if panels:
        artifacts.panels = out_dir / 'panels.csv'
        _panel_frame(trace, panel_stride).to_csv(artifacts.panels, index=False, float_format=FLOAT_FORMAT,
                                                 lineterminator='\n')
        if config.m == 2:
            artifacts.fmesh = out_dir / 'fmesh.csv'
            _mesh_frame(trace).to_csv(artifacts.fmesh, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return artifacts, metrics, pe


def summary_line(name, metrics, pe):
    rate = 'n/a' if metrics.fit_failed else '{:.4g}'.format(metrics.fit_rate)
    return ('{}: final |xhat-x| = {:.3e}, final |Hhat-H|_F = {:.3e}, fitted rate = {}, alpha1 = {:.3e}'
            .format(name, metrics.final_err_x, metrics.final_err_H, rate, pe.alpha1))


def exit_status_for(error):
    if isinstance(error, (ConfigError, RejectedInputError)):
        return EXIT_CONFIG
    if isinstance(error, NumericalError):
        return EXIT_DIVERGENCE
    if isinstance(error, OSError):
        return EXIT_IO
    raise error


def _run_job(job):
    config, out_dir, full_trace = job
    try:
        artifacts, metrics, pe = execute(config, out_dir, full_trace=full_trace)
        return EXIT_OK, summary_line(config.name, metrics, pe)
    except (LocalizationError, OSError) as e:
        logger.error('%s failed: %s', config.name, e)
        return exit_status_for(e), '{}: failed ({})'.format(config.name, e)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, path='arguments')


def build_parser():
    parser = _ArgumentParser(description='Adaptive Hessian estimation and extremum localization scenarios.')
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--config', help='Scenario JSON file')
    source.add_argument('--scenario', choices=BUILTIN_SCENARIOS + ('all',), help='Built-in scenario')
    parser.add_argument('--out', default='.', help='Output directory')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--dt', type=float)
    parser.add_argument('--t-end', type=float)
    parser.add_argument('--full-trace', action='store_true', help='Include the regressor columns in the trace')
    parser.add_argument('--pe-window', type=float)
    parser.add_argument('--layout', choices=('full', 'reduced'))
    parser.add_argument('--workers', type=int, help='Processes used for --scenario all')
    return parser


def _apply_overrides(config, args):
    config = config.with_overrides(seed=args.seed, dt=args.dt, t_end=args.t_end, layout=args.layout)
    if args.pe_window is not None:
        if not args.pe_window > 0:
            raise ConfigError('PE window must be positive', path='metrics.pe_window')
        config = replace(config, metrics=replace(config.metrics, pe_window=args.pe_window))
    return config


def run_cli(argv=None):
    '''
    Batch entry point. Returns 0 on success, 1 for configuration errors, 2 for divergence
    and 3 for I/O errors.
    '''
    try:
        args = build_parser().parse_args(argv)
        if args.config is not None:
            jobs = [(_apply_overrides(parse_config(args.config), args), args.out)]
        elif args.scenario == 'all':
            jobs = [(_apply_overrides(builtin_scenario(name), args), os.path.join(args.out, name))
                    for name in BUILTIN_SCENARIOS]
        else:
            jobs = [(_apply_overrides(builtin_scenario(args.scenario), args), args.out)]
    except (LocalizationError, OSError) as e:
        print('error: {}'.format(e), file=sys.stderr)
        return exit_status_for(e)

    results = run_many(_run_job, [(config, out, args.full_trace) for config, out in jobs], workers=args.workers)
    status = EXIT_OK
    for code, line in results:
        print(line)
        status = status or code
    return status


if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO)
    sys.exit(run_cli())
