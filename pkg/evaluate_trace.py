import logging
import math
import os

import hydra
from omegaconf import DictConfig

from estimation.pe import pe_bounds
from simulation.config import scenario_from_container
from simulation.metrics import error_metrics
from simulation.scenarios import trace_from_frame
from utils.utils import load_json, load_trace_csv, save_json

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def evaluate_run(run_dir, pe_window=None):
    '''
    Recompute the metrics of a finished run from its trace.csv and summary.json. The PE
    report needs a trace written with the regressor columns.
    '''
    summary = load_json(os.path.join(run_dir, 'summary.json'))
    config = scenario_from_container(summary['config'])
    trace = trace_from_frame(load_trace_csv(os.path.join(run_dir, 'trace.csv')), config)
    metrics = error_metrics(trace)
    pe = None
    if trace.phi is not None:
        T = config.metrics.pe_window if pe_window is None else pe_window
        pe = pe_bounds(trace.t, trace.phi, T, config.metrics.pe_stride)
    else:
        logger.info('%s has no regressor columns, skipping the PE report', run_dir)
    return metrics, pe


@hydra.main(config_path="cfg", config_name="config", version_base=None)
def main(cfg: DictConfig) -> None:
    run_dir = cfg.evaluate.run_dir
    metrics, pe = evaluate_run(run_dir, cfg.evaluate.pe_window)
    stored = load_json(os.path.join(run_dir, 'summary.json'))['metrics']
    for key, value in metrics.to_dict().items():
        if isinstance(value, float) and not math.isfinite(value):
            continue
        if key in stored and stored[key] != value:
            logger.warning('%s: stored %s, recomputed %s', key, stored[key], value)
    result = {'metrics': metrics.to_dict()}
    if pe is not None:
        result['pe'] = pe.to_dict()
    save_json(os.path.join(run_dir, 'evaluation.json'), result)
    print('{}: final |xhat-x| = {:.3e}, final |Hhat-H|_F = {:.3e}'.format(
        run_dir, metrics.final_err_x, metrics.final_err_H))


if __name__ == "__main__":
    main()
