import logging

import hydra
from omegaconf import DictConfig, OmegaConf

from cli import execute, summary_line
from simulation.config import scenario_from_container, scenario_to_dict
from utils.utils import init_experiment, log_run_metrics, update_cfg

logging.basicConfig(level=logging.INFO)
logging.getLogger('numexpr').setLevel(logging.WARNING)


@hydra.main(config_path="cfg", config_name="config", version_base=None)
def main(cfg: DictConfig) -> None:
    config = scenario_from_container(OmegaConf.to_container(cfg.scenario, resolve=True))

    tags = [config.layout, 'stationary' if config.is_stationary else 'drift']
    if config.noise.active:
        tags.append('noise')
    if not config.projection.enabled:
        tags.append('no-projection')

    update_cfg(cfg, 'resolved', scenario_to_dict(config))
    experiment = init_experiment(cfg.logging, {**OmegaConf.to_container(cfg.resolved), **dict(cfg.run)}, tags)
    try:
        _, metrics, pe = execute(config, cfg.run.out, full_trace=cfg.run.full_trace, panels=cfg.run.panels,
                                 panel_stride=cfg.run.panel_stride)
        log_run_metrics(experiment, config.name, metrics.to_dict(), pe)
    finally:
        if experiment is not None:
            experiment.stop()
    print(summary_line(config.name, metrics, pe))


if __name__ == "__main__":
    main()
