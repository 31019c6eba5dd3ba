import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from omegaconf import MISSING, DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from estimation.estimator import ProjectionConfig
from estimation.pe import DEFAULT_WINDOW
from signal_field.field import FieldParams, NoiseSpec
from signal_field.parametrization import LAYOUTS, theta_size
from simulation.paths import SinusoidPath
from utils.errors import ConfigError, LocalizationError

DEFAULT_DT = 1e-3
DEFAULT_T_END_STATIONARY = 300.0
DEFAULT_T_END_DRIFT = 2000.0
DEFAULT_TRANSIENT = 100.0


# Structured schema. Merging a document into it rejects unknown keys and wrong types.

@dataclass
class PathTermConf:
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0


@dataclass
class AxisConf:
    offset: float = 0.0
    terms: List[PathTermConf] = dataclasses.field(default_factory=list)


@dataclass
class FieldConf:
    c1: float = MISSING
    hessian: List[List[float]] = MISSING
    extremum: List[AxisConf] = MISSING


@dataclass
class NoiseConf:
    kind: str = 'none'
    variance: float = 0.0


@dataclass
class ProjectionConf:
    enabled: bool = True
    eps_diag: float = 0.01
    delta: float = 0.05


@dataclass
class MetricsConf:
    transient: float = DEFAULT_TRANSIENT
    fit_start: float = 0.0
    fit_end: Optional[float] = DEFAULT_TRANSIENT
    pe_window: float = DEFAULT_WINDOW
    pe_stride: Optional[float] = None


@dataclass
class ScenarioConf:
    name: str = 'custom'
    m: int = MISSING
    field: FieldConf = MISSING
    agent: List[AxisConf] = MISSING
    noise: NoiseConf = dataclasses.field(default_factory=NoiseConf)
    a: float = 0.5
    gamma: float = 1.0
    projection: ProjectionConf = dataclasses.field(default_factory=ProjectionConf)
    layout: str = 'full'
    dt: float = DEFAULT_DT
    t_end: Optional[float] = None
    seed: int = 0
    theta0: Optional[List[float]] = None
    metrics: MetricsConf = dataclasses.field(default_factory=MetricsConf)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    '''Fully resolved and validated simulation scenario.'''
    m: int
    field: FieldParams
    agent: SinusoidPath
    noise: NoiseSpec
    a: float
    gamma: float
    projection: ProjectionConfig
    layout: str
    dt: float
    t_end: float
    seed: int
    theta0: Optional[Tuple[float, ...]] = None
    name: str = 'custom'
    metrics: MetricsConf = dataclasses.field(default_factory=MetricsConf)

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    @property
    def is_stationary(self):
        return self.field.extremum.is_constant

    def with_overrides(self, **kwargs):
        '''Copy with top-level fields replaced, validated through the schema again.'''
        d = scenario_to_dict(self)
        for key, value in kwargs.items():
            if value is None:
                continue
            if key not in d:
                raise ConfigError('Unknown field', path=key)
            d[key] = value
        return scenario_from_container(d)


def _check(cond, message, path):
    if not cond:
        raise ConfigError(message, path=path)


def merge_schema(doc, path=''):
    '''Merge a plain dict or DictConfig into the scenario schema.'''
    try:
        return OmegaConf.merge(OmegaConf.structured(ScenarioConf), doc)
    except OmegaConfBaseException as e:
        key = getattr(e, 'full_key', None) or path
        raise ConfigError(getattr(e, 'msg', None) or str(e), path=key) from e


def scenario_from_container(doc):
    '''Validate a scenario document (dict or DictConfig) and build the ScenarioConfig.'''
    cfg = merge_schema(doc)
    missing = [k for k in ('m', 'field', 'agent') if OmegaConf.is_missing(cfg, k)]
    if missing:
        raise ConfigError('Missing mandatory value', path=missing[0])
    for k in ('c1', 'hessian', 'extremum'):
        _check(not OmegaConf.is_missing(cfg.field, k), 'Missing mandatory value', 'field.' + k)
    return scenario_from_cfg(cfg)


def scenario_from_cfg(cfg: DictConfig) -> ScenarioConfig:
    m = cfg.m
    _check(m >= 1, 'Dimension must be at least 1, got {}'.format(m), 'm')
    H = np.array(OmegaConf.to_container(cfg.field.hessian), dtype=float)
    _check(H.shape == (m, m), 'Hessian must be {0}x{0}, got shape {1}'.format(m, H.shape), 'field.hessian')
    _check(len(cfg.field.extremum) == m, 'Extremum path needs {} axes'.format(m), 'field.extremum')
    _check(len(cfg.agent) == m, 'Agent path needs {} axes'.format(m), 'agent')
    _check(cfg.layout in LAYOUTS, 'Unknown layout {!r}'.format(cfg.layout), 'layout')
    _check(cfg.dt > 0, 'Step size must be positive', 'dt')
    _check(cfg.a > 0, 'Filter pole must be positive', 'a')
    _check(cfg.gamma > 0, 'Adaptation gain must be positive', 'gamma')
    _check(cfg.t_end is None or cfg.t_end > 0, 'Horizon must be positive', 't_end')
    _check(cfg.seed >= 0, 'Seed must be nonnegative', 'seed')
    if cfg.layout == 'reduced':
        _check(np.count_nonzero(H - np.diag(np.diag(H))) == 0,
               'Reduced layout requires a diagonal Hessian', 'field.hessian')

    def build(path, fn, *args):
        try:
            return fn(*args)
        except LocalizationError as e:
            raise ConfigError(str(e), path=path) from e

    extremum = build('field.extremum', SinusoidPath.from_dict, OmegaConf.to_container(cfg.field.extremum))
    agent = build('agent', SinusoidPath.from_dict, OmegaConf.to_container(cfg.agent))
    params = build('field.hessian', FieldParams, cfg.field.c1, H, extremum)
    noise = build('noise', NoiseSpec, cfg.noise.variance, int(cfg.seed), cfg.noise.kind)
    projection = build('projection', ProjectionConfig, cfg.projection.eps_diag, cfg.projection.delta,
                       cfg.projection.enabled)
    theta0 = None
    if cfg.theta0 is not None:
        theta0 = tuple(float(v) for v in cfg.theta0)
        _check(len(theta0) == theta_size(m, cfg.layout),
               'Initial estimate needs {} entries for the {} layout'.format(theta_size(m, cfg.layout), cfg.layout),
               'theta0')
        _check(np.all(np.isfinite(theta0)), 'Initial estimate must be finite', 'theta0')
    t_end = cfg.t_end
    if t_end is None:
        t_end = DEFAULT_T_END_STATIONARY if extremum.is_constant else DEFAULT_T_END_DRIFT
    _check(int(round(t_end / cfg.dt)) >= 1, 'Horizon shorter than one step', 't_end')
    mc = cfg.metrics
    _check(mc.pe_window > 0, 'PE window must be positive', 'metrics.pe_window')
    _check(mc.pe_stride is None or mc.pe_stride > 0, 'PE stride must be positive', 'metrics.pe_stride')
    metrics = MetricsConf(mc.transient, mc.fit_start, mc.fit_end, mc.pe_window, mc.pe_stride)
    return ScenarioConfig(m=m, field=params, agent=agent, noise=noise, a=float(cfg.a), gamma=float(cfg.gamma),
                          projection=projection, layout=cfg.layout, dt=float(cfg.dt), t_end=float(t_end),
                          seed=int(cfg.seed), theta0=theta0, name=cfg.name, metrics=metrics)


def scenario_to_dict(config):
    '''Plain, JSON-serializable form of a resolved config, defaults included.'''
    return {
        'name': config.name,
        'm': config.m,
        'field': {'c1': config.field.c1,
                  'hessian': config.field.H.tolist(),
                  'extremum': config.field.extremum.to_dict()},
        'agent': config.agent.to_dict(),
        'noise': {'kind': config.noise.kind, 'variance': config.noise.variance},
        'a': config.a,
        'gamma': config.gamma,
        'projection': {'enabled': config.projection.enabled, 'eps_diag': config.projection.eps_diag,
                       'delta': config.projection.delta},
        'layout': config.layout,
        'dt': config.dt,
        't_end': config.t_end,
        'seed': config.seed,
        'theta0': None if config.theta0 is None else list(config.theta0),
        'metrics': dataclasses.asdict(config.metrics),
    }
