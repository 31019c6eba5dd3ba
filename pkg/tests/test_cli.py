import json

import pytest

from cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, parse_config, run_cli
from simulation.config import scenario_to_dict
from simulation.scenarios import builtin_scenario
from utils.errors import ConfigError
from utils.utils import load_json, load_trace_csv


def test_parse_inline_json(field_doc):
    config = parse_config(json.dumps(field_doc))
    assert config.dt == 1e-3
    assert config.field.c1 == 3.0


def test_parse_file(field_doc, tmp_path):
    path = tmp_path / 'scenario.json'
    path.write_text(json.dumps(field_doc))
    assert scenario_to_dict(parse_config(path)) == scenario_to_dict(parse_config(json.dumps(field_doc)))


def test_parse_builtin_round_trip():
    config = builtin_scenario('scenario1')
    assert scenario_to_dict(parse_config(json.dumps(scenario_to_dict(config)))) == scenario_to_dict(config)


def test_parse_malformed_json():
    with pytest.raises(ConfigError, match='line 1'):
        parse_config('{"m": 2,')


def test_parse_rejects_assumption1_violation(field_doc):
    field_doc['field']['hessian'] = [[1.0, 1.0], [1.0, 1.0]]
    with pytest.raises(ConfigError, match='Assumption 1'):
        parse_config(json.dumps(field_doc))


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / 'run'
    assert run_cli(['--scenario', 'scenario1', '--out', str(out), '--t-end', '30']) == EXIT_OK
    for name in ('trace.csv', 'summary.json', 'pe.json', 'panels.csv', 'fmesh.csv'):
        assert (out / name).exists()
    summary = load_json(out / 'summary.json')
    assert summary['config']['dt'] == 1e-3
    assert summary['config']['t_end'] == 30.0
    assert summary['pe']['alpha1'] > 0
    assert len(load_trace_csv(out / 'trace.csv')) == 30001
    assert len(load_trace_csv(out / 'fmesh.csv')) == 41 * 41
    assert capsys.readouterr().out.startswith('scenario1: final |xhat-x|')


def test_full_trace_flag(tmp_path):
    assert run_cli(['--scenario', 'scenario1', '--out', str(tmp_path), '--t-end', '12', '--full-trace']) == EXIT_OK
    assert 'phi_5' in load_trace_csv(tmp_path / 'trace.csv').columns


def test_missing_config_file(tmp_path):
    assert run_cli(['--config', str(tmp_path / 'missing.json'), '--out', str(tmp_path)]) == EXIT_IO


def test_invalid_config_exit_status(field_doc, tmp_path):
    field_doc['field']['hessian'] = [[1.0, 1.0], [1.0, 1.0]]
    assert run_cli(['--config', json.dumps(field_doc), '--out', str(tmp_path)]) == EXIT_CONFIG


def test_bad_arguments_exit_status():
    assert run_cli(['--scenario', 'scenario9']) == EXIT_CONFIG


def test_same_seed_gives_identical_bytes(tmp_path):
    args = ['--scenario', 'scenario2', '--seed', '7', '--t-end', '20']
    assert run_cli(args + ['--out', str(tmp_path / 'a')]) == EXIT_OK
    assert run_cli(args + ['--out', str(tmp_path / 'b')]) == EXIT_OK
    assert (tmp_path / 'a' / 'trace.csv').read_bytes() == (tmp_path / 'b' / 'trace.csv').read_bytes()


def test_different_seeds_differ(tmp_path):
    base = ['--scenario', 'scenario2', '--t-end', '2']
    run_cli(base + ['--seed', '1', '--out', str(tmp_path / 'a')])
    run_cli(base + ['--seed', '2', '--out', str(tmp_path / 'b')])
    assert (tmp_path / 'a' / 'trace.csv').read_bytes() != (tmp_path / 'b' / 'trace.csv').read_bytes()


@pytest.mark.slow
def test_all_scenarios(tmp_path, capsys):
    assert run_cli(['--scenario', 'all', '--out', str(tmp_path), '--t-end', '20', '--workers', '2']) == EXIT_OK
    for name in ('scenario1', 'scenario2', 'scenario3', 'scenario4'):
        assert (tmp_path / name / 'summary.json').exists()
    assert len(capsys.readouterr().out.splitlines()) == 4
