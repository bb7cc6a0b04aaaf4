"""
Tests for the experiment commands, run configuration and the bellga entry point
"""

import json
import math
from configparser import ConfigParser
from types import SimpleNamespace

import pytest

from bellga.__main__ import main
from bellga.chsh import ChshResult
from bellga.common import (
    DEFAULTS, TSIRELSON_BOUND, ConfigError, coerce_option, load_config, to_csv, to_json,
)
from bellga.correlators import CorrelationEstimate
from bellga.experiment import (
    ExperimentConfig, brute_rows, parse_angles, run_experiment, run_record,
)
from bellga.extraction import AuditReport


OPTIMAL = ['--angles', '0,90,45,135']


def run_cli(capsys, *argv):
    main(list(argv))
    return capsys.readouterr()


def run_json(capsys, *argv):
    return json.loads(run_cli(capsys, *argv).out)


class TestRunCommand:
    """Tests for 'bellga run'"""

    def test_sign_model(self, capsys):
        record = run_json(capsys, 'run', '--model', 'sign', *OPTIMAL, '--exact')
        assert record['S'] == -2.0
        assert record['violates_bell'] is False
        assert record['mode'] == 'exact'

    def test_vector_model_reaches_tsirelson(self, capsys):
        record = run_json(capsys, 'run', '--model', 'vector', *OPTIMAL, '--exact')
        assert abs(record['S'] + TSIRELSON_BOUND) <= 1e-12
        assert record['violates_bell'] is True

    def test_bivector_oriented_has_no_residual(self, capsys):
        record = run_json(capsys, 'run', '--model', 'bivector', '--convention', 'oriented', *OPTIMAL, '--exact')
        assert abs(record['S'] + TSIRELSON_BOUND) <= 1e-12
        for entry in record['correlations'].values():
            assert entry['residual_bivector_norm'] <= 1e-12

    def test_bivector_standard_reports_residual(self, capsys):
        record = run_json(capsys, 'run', '--model', 'bivector', '--convention', 'standard', *OPTIMAL, '--exact')
        assert abs(record['S'] + TSIRELSON_BOUND) <= 1e-12
        residuals = [entry['residual_bivector_norm'] for entry in record['correlations'].values()]
        assert all(abs(r - math.sqrt(0.5)) <= 1e-12 for r in residuals)

    def test_record_field_order(self, capsys):
        record = run_json(capsys, 'run', '--model', 'vector', *OPTIMAL, '--exact')
        assert list(record) == [
            'model', 'convention', 'settings', 'correlations', 'S', 'S_stderr',
            'classical_bound', 'tsirelson', 'violates_bell', 'seed', 'mode', 'samples',
        ]
        assert list(record['correlations']) == ['E_ab', "E_ab'", "E_a'b", "E_a'b'"]

    def test_summary_goes_to_stderr(self, capsys):
        captured = run_cli(capsys, 'run', '--model', 'sign', *OPTIMAL, '--exact')
        assert 'CHSH RUN' in captured.err
        assert 'CHSH RUN' not in captured.out

    def test_monte_carlo_output_independent_of_workers(self, capsys):
        args = ['run', '--model', 'bivector', *OPTIMAL, '--samples', '140000', '--seed', '3']
        serial = run_cli(capsys, *args, '--workers', '1').out
        threaded = run_cli(capsys, *args, '--workers', '4').out
        assert serial == threaded
        record = json.loads(serial)
        assert record['mode'] == 'mc'
        assert record['samples'] == 140000
        assert record['seed'] == 3

    def test_csv_output(self, capsys):
        out = run_cli(capsys, 'run', '--model', 'sign', *OPTIMAL, '--exact', '--format', 'csv').out
        lines = out.splitlines()
        assert lines[0] == 'quantity,value,stderr,n'
        assert lines[5].startswith('S,-2.0,')
        assert out.endswith('\n')

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / 'results' / 'run.json'
        captured = run_cli(capsys, 'run', '--model', 'sign', *OPTIMAL, '--exact', '--out', str(target))
        assert json.loads(target.read_text())['S'] == -2.0
        assert 'CHSH RUN' in captured.out

    def test_explicit_directions(self, capsys):
        dirs = ['1', '0', '0', '0', '1', '0', '0', '0', '1', '0', '0', '1']
        record = run_json(capsys, 'run', '--model', 'vector', '--dirs', *dirs, '--exact')
        assert record['settings']['b'] == [0.0, 0.0, 1.0]

    def test_invalid_angles_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(['run', '--angles', '0,90,45'])
        assert exc.value.code == 2
        assert 'Error:' in capsys.readouterr().err

    def test_non_unit_direction_exit_2(self):
        dirs = ['2', '0', '0'] + ['1', '0', '0'] * 3
        with pytest.raises(SystemExit) as exc:
            main(['run', '--dirs', *dirs, '--exact'])
        assert exc.value.code == 2

    def test_zero_samples_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(['run', '--samples', '0'])
        assert exc.value.code == 2

    def test_zero_samples_accepted_in_exact_mode(self, capsys):
        record = run_json(capsys, 'run', '--model', 'sign', *OPTIMAL, '--exact', '--samples', '0')
        assert record['S'] == -2.0
        assert record['mode'] == 'exact'

    def test_unknown_model_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(['run', '--model', 'quantum'])
        assert exc.value.code == 2

    def test_out_of_range_s_exit_3(self, mocker):
        estimate = CorrelationEstimate(mean=1.0)
        mocker.patch(
            'bellga.experiment.chsh_value',
            return_value=ChshResult((estimate,) * 4, s=5.0, s_stderr=0.0, violates_bell=True, exact=True),
        )
        with pytest.raises(SystemExit) as exc:
            main(['run', *OPTIMAL, '--exact'])
        assert exc.value.code == 3


class TestOtherCommands:
    """Tests for 'bellga scan', 'audit', 'brute' and 'compare'"""

    def test_scan_csv(self, capsys):
        out = run_cli(capsys, 'scan', '--model', 'vector', '--resolution', '19', '--exact', '--format', 'csv').out
        lines = out.splitlines()
        assert lines[0] == 'theta_deg,E_mean,E_exact,stderr,n'
        assert len(lines) == 20
        assert lines[1].startswith('0.0,-1.0,-1.0,')

    def test_scan_json(self, capsys):
        record = run_json(capsys, 'scan', '--model', 'bivector', '--resolution', '5', '--exact')
        assert [row['theta_deg'] for row in record['rows']] == [0.0, 45.0, 90.0, 135.0, 180.0]
        for row in record['rows']:
            assert abs(row['E_mean'] - row['E_exact']) <= 1e-12

    def test_audit(self, capsys):
        record = run_json(capsys, 'audit', '--grid', '5', '--axes', '3', '--tables', '20', '--seed', '2')
        assert record['within_bound'] is True
        assert record['global_max_abs_S'] <= 2.0
        assert len(record['maps']) == 1 + 3 + 3 + 20
        assert record['mode'] == 'exact'
        assert record['classical_bound'] == 2.0
        assert record['tsirelson'] == TSIRELSON_BOUND

    def test_audit_csv(self, capsys):
        lines = run_cli(capsys, 'audit', '--grid', '3', '--axes', '2', '--tables', '4', '--seed', '2',
                        '--format', 'csv').out.splitlines()
        assert lines[0] == 'map,max_abs_S,grid_points,classical_bound,tsirelson'
        assert len(lines) == 1 + 1 + 2 + 3 + 4
        assert all(line.endswith(',2.0,2.8284271247461903') for line in lines[1:])

    def test_audit_over_bound_exit_3(self, mocker):
        mocker.patch(
            'bellga.experiment.audit_report',
            return_value=AuditReport(per_map=(('table', 3.0, 1),), global_max=3.0, grid_size=1, mode={'mode': 'exact'}),
        )
        with pytest.raises(SystemExit) as exc:
            main(['audit'])
        assert exc.value.code == 3

    def test_brute(self, capsys):
        record = run_json(capsys, 'brute', *OPTIMAL)
        assert len(record['strategies']) == 16
        assert record['max_S'] == 2
        assert record['min_S'] == -2
        assert record['argmax'] == {'A': [1, 1], 'B': [1, 1]}

    def test_brute_csv(self, capsys):
        lines = run_cli(capsys, 'brute', *OPTIMAL, '--format', 'csv').out.splitlines()
        assert lines[0] == 'A_a,A_a_prime,B_b,B_b_prime,S,classical_bound,tsirelson'
        assert lines[1] == '1,1,1,1,2,2.0,2.8284271247461903'
        assert all(line.endswith(',2.0,2.8284271247461903') for line in lines[1:])
        assert len(lines) == 17

    def test_compare(self, capsys):
        record = run_json(capsys, 'compare', '--pair', '0,60')
        assert abs(record['scalar_product_correlation'] + 0.5) <= 1e-12
        assert abs(record['bivector_scalar_part'] + 0.5) <= 1e-12
        assert record['sign_extracted_correlation'] == -1.0

    def test_no_command_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2


class TestExperimentConfig:
    """Merging flags, environment and config file"""

    def test_defaults(self):
        config = ExperimentConfig()
        assert config.model == DEFAULTS['model']
        assert config.settings.a.x == 1.0
        assert not config.exact

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({'model': 'vector', 'colour': 'blue'})

    @pytest.mark.parametrize("values", [
        {'model': 'quantum'},
        {'convention': 'clifford'},
        {'output_format': 'xml'},
        {'samples': 0},
        {'resolution': 1},
        {'grid': 0},
    ])
    def test_invalid_values(self, values):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping(values)

    def test_exact_mode_allows_zero_samples(self):
        assert ExperimentConfig(exact=True, samples=0).mode.exact

    def test_flags_override_config_file_and_environment(self, mock_config, monkeypatch, capsys):
        monkeypatch.setenv('BELLGA_SEED', '99')
        record = run_json(capsys, 'run', *OPTIMAL, '--exact')
        assert record['model'] == 'bivector'
        assert record['seed'] == 99

        record = run_json(capsys, 'run', '--model', 'sign', '--seed', '5', *OPTIMAL, '--exact')
        assert record['model'] == 'sign'
        assert record['seed'] == 5

    def test_from_args_uses_defaults(self):
        args = SimpleNamespace(model=None, convention=None, samples=None, seed=None, workers=None,
                               format=None, out=None, exact=False, angles=None, dirs=None)
        defaults = dict(DEFAULTS, model='sign', samples=777)
        config = ExperimentConfig.from_args(args, defaults)
        assert config.model == 'sign'
        assert config.samples == 777
        assert config.mode.samples == 777

    def test_parse_angles(self):
        assert parse_angles('0, 90,45,135') == [0.0, 90.0, 45.0, 135.0]
        with pytest.raises(ConfigError):
            parse_angles('0,ninety,45,135')
        with pytest.raises(ConfigError):
            parse_angles('0,90', count=4)

    def test_run_experiment_and_record(self):
        config = ExperimentConfig(model='bivector', exact=True)
        result, residuals = run_experiment(config)
        assert len(residuals) == 4
        record = run_record(config, result, residuals)
        assert record['samples'] == 0
        assert abs(record['S'] + TSIRELSON_BOUND) <= 1e-12

    def test_brute_rows(self):
        rows = brute_rows(ExperimentConfig().settings)
        assert {row['S'] for row in rows} == {2, -2}


class TestLoadConfig:
    """Environment variables and config file loading"""

    def test_defaults_without_file(self, tmp_path):
        assert load_config(tmp_path / 'missing', environ={}) == DEFAULTS

    def test_file_values(self, temp_config_file):
        config = load_config(temp_config_file, environ={})
        assert config['model'] == 'bivector'
        assert config['samples'] == 5000
        assert config['seed'] == 11
        assert config['convention'] == 'oriented'

    def test_environment_overrides_file(self, temp_config_file):
        config = load_config(temp_config_file, environ={'BELLGA_MODEL': 'sign', 'BELLGA_WORKERS': '4'})
        assert config['model'] == 'sign'
        assert config['workers'] == 4

    def test_unknown_section(self, temp_config_dir):
        config_file = temp_config_dir / 'config'
        config_file.write_text('[auth]\nclient_id = x\n')
        with pytest.raises(ConfigError):
            load_config(config_file, environ={})

    def test_invalid_file_value(self, temp_config_dir):
        parser = ConfigParser()
        parser['run'] = {'samples': 'many'}
        config_file = temp_config_dir / 'config'
        with open(config_file, 'w') as f:
            parser.write(f)
        with pytest.raises(ConfigError):
            load_config(config_file, environ={})

    def test_invalid_environment_value(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'missing', environ={'BELLGA_CONVENTION': 'clifford'})

    @pytest.mark.parametrize("option,raw", [
        ('seed', '-1'),
        ('seed', str(2**64)),
        ('workers', '0'),
        ('format', 'xml'),
        ('colour', 'blue'),
    ])
    def test_coerce_option_rejects(self, option, raw):
        with pytest.raises(ConfigError):
            coerce_option(option, raw)

    def test_coerce_option_converts(self):
        assert coerce_option('seed', ' 42 ') == 42
        assert coerce_option('model', 'sign') == 'sign'


class TestOutputHelpers:
    """JSON and CSV serialisation"""

    def test_json_keeps_order_and_ends_with_newline(self):
        text = to_json({'b': 1, 'a': 0.1})
        assert text.index('"b"') < text.index('"a"')
        assert text.endswith('\n')

    def test_csv_uses_float_repr(self):
        text = to_csv([{'x': 0.1 + 0.2, 'n': 3}], ('x', 'n'))
        assert text == 'x,n\n0.30000000000000004,3\n'
