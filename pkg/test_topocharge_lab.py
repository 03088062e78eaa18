import json
import os
import tempfile
import unittest

from config import config
from topocharge_lab import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, build_parser, main

SMALL_CHARGE = '{"n": 1, "mesh": [32, 64]}'
SMALL_GAMMA = '{"n_momenta": 50, "n_components": 10, "n_unitaries": 2}'


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.threads = config.threads

    def tearDown(self):
        config.update_threads(self.threads)
        self.tmpdir.cleanup()

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def read(self, name):
        with open(self.path(name), 'rb') as f:
            return f.read()

    def run_lab(self, *argv):
        return main(list(argv) + ['--log-level', 'ERROR'])

    def test_charge_without_degree_is_config_error(self):
        self.assertEqual(self.run_lab('charge', '--out', self.path('r.json')), EXIT_CONFIG)
        self.assertFalse(os.path.exists(self.path('r.json')))

    def test_charge_passes(self):
        code = self.run_lab('charge', '--json-config', SMALL_CHARGE, '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_PASS)
        data = json.loads(self.read('r.json'))
        self.assertEqual(data['experiment'], 'charge')
        self.assertTrue(data['overall_pass'])
        self.assertAlmostEqual(data['reports']['charge']['winding'], 1.0, delta=1e-6)

    def test_csv_report(self):
        code = self.run_lab('charge', '--json-config', SMALL_CHARGE, '--format', 'csv',
                            '--out', self.path('r.csv'))
        self.assertEqual(code, EXIT_PASS)
        lines = self.read('r.csv').decode('utf-8').splitlines()
        self.assertEqual(lines[0], 'experiment,metric,value,tolerance,pass')
        self.assertEqual(lines[1], 'charge,winding,1.000000,1e-6,true')

    def test_require_quantized(self):
        config_text = '{"g": 0.7}'
        self.assertEqual(self.run_lab('quantize', '--json-config', config_text,
                                      '--out', self.path('a.json')), EXIT_PASS)
        self.assertEqual(self.run_lab('quantize', '--json-config', config_text, '--require-quantized',
                                      '--out', self.path('b.json')), EXIT_FAIL)
        self.assertFalse(json.loads(self.read('b.json'))['overall_pass'])

    def test_reports_are_reproducible_without_timing(self):
        for name in ('first.json', 'second.json'):
            code = self.run_lab('gamma', '--json-config', SMALL_GAMMA, '--no-timing', '--out', self.path(name))
            self.assertEqual(code, EXIT_PASS)
        self.assertEqual(self.read('first.json'), self.read('second.json'))
        self.assertNotIn(b'wall_time_ms', self.read('first.json'))

    def test_seed_override(self):
        self.run_lab('gamma', '--json-config', SMALL_GAMMA, '--seed', '0x10', '--out', self.path('r.json'))
        self.assertEqual(json.loads(self.read('r.json'))['reports']['gamma']['seed'], 16)

    def test_config_file(self):
        with open(self.path('quantize.cfg'), 'w', encoding='utf-8') as f:
            f.write("experiment = quantize\ng = 1.0\n")
        code = self.run_lab('quantize', '--config', self.path('quantize.cfg'), '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_PASS)
        self.assertAlmostEqual(json.loads(self.read('r.json'))['reports']['quantize']['n'], 2.0, delta=1e-12)

    def test_json_config_file(self):
        with open(self.path('charge.json'), 'w', encoding='utf-8') as f:
            f.write(SMALL_CHARGE)
        code = self.run_lab('charge', '--json-config', self.path('charge.json'), '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_PASS)

    def test_unknown_key_is_config_error(self):
        code = self.run_lab('gamma', '--json-config', '{"colour": "red"}', '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_CONFIG)

    def test_negative_threads_is_config_error(self):
        self.assertEqual(self.run_lab('quantize', '--threads', '-1', '--out', self.path('r.json')), EXIT_CONFIG)

    def test_threads_option_sets_worker_count(self):
        code = self.run_lab('quantize', '--threads', '2', '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_PASS)
        self.assertEqual(config.worker_count(), 2)

    def test_unwritable_report(self):
        code = self.run_lab('quantize', '--out', self.path(os.path.join('missing', 'r.json')))
        self.assertEqual(code, EXIT_FAIL)

    def test_help_lists_built_in_defaults(self):
        epilog = build_parser().epilog
        self.assertIn('tol_shell = 1e-09', epilog)
        self.assertIn('TOPOCHARGE_LOG_FILE', epilog)
        self.assertNotIn('TOPOCHARGE_DEFAULTS_FILE', epilog)

    def test_parser_rejects_unknown_experiment(self):
        with self.assertRaises(SystemExit):
            build_parser().parse_args(['weyl'])


if __name__ == '__main__':
    unittest.main()
