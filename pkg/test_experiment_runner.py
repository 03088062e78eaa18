import math
import unittest
from unittest.mock import patch

from experiment_config import ExperimentConfigParser, config_parser
from experiment_runner import ExperimentRunner, RunReport, check, experiment_runner

# Reduced sweep sizes keep the suite fast
SMALL_GAMMA = {'n_momenta': 50, 'n_components': 10, 'n_unitaries': 2}


def make_config(experiment, **params):
    return config_parser.from_mapping(dict(params, experiment=experiment))


class TestRunReport(unittest.TestCase):

    def test_overall_pass(self):
        report = RunReport('all', {'charge': {'success': True}, 'gamma': {'success': False}})
        self.assertFalse(report.overall_pass)
        self.assertEqual(report.exit_code(), 1)
        report.reports['gamma']['success'] = True
        self.assertEqual(report.exit_code(), 0)

    def test_empty_report_passes(self):
        report = RunReport('charge')
        self.assertTrue(report.overall_pass)
        self.assertEqual(report.to_dict(), {'experiment': 'charge', 'overall_pass': True, 'reports': {}})

    def test_timing_can_be_dropped(self):
        report = RunReport('gamma', {'gamma': {'success': True, 'checks': [], 'wall_time_ms': 12.5}})
        self.assertIn('wall_time_ms', report.to_dict()['reports']['gamma'])
        self.assertNotIn('wall_time_ms', report.to_dict(include_timing=False)['reports']['gamma'])

    def test_check_line(self):
        self.assertEqual(check('winding', 1.0, 1e-6, True),
                         {'metric': 'winding', 'value': 1.0, 'tolerance': 1e-6, 'pass': True})


class TestExperiments(unittest.TestCase):

    def test_charge(self):
        report = experiment_runner.run(make_config('charge', n=1, mesh=[32, 64]))
        sub = report.reports['charge']
        self.assertTrue(sub['success'])
        self.assertAlmostEqual(sub['winding'], 1.0, delta=1e-6)
        self.assertEqual(sub['nearest_integer'], 1)
        self.assertEqual([c['metric'] for c in sub['checks']], ['winding', 'shell_residual'])
        self.assertGreaterEqual(sub['wall_time_ms'], 0.0)
        self.assertEqual(report.exit_code(), 0)

    def test_charge_shell_check_uses_its_own_tolerance(self):
        sub = experiment_runner.run(make_config('charge', n=1, mesh=[32, 64], tol_winding=1e-3)).reports['charge']
        checks = {c['metric']: c for c in sub['checks']}
        self.assertEqual(checks['winding']['tolerance'], 1e-3)
        self.assertEqual(checks['shell_residual']['tolerance'], 1e-9)
        self.assertTrue(checks['shell_residual']['pass'])

    def test_charge_of_degree_two(self):
        sub = experiment_runner.run(make_config('charge', n=2, mesh=[64, 128])).reports['charge']
        self.assertTrue(sub['success'])
        self.assertAlmostEqual(sub['topological_charge'], 2.0, delta=1e-6)
        self.assertFalse(sub['diagnostics']['units_consistent'])

    def test_monopole(self):
        sub = experiment_runner.run(make_config('monopole', g=0.5, mesh=[16, 32])).reports['monopole']
        self.assertTrue(sub['success'])
        self.assertAlmostEqual(sub['flux'], 2 * math.pi, delta=1e-8)
        self.assertEqual([c['metric'] for c in sub['checks']],
                         ['flux_error', 'circulation_error', 'stokes_error', 'patch_difference_error'])

    def test_monopole_with_loop_at_the_pole(self):
        sub = experiment_runner.run(make_config('monopole', g=0.5, mesh=[16, 32],
                                                thetas=[0.0, math.pi / 2])).reports['monopole']
        self.assertTrue(sub['success'], sub.get('error'))
        self.assertEqual(sub['circulation_table'][0], [0.0, 0.0])
        checks = {c['metric']: c for c in sub['checks']}
        self.assertTrue(checks['stokes_error']['pass'])

    def test_quantize_on_lattice(self):
        sub = experiment_runner.run(make_config('quantize', g=0.5)).reports['quantize']
        self.assertTrue(sub['success'])
        self.assertTrue(sub['is_quantized'])
        self.assertAlmostEqual(sub['n'], 1.0, delta=1e-12)
        self.assertAlmostEqual(sub['Q'], 0.5, delta=1e-12)
        self.assertLess(sub['phase_deviation'], 1e-12)

    def test_quantize_off_lattice_is_reported_not_failed(self):
        report = experiment_runner.run(make_config('quantize', g=0.7))
        sub = report.reports['quantize']
        self.assertFalse(sub['is_quantized'])
        self.assertAlmostEqual(sub['n'], 1.4, delta=1e-12)
        self.assertTrue(sub['success'])
        self.assertEqual(report.exit_code(), 0)

    def test_quantize_off_lattice_fails_when_required(self):
        report = experiment_runner.run(make_config('quantize', g=0.7, require_quantized=True))
        self.assertFalse(report.reports['quantize']['success'])
        self.assertEqual(report.exit_code(), 1)

    def test_gamma(self):
        sub = experiment_runner.run(make_config('gamma', **SMALL_GAMMA)).reports['gamma']
        self.assertTrue(sub['success'])
        self.assertEqual(sub['seed'], 0xD1AC)
        self.assertTrue(all(c['pass'] for c in sub['checks']))

    def test_fermion_probe(self):
        sub = experiment_runner.run(make_config('fermion-probe')).reports['fermion-probe']
        self.assertTrue(sub['success'])
        self.assertLess(sub['boson_metric'], 1e-12)
        self.assertGreater(sub['fermion_metric'], 1e-3)
        self.assertTrue(sub['flag_not_quantized'])


class TestErrorCapture(unittest.TestCase):

    def test_string_singularity_becomes_failed_report(self):
        report = experiment_runner.run(make_config('monopole', thetas=[math.pi / 2, math.pi], mesh=[8, 16]))
        sub = report.reports['monopole']
        self.assertFalse(sub['success'])
        self.assertTrue(sub['error'].startswith('StringSingularity'))
        self.assertEqual(sub['checks'], [])
        self.assertIn('wall_time_ms', sub)
        self.assertEqual(report.exit_code(), 1)

    def test_loop_inside_source_region(self):
        sub = experiment_runner.run(make_config('fermion-probe', loop_radius=1.0, grid=4)).reports['fermion-probe']
        self.assertFalse(sub['success'])
        self.assertTrue(sub['error'].startswith('GeometryOverlap'))

    def test_unexpected_exception(self):
        with patch.object(ExperimentRunner, '_quantize', side_effect=ZeroDivisionError('boom')):
            sub = experiment_runner.run(make_config('quantize')).reports['quantize']
        self.assertEqual(sub['error'], 'ZeroDivisionError: boom')
        self.assertFalse(sub['success'])

    def test_handlers_receive_only_their_parameters(self):
        with patch.object(ExperimentRunner, '_quantize', return_value={'checks': []}) as handler:
            experiment_runner.run(make_config('quantize', g=0.5))
        params = handler.call_args[0][0]
        self.assertEqual(list(params), ExperimentConfigParser.EXPERIMENT_PARAMS['quantize'])
        self.assertEqual(params['g'], 0.5)


class TestAll(unittest.TestCase):

    def test_runs_every_experiment_in_order(self):
        with patch.object(ExperimentRunner, '_run_one',
                          side_effect=lambda name, cfg: {'success': True, 'checks': []}) as run_one:
            report = experiment_runner.run(make_config('all'))
        self.assertEqual(tuple(report.reports), ExperimentConfigParser.ALL_ORDER)
        self.assertEqual(run_one.call_count, 5)
        self.assertTrue(report.overall_pass)

    def test_one_failure_fails_the_run(self):
        def fake(name, cfg):
            return {'success': name != 'gamma', 'checks': []}

        with patch.object(ExperimentRunner, '_run_one', side_effect=fake):
            report = experiment_runner.run(make_config('all'))
        self.assertFalse(report.overall_pass)
        self.assertTrue(report.reports['fermion-probe']['success'])


if __name__ == '__main__':
    unittest.main()
