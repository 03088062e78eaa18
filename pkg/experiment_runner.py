"""
Experiment runner.
Dispatches a validated ExperimentConfig to the numeric modules and collects
one sub-report per experiment with its pass/fail checks.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from diracalg import dirac_suite, gamma_basis
from errors import LabError
from experiment_config import ExperimentConfig, ExperimentConfigParser
from fermionprobe import ProbeConfig, boson_fermion_comparison
from geometry import FOUR_PI, Grid3, hedgehog, sphere_mesh
from monopole import (Loop, MonopoleConfig, monopole_report, patch_difference, polar_cap_flux,
                      quantization_index, quantized_topological_charge, single_valuedness_phase)
from topocharge import charge_report, shell_conservation_check

logger = logging.getLogger(__name__)


def check(metric: str, value: Any, tolerance: Optional[float], passed: bool) -> Dict[str, Any]:
    """One pass/fail line of a sub-report."""
    return {'metric': metric, 'value': value, 'tolerance': tolerance, 'pass': bool(passed)}


@dataclass
class RunReport:
    """Sub-reports keyed by experiment name, in execution order."""
    experiment: str
    reports: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(sub.get('success', False) for sub in self.reports.values())

    def exit_code(self) -> int:
        return 0 if self.overall_pass else 1

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        reports = {}
        for name, sub in self.reports.items():
            reports[name] = {k: v for k, v in sub.items() if include_timing or k != 'wall_time_ms'}
        return {
            'experiment': self.experiment,
            'overall_pass': self.overall_pass,
            'reports': reports,
        }


class ExperimentRunner:
    """Runs the selected experiments sequentially."""

    def run(self, config: ExperimentConfig) -> RunReport:
        """
        Execute every experiment the config selects.

        Args:
            config: validated experiment configuration

        Returns:
            RunReport; module errors are captured as failed sub-reports
        """
        names = ExperimentConfigParser.ALL_ORDER if config.experiment == 'all' else (config.experiment,)
        report = RunReport(experiment=config.experiment)
        for name in names:
            report.reports[name] = self._run_one(name, config)
        logger.info(f"Run {config.experiment} finished: overall_pass={report.overall_pass}")
        return report

    def _run_one(self, name: str, config: ExperimentConfig) -> Dict[str, Any]:
        logger.info(f"Starting experiment {name} (config from {config.source})")
        start = time.perf_counter()
        try:
            params = config.for_experiment(name)
            if name == 'charge':
                result = self._charge(params)
            elif name == 'monopole':
                result = self._monopole(params)
            elif name == 'quantize':
                result = self._quantize(params)
            elif name == 'gamma':
                result = self._gamma(params)
            elif name == 'fermion-probe':
                result = self._fermion_probe(params)
            else:
                raise LabError(f"no runner for experiment {name}")
            result['success'] = all(c['pass'] for c in result['checks'])
        except Exception as e:
            logger.warning(f"Experiment {name} failed: {type(e).__name__}: {e}")
            result = {
                'success': False,
                'error': f"{type(e).__name__}: {e}",
                'checks': [],
            }
        elapsed = (time.perf_counter() - start) * 1000.0
        result['wall_time_ms'] = elapsed
        logger.info(f"Finished experiment {name} in {elapsed:.1f} ms: success={result['success']}")
        return result

    @staticmethod
    def _charge(params: Dict[str, Any]) -> Dict[str, Any]:
        n = params['n']
        tol = params['tol_winding']
        field_ = hedgehog(n)
        mesh = sphere_mesh(*params['mesh'])
        report = charge_report(field_, params['e'], params['radius'], mesh, params['hbar_c'])
        shell = shell_conservation_check(field_, params['r_in'], params['r_out'], mesh)
        result = report.to_dict()
        result['n'] = n
        result['shell_residual'] = shell
        result['diagnostics'] = report.diagnostics()
        result['checks'] = [
            check('winding', report.winding, tol, abs(report.winding - n) < tol),
            check('shell_residual', shell, params['tol_shell'], shell < params['tol_shell']),
        ]
        return result

    @staticmethod
    def _monopole(params: Dict[str, Any]) -> Dict[str, Any]:
        cfg = MonopoleConfig(g=params['g'], e=params['e'], hbar_c=params['hbar_c'])
        mesh = sphere_mesh(*params['mesh'])
        result = monopole_report(cfg, params['thetas'], params['loop_samples'], mesh,
                                 params['tol_quantized'])
        g = cfg.g
        flux_error = abs(result['flux'] - FOUR_PI * g)
        circulation_error = max(abs(v - 2.0 * math.pi * g * (1.0 - math.cos(t)))
                                for t, v in result['circulation_table'])
        stokes_error = max(abs(v - polar_cap_flux(cfg, t)) for t, v in result['circulation_table'])
        equator = Loop(theta=math.pi / 2, samples=params['loop_samples'])
        string_error = abs(patch_difference(cfg, equator) - FOUR_PI * g)
        result['checks'] = [
            check('flux_error', flux_error, params['tol_flux'], flux_error < params['tol_flux']),
            check('circulation_error', circulation_error, params['tol_circulation'],
                  circulation_error < params['tol_circulation']),
            check('stokes_error', stokes_error, params['tol_stokes'], stokes_error < params['tol_stokes']),
            check('patch_difference_error', string_error, params['tol_stokes'],
                  string_error < params['tol_stokes']),
        ]
        return result

    @staticmethod
    def _quantize(params: Dict[str, Any]) -> Dict[str, Any]:
        cfg = MonopoleConfig(g=params['g'], e=params['e'], hbar_c=params['hbar_c'])
        n, is_quantized = quantization_index(cfg, params['tol_quantized'])
        phase = single_valuedness_phase(cfg)
        required = params['require_quantized']
        return {
            'g': cfg.g,
            'e': cfg.e,
            'hbar_c': cfg.hbar_c,
            'n': n,
            'is_quantized': is_quantized,
            'Q': quantized_topological_charge(n, cfg.e, cfg.hbar_c),
            'phase': [phase.real, phase.imag],
            'phase_deviation': abs(phase - 1.0),
            'require_quantized': required,
            # only gates the run when quantization is required
            'checks': [check('is_quantized', is_quantized, params['tol_quantized'],
                             is_quantized or not required)],
        }

    @staticmethod
    def _gamma(params: Dict[str, Any]) -> Dict[str, Any]:
        tol = params['tol_gamma']
        result = dirac_suite(gamma_basis(), params['n_momenta'], params['n_components'],
                             params['n_unitaries'], params['seed'], tol)
        result['seed'] = params['seed']
        result['checks'] = [
            check('anticommutation_pass', result['anticommutation_pass'], None, result['anticommutation_pass']),
            check('factorization_max_residual', result['factorization_max_residual'], tol,
                  result['factorization_max_residual'] < tol),
            check('component_pass', all(result['component_pass']), tol, all(result['component_pass'])),
            check('similarity_max_residual', result['similarity_max_residual'], tol,
                  result['similarity_max_residual'] < tol),
        ]
        return result

    @staticmethod
    def _fermion_probe(params: Dict[str, Any]) -> Dict[str, Any]:
        monopole = MonopoleConfig(g=params['g'], e=params['e'], hbar_c=params['hbar_c'])
        probe = ProbeConfig(
            monopole=monopole,
            k=params['k'],
            grid=Grid3.centered(params['grid'], params['grid_extent']),
            loop=Loop(theta=params['loop_theta'], radius=params['loop_radius'],
                      samples=params['probe_samples']),
            r_cut=params['r_cut'],
            rho_cut=params['rho_cut'],
        )
        result = boson_fermion_comparison(probe)
        result['checks'] = [
            check('boson_metric', result['boson_metric'], params['tol_boson'],
                  result['boson_metric'] < params['tol_boson']),
            check('fermion_metric', result['fermion_metric'], params['tol_fermion'],
                  result['fermion_metric'] > params['tol_fermion']),
            check('ratio', result['ratio'], params['min_ratio'], result['ratio'] >= params['min_ratio']),
        ]
        return result


# Global runner instance
experiment_runner = ExperimentRunner()


def run(config: ExperimentConfig) -> RunReport:
    return experiment_runner.run(config)
