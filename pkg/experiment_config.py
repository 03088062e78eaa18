"""
Experiment configuration parser.
Reads flat key = value text, JSON objects and YAML mappings into a validated
ExperimentConfig with every default filled in.
"""
import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml

from errors import ConfigError

logger = logging.getLogger(__name__)

_ANGLE = re.compile(r'^\s*(?:(?P<num>[-+]?[0-9.]+(?:e[-+]?\d+)?)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>[0-9.]+(?:e[-+]?\d+)?))?\s*$',
                    re.IGNORECASE)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration of one lab run."""
    experiment: str
    params: Dict[str, Any] = field(default_factory=dict)
    out: Optional[str] = None
    format: str = 'json'
    source: str = 'defaults'

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def for_experiment(self, name: str) -> Dict[str, Any]:
        """The parameters the named experiment reads, in table order."""
        return {key: self.params[key] for key in ExperimentConfigParser.EXPERIMENT_PARAMS[name]}


def _float(key: str, value) -> float:
    if isinstance(value, bool):
        raise ConfigError(key, f"{key}: expected a number, got {value!r}")
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"{key}: expected a number, got {value!r}")
    if not math.isfinite(result):
        raise ConfigError(key, f"{key}: must be finite, got {value!r}")
    return result


def _int(key: str, value) -> int:
    if isinstance(value, bool):
        raise ConfigError(key, f"{key}: expected an integer, got {value!r}")
    if isinstance(value, str):
        try:
            return int(value.strip(), 0)
        except ValueError:
            raise ConfigError(key, f"{key}: expected an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, int):
        return value
    raise ConfigError(key, f"{key}: expected an integer, got {value!r}")


def _bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ('true', 'yes', '1'):
        return True
    if isinstance(value, str) and value.strip().lower() in ('false', 'no', '0'):
        return False
    raise ConfigError(key, f"{key}: expected true or false, got {value!r}")


def _angle(key: str, value) -> float:
    """A number or a multiple of pi such as pi/2 or 3*pi/4."""
    if isinstance(value, str):
        match = _ANGLE.match(value)
        if match:
            numerator = float(match.group('num')) if match.group('num') else 1.0
            denominator = float(match.group('den')) if match.group('den') else 1.0
            if denominator == 0:
                raise ConfigError(key, f"{key}: division by zero in {value!r}")
            return numerator * math.pi / denominator
    return _float(key, value)


def _split(value) -> List[Any]:
    if isinstance(value, str):
        return [part.strip() for part in value.split(',') if part.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _pair(key: str, value) -> Tuple[int, int]:
    parts = _split(value)
    if len(parts) != 2:
        raise ConfigError(key, f"{key}: expected two integers such as 64,128, got {value!r}")
    return _int(key, parts[0]), _int(key, parts[1])


def _angles(key: str, value) -> Tuple[float, ...]:
    parts = _split(value)
    if not parts:
        raise ConfigError(key, f"{key}: expected at least one angle")
    return tuple(_angle(key, part) for part in parts)


def _text(key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(key, f"{key}: expected text, got {value!r}")
    return value.strip()


class ExperimentConfigParser:
    """Parser and validator for experiment configuration text."""

    VALID_EXPERIMENTS = ('charge', 'monopole', 'quantize', 'gamma', 'fermion-probe', 'all')

    # 'all' runs the others in this order
    ALL_ORDER = ('charge', 'monopole', 'quantize', 'gamma', 'fermion-probe')

    VALID_FORMATS = ('json', 'csv')

    # Keys that must be given explicitly for each experiment
    REQUIRED_PARAMS = {
        'charge': ['n'],
    }

    # Parameters each experiment reads
    EXPERIMENT_PARAMS = {
        'charge': ['n', 'e', 'hbar_c', 'radius', 'r_in', 'r_out', 'mesh', 'tol_winding', 'tol_shell'],
        'monopole': ['g', 'e', 'hbar_c', 'mesh', 'loop_samples', 'thetas',
                     'tol_flux', 'tol_circulation', 'tol_stokes', 'tol_quantized'],
        'quantize': ['g', 'e', 'hbar_c', 'tol_quantized', 'require_quantized'],
        'gamma': ['n_momenta', 'n_components', 'n_unitaries', 'seed', 'tol_gamma'],
        'fermion-probe': ['g', 'e', 'hbar_c', 'grid', 'grid_extent', 'r_cut', 'rho_cut', 'k',
                          'loop_radius', 'loop_theta', 'probe_samples',
                          'tol_boson', 'tol_fermion', 'min_ratio'],
    }

    DEFAULTS = {
        'e': 1.0,
        'g': 0.5,
        'hbar_c': 1.0,
        'n': 1,
        'radius': 1.0,
        'r_in': 0.5,
        'r_out': 2.0,
        'mesh': (64, 128),
        'loop_samples': 256,
        'thetas': (math.pi / 6, math.pi / 4, math.pi / 2, 3 * math.pi / 4),
        'grid': 16,
        'grid_extent': 2.0,
        'r_cut': 0.5,
        'rho_cut': 0.2,
        'k': 1.0,
        'loop_radius': 4.0,
        'loop_theta': math.pi / 2,
        'probe_samples': 64,
        'n_momenta': 10000,
        'n_components': 1000,
        'n_unitaries': 100,
        'seed': 0xD1AC,
        'tol_winding': 1e-6,
        'tol_shell': 1e-9,
        'tol_flux': 1e-8,
        'tol_circulation': 1e-8,
        'tol_stokes': 1e-7,
        'tol_quantized': 1e-9,
        'tol_gamma': 1e-12,
        'tol_boson': 1e-12,
        'tol_fermion': 1e-3,
        'min_ratio': 1e3,
        'require_quantized': False,
    }

    CONVERTERS: Dict[str, Callable[[str, Any], Any]] = {
        'e': _float, 'g': _float, 'hbar_c': _float, 'n': _int,
        'radius': _float, 'r_in': _float, 'r_out': _float, 'mesh': _pair,
        'loop_samples': _int, 'thetas': _angles,
        'grid': _int, 'grid_extent': _float, 'r_cut': _float, 'rho_cut': _float,
        'k': _float, 'loop_radius': _float, 'loop_theta': _angle, 'probe_samples': _int,
        'n_momenta': _int, 'n_components': _int, 'n_unitaries': _int, 'seed': _int,
        'tol_winding': _float, 'tol_shell': _float, 'tol_flux': _float, 'tol_circulation': _float,
        'tol_stokes': _float, 'tol_quantized': _float, 'tol_gamma': _float,
        'tol_boson': _float, 'tol_fermion': _float, 'min_ratio': _float,
        'require_quantized': _bool,
    }

    def parse_config(self, text: str, overrides: Optional[Dict[str, Any]] = None,
                     source: str = '<text>') -> ExperimentConfig:
        """
        Parse configuration text in key-value or JSON form.

        Args:
            text: UTF-8 configuration text; a leading '{' selects JSON
            overrides: values that win over the text (command-line options)
            source: label recorded on the result for logging

        Returns:
            ExperimentConfig with defaults filled

        Raises:
            ConfigError: unknown key, missing required key or out-of-range value
        """
        stripped = (text or '').strip()
        if stripped.startswith('{'):
            raw = self._parse_json(stripped)
        else:
            raw = self._parse_key_values(stripped)
        return self.from_mapping(raw, overrides, source)

    def load_config_file(self, path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        Load a configuration file; .yml/.yaml files are read as YAML mappings,
        everything else as key-value or JSON text.
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError('config', f"cannot read config file {path}: {e}")
        logger.info(f"Loaded configuration from {path}")
        if path.lower().endswith(('.yml', '.yaml')):
            try:
                raw = yaml.safe_load(text) or {}
            except yaml.YAMLError as e:
                raise ConfigError('config', f"invalid YAML in {path}: {e}")
            if not isinstance(raw, dict):
                raise ConfigError('config', f"{path} must contain a mapping")
            return self.from_mapping(raw, overrides, path)
        return self.parse_config(text, overrides, path)

    @staticmethod
    def _parse_json(text: str) -> Dict[str, Any]:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError('config', f"invalid JSON config: {e}")
        if not isinstance(raw, dict):
            raise ConfigError('config', "JSON config must be an object")
        return raw

    @staticmethod
    def _parse_key_values(text: str) -> Dict[str, Any]:
        raw = {}
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError('config', f"line {number}: expected key = value, got {line!r}")
            key, value = (part.strip() for part in line.split('=', 1))
            if not key:
                raise ConfigError('config', f"line {number}: missing key")
            try:
                typed = yaml.safe_load(value) if value else None
            except yaml.YAMLError:
                typed = value
            raw[key] = value if isinstance(typed, dict) or typed is None else typed
        return raw

    def from_mapping(self, raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None,
                     source: str = '<mapping>') -> ExperimentConfig:
        """Validate a mapping of raw values and fill defaults."""
        merged = dict(raw)
        if overrides:
            merged.update({k: v for k, v in overrides.items() if v is not None})

        experiment = merged.pop('experiment', None)
        if experiment is None:
            raise ConfigError('experiment', "missing required key: experiment")
        experiment = _text('experiment', experiment).lower()
        if experiment not in self.VALID_EXPERIMENTS:
            raise ConfigError('experiment', f"unknown experiment {experiment!r}; "
                                            f"valid: {', '.join(self.VALID_EXPERIMENTS)}")

        fmt = _text('format', merged.pop('format', 'json')).lower()
        if fmt not in self.VALID_FORMATS:
            raise ConfigError('format', f"format must be json or csv, got {fmt!r}")
        out = merged.pop('out', None)
        out = _text('out', out) if out is not None else None

        for key in merged:
            if key not in self.DEFAULTS:
                raise ConfigError(key, f"unknown key: {key}")

        for key in self.REQUIRED_PARAMS.get(experiment, []):
            if key not in merged:
                raise ConfigError(key, f"missing required key for {experiment}: {key}")

        params = dict(self.DEFAULTS)
        for key, value in merged.items():
            params[key] = self.CONVERTERS[key](key, value)
        self._check_ranges(params)

        logger.debug(f"Config from {source}: experiment={experiment} overrides={sorted(merged)}")
        return ExperimentConfig(experiment=experiment, params=params, out=out, format=fmt, source=source)

    @staticmethod
    def _check_ranges(params: Dict[str, Any]):
        def require(key: str, ok: bool, message: str):
            if not ok:
                raise ConfigError(key, f"{key}: {message}, got {params[key]!r}")

        for key, value in params.items():
            if key.startswith('tol_') or key == 'min_ratio':
                require(key, value > 0, "must be positive")
        require('e', params['e'] != 0, "must be non-zero")
        for key in ('hbar_c', 'radius', 'grid_extent', 'r_cut', 'rho_cut', 'k', 'loop_radius'):
            require(key, params[key] > 0, "must be positive")
        require('r_in', params['r_in'] > 0, "must be positive")
        require('r_out', params['r_out'] > params['r_in'], "must exceed r_in")
        require('mesh', min(params['mesh']) >= 1, "sizes must be at least 1")
        require('grid', params['grid'] >= 1, "must be at least 1")
        require('loop_samples', params['loop_samples'] >= 3, "must be at least 3")
        require('probe_samples', params['probe_samples'] >= 8, "must be at least 8")
        require('thetas', all(0 <= t <= math.pi for t in params['thetas']), "angles must lie in [0, pi]")
        require('loop_theta', 0 <= params['loop_theta'] <= math.pi, "must lie in [0, pi]")
        for key in ('n_momenta', 'n_components', 'n_unitaries'):
            require(key, params[key] >= 1, "must be at least 1")
        require('seed', params['seed'] >= 0, "must be non-negative")


# Global parser instance
config_parser = ExperimentConfigParser()


def parse_config(text: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    return config_parser.parse_config(text, overrides)
