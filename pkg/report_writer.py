"""
Report writer module.
Serializes a RunReport to JSON or CSV bytes and writes it to a file or stdout.
"""
import csv
import io
import json
import logging
import sys
from typing import Any, Optional

import numpy as np

from errors import IoError
from experiment_runner import RunReport

logger = logging.getLogger(__name__)

CSV_HEADER = ('experiment', 'metric', 'value', 'tolerance', 'pass')


def _to_builtin(value: Any) -> Any:
    """json.dumps fallback for numpy scalars and arrays."""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def format_tolerance(value: Optional[float]) -> str:
    """Shortest readable form: 1e-6 rather than 1e-06, 1000 rather than 1000.0."""
    if value is None:
        return ''
    text = f"{float(value):.6g}"
    if 'e' in text:
        mantissa, exponent = text.split('e')
        return f"{mantissa}e{int(exponent)}"
    return text


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0 or abs(v) >= 1e-3:
            return f"{v:.6f}"
        return f"{v:.6e}"
    return str(value)


class ReportWriter:
    """Encodes run reports and writes them out."""

    VALID_FORMATS = ('json', 'csv')

    def emit(self, report: RunReport, fmt: str = 'json', include_timing: bool = True) -> bytes:
        """
        Encode a report.

        Args:
            report: run report
            fmt: 'json' (single object, sorted keys) or 'csv' (one row per check)
            include_timing: keep wall_time_ms in JSON output

        Returns:
            UTF-8 encoded bytes
        """
        if fmt == 'json':
            text = json.dumps(report.to_dict(include_timing), sort_keys=True, indent=2,
                              default=_to_builtin)
            return (text + '\n').encode('utf-8')
        if fmt == 'csv':
            return self._csv(report).encode('utf-8')
        raise ValueError(f"unknown report format: {fmt}")

    @staticmethod
    def _csv(report: RunReport) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for name, sub in report.reports.items():
            for item in sub.get('checks', []):
                writer.writerow([name, item['metric'], format_value(item['value']),
                                 format_tolerance(item['tolerance']), format_value(item['pass'])])
        return buffer.getvalue()

    def write(self, report: RunReport, fmt: str = 'json', path: Optional[str] = None,
              include_timing: bool = True) -> int:
        """
        Write the encoded report to path, or to stdout when path is None.

        Returns:
            Number of bytes written

        Raises:
            IoError: the file cannot be written
        """
        data = self.emit(report, fmt, include_timing)
        if path is None:
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
            return len(data)
        try:
            with open(path, 'wb') as f:
                f.write(data)
            logger.info(f"Wrote {fmt} report to {path}")
        except OSError as e:
            logger.error(f"Could not write report file {path}: {e}")
            raise IoError(path, str(e))
        return len(data)


# Global writer instance
report_writer = ReportWriter()


def emit(report: RunReport, fmt: str = 'json') -> bytes:
    return report_writer.emit(report, fmt)
