"""
Reporting Engine Service for the Zeno vacuum-scissors simulator.

This module implements the machine-readable outputs of the command line:
comma-separated datasets with a ``#``-prefixed metadata header, assembled
with pandas and written by a single ordered writer.
"""

import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.models.data_models.cascade_result import SweepRow
from src.core.utils.error_handling import OutputPathError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
NO_OUTCOME = "no_outcome"
# 1 - F values at or below this are roundoff and stay out of slope fits
INFIDELITY_FLOOR = 1e-14


class ReportType(str, Enum):
    """Types of datasets produced by the command line."""

    FIG2 = "fig2"
    SWEEP = "sweep"
    TRUNCATE = "truncate"
    VERIFY = "verify"


REPORT_COLUMNS = {
    ReportType.FIG2: ["N", "probe", "P_n", "P_postselect", "fidelity"],
    ReportType.SWEEP: ["N", "probe", "P_n", "P_postselect", "fidelity", "limit_fidelity"],
    ReportType.TRUNCATE: ["N", "P_postselect", "fidelity", "one_minus_F"],
    ReportType.VERIFY: ["check", "max_deviation", "tolerance", "status", "worst_params"],
}


def fit_loglog_slope(N_values: Sequence[float], values: Sequence[float],
                     floor: float = INFIDELITY_FLOOR) -> Optional[float]:
    """Least-squares slope of log(values) against log(N) over values above floor."""
    N_arr = np.asarray(N_values, dtype=float)
    v_arr = np.asarray(values, dtype=float)
    mask = np.isfinite(v_arr) & (v_arr > floor)
    if mask.sum() < 2:
        return None
    return float(np.polyfit(np.log(N_arr[mask]), np.log(v_arr[mask]), 1)[0])


class ReportingEngine:
    """Builds and writes CSV datasets."""

    def __init__(self):
        """Initialize the reporting engine."""
        self.row_builders = {
            ReportType.FIG2: self._sweep_record,
            ReportType.SWEEP: self._sweep_record,
            ReportType.TRUNCATE: self._truncate_record,
        }

    def build_dataset(self, report_type: ReportType, rows: Sequence[Tuple[str, SweepRow]]) -> pd.DataFrame:
        """
        Assemble labelled sweep rows into a dataset.

        Args:
            report_type: Dataset layout
            rows: (probe label, SweepRow) pairs in output order

        Returns:
            DataFrame with the layout's columns
        """
        if report_type not in self.row_builders:
            raise ValueError(f"Unsupported dataset type: {report_type}")
        records = [self.row_builders[report_type](label, row) for label, row in rows]
        frame = pd.DataFrame.from_records(records, columns=REPORT_COLUMNS[report_type])
        for column in frame.columns:
            if column not in ("N", "probe"):
                frame[column] = frame[column].astype(float)
        return frame

    def build_verification_table(self, records: List[Dict[str, Any]]) -> pd.DataFrame:
        return pd.DataFrame.from_records(records, columns=REPORT_COLUMNS[ReportType.VERIFY])

    def _sweep_record(self, label: str, row: SweepRow) -> Dict[str, Any]:
        return {
            "N": row.N,
            "probe": label,
            "P_n": row.emission_probability,
            "P_postselect": row.postselect_probability,
            "fidelity": row.fidelity,
            "limit_fidelity": row.limit_fidelity,
        }

    def _truncate_record(self, label: str, row: SweepRow) -> Dict[str, Any]:
        return {
            "N": row.N,
            "P_postselect": row.postselect_probability,
            "fidelity": row.fidelity,
            "one_minus_F": row.one_minus_fidelity,
        }

    def render(self, frame: pd.DataFrame, metadata: Dict[str, Any],
               footer: Optional[Dict[str, Any]] = None) -> str:
        """
        Render a dataset as text.

        Args:
            frame: Dataset
            metadata: Key/value pairs echoed as ``# key: value`` header lines
            footer: Optional trailing ``# key: value`` lines

        Returns:
            CSV text; missing values print as ``no_outcome``
        """
        header = "".join(f"# {key}: {_format_value(value)}\n" for key, value in metadata.items())
        body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep=NO_OUTCOME, lineterminator="\n")
        trailer = "".join(f"# {key}: {_format_value(value)}\n" for key, value in (footer or {}).items())
        return header + body + trailer

    def write(self, text: str, output_path: Optional[str] = None) -> None:
        """Write rendered text to a file, or to stdout when no path is given."""
        if output_path is None or output_path == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
            return

        path = Path(output_path)
        if path.is_dir():
            raise OutputPathError("Output path is a directory", path=str(path))
        if not path.parent.exists():
            raise OutputPathError("Output directory does not exist", path=str(path))
        try:
            with open(path, "w", newline="") as f:
                f.write(text)
        except OSError as e:
            raise OutputPathError(f"Cannot write output ({e.strerror})", path=str(path))
        logger.info(f"Wrote {text.count(chr(10))} lines to {path}")


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


# Global reporting engine instance
reporting_engine = ReportingEngine()
