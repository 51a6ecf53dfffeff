"""
CSV emission for fields, trajectories and experiment tables
"""
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from fastdvm.models import DistributionField, TrajectoryRecord
from fastdvm.services.lattice_service import lattice_service

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MISSING = "x"

Cell = Union[int, float, str, None]


def _cell(value: Cell) -> Cell:
    if value is None:
        return MISSING
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return MISSING
        return FLOAT_FORMAT % value
    return value


class ReportService:
    """Service writing CSV outputs with 17 significant digits"""

    @staticmethod
    def _write(df: pd.DataFrame, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"wrote {len(df)} rows to {path}")
        return path

    @staticmethod
    def field_frame(field: DistributionField) -> pd.DataFrame:
        """Columns i1..id, v1..vd, f in storage order"""
        grid = field.grid
        indices = lattice_service.index_grid(grid)
        columns: Dict[str, np.ndarray] = {}
        for j, idx in enumerate(indices, start=1):
            columns[f"i{j}"] = idx.ravel()
        for j, idx in enumerate(indices, start=1):
            columns[f"v{j}"] = idx.ravel() * grid.h
        columns["f"] = field.values.ravel()
        return pd.DataFrame(columns)

    @staticmethod
    def write_field(field: DistributionField, path: Path) -> Path:
        return ReportService._write(ReportService.field_frame(field), path)

    @staticmethod
    def trajectory_frame(record: TrajectoryRecord, d: int) -> pd.DataFrame:
        momentum_names = ["px", "py", "pz"][:d]
        rows = []
        for i, (t, report) in enumerate(zip(record.times, record.moment_reports)):
            row = {"t": t, "mass": report.mass}
            row.update(dict(zip(momentum_names, report.momentum)))
            row.update(
                {
                    "energy": report.energy,
                    "entropy": report.entropy,
                    "min_f": report.min_value,
                    "neg_mass_frac": report.negative_mass_fraction,
                }
            )
            if record.l1_errors is not None:
                row["l1_error"] = record.l1_errors[i]
            rows.append(row)
        return pd.DataFrame(rows)

    @staticmethod
    def write_trajectory(record: TrajectoryRecord, d: int, path: Path) -> Path:
        return ReportService._write(ReportService.trajectory_frame(record, d), path)

    @staticmethod
    def write_table(rows: List[Dict[str, Cell]], path: Path, columns: Sequence[str] = None) -> Path:
        """Experiment table; None cells are written as `x`"""
        df = pd.DataFrame(rows, columns=list(columns) if columns else None)
        df = df.astype(object).map(_cell)
        return ReportService._write(df, path)


# Singleton instance
report_service = ReportService()
