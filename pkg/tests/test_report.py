"""
Tests for CSV emission
"""
import numpy as np

from fastdvm.models import DistributionField, TrajectoryRecord
from fastdvm.services.lattice_service import lattice_service
from fastdvm.services.report_service import report_service


def test_table_writes_missing_cells_as_x(tmp_path):
    rows = [
        {"N": 8, "classical": 1.0 / 3.0, "fast_nbar_1": None},
        {"N": 16, "classical": float("nan"), "fast_nbar_1": 2.5e-4},
    ]
    path = report_service.write_table(rows, tmp_path / "out" / "table.csv", ["N", "classical", "fast_nbar_1"])
    lines = path.read_text().splitlines()
    assert lines[0] == "N,classical,fast_nbar_1"
    assert lines[1] == "8,0.33333333333333331,x"
    assert lines[2] == "16,x,0.00025000000000000001"


def test_field_csv_layout(tmp_path, grid_2d):
    values = np.arange(grid_2d.size, dtype=float).reshape(grid_2d.shape)
    path = report_service.write_field(DistributionField(grid_2d, values), tmp_path / "field.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "i1,i2,v1,v2,f"
    assert len(lines) == grid_2d.size + 1
    first = lines[1].split(",")
    assert first[:2] == [str(-grid_2d.N), str(-grid_2d.N)]
    assert float(first[2]) == -grid_2d.N * grid_2d.h
    assert lines[2].split(",")[:2] == [str(-grid_2d.N), str(-grid_2d.N + 1)]


def test_trajectory_columns(grid_2d, grid_3d, random_field):
    record = TrajectoryRecord(l1_errors=[0.0])
    record.times.append(0.0)
    record.moment_reports.append(lattice_service.moments(random_field(grid_2d)))
    frame = report_service.trajectory_frame(record, 2)
    assert list(frame.columns) == ["t", "mass", "px", "py", "energy", "entropy", "min_f", "neg_mass_frac", "l1_error"]

    record = TrajectoryRecord()
    record.times.append(0.5)
    record.moment_reports.append(lattice_service.moments(random_field(grid_3d)))
    frame = report_service.trajectory_frame(record, 3)
    assert list(frame.columns) == ["t", "mass", "px", "py", "pz", "energy", "entropy", "min_f", "neg_mass_frac"]
