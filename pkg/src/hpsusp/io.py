"""CSV ingestion/emission for traces, force breakdowns and wheel loads.

All files carry a header row, SI units in the column names, and full
double precision (%.17g) so that emit-then-ingest round trips are exact
to parsing precision.
"""

from __future__ import annotations

import csv

import numpy as np

from .estimator import ForceBreakdown, PressureTrace
from .oracle import OracleTrace
from .wheel import WheelLoadSeries

__all__ = [
    "CsvFormatError",
    "write_trace_csv",
    "read_trace_csv",
    "write_breakdown_csv",
    "write_wheel_load_csv",
]

_FMT = "%.17g"

TRACE_BASE_COLUMNS = ("t_s", "p1_pa")
TRACE_TRUTH_COLUMNS = ("f_out_truth_n", "v_truth_mps", "h_truth_m")
TRACE_TIRE_COLUMN = "f_tire_truth_n"


class CsvFormatError(ValueError):
    """Malformed or non-uniform CSV input."""


def _write_rows(path, header, columns):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_FMT % x for x in row])


def write_trace_csv(path, trace: OracleTrace) -> None:
    """Emit a pressure trace; truth columns included when available."""
    header = list(TRACE_BASE_COLUMNS)
    cols = [trace.t, trace.p1]
    if trace.f_out is not None:
        header += list(TRACE_TRUTH_COLUMNS)
        cols += [trace.f_out, trace.v, trace.h]
    if trace.f_tire_truth is not None:
        header.append(TRACE_TIRE_COLUMN)
        cols.append(trace.f_tire_truth)
    _write_rows(path, header, cols)


def read_trace_csv(path, t0_temperature: float = 30.0):
    """Read a trace CSV; returns (PressureTrace, truth-column dict).

    The sampling period is inferred from the time column and must be
    uniform to 1 ppm.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if header[:2] != list(TRACE_BASE_COLUMNS):
            raise CsvFormatError(
                f"{path}: expected leading columns {TRACE_BASE_COLUMNS}, "
                f"got {tuple(header[:2])}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{lineno}: non-numeric field") from exc
    if len(rows) < 2:
        raise CsvFormatError(f"{path}: need at least two data rows")
    data = np.asarray(rows)
    t = data[:, 0]
    steps = np.diff(t)
    dt = float(np.median(steps))
    if dt <= 0.0 or np.any(np.abs(steps - dt) > 1e-6 * dt):
        raise CsvFormatError(f"{path}: time column is not uniformly sampled")
    trace = PressureTrace(dt=dt, samples=data[:, 1], t0_temperature=t0_temperature)
    truth = {name: data[:, i] for i, name in enumerate(header) if i >= 2}
    return trace, truth


def write_breakdown_csv(path, trace: PressureTrace, bd: ForceBreakdown) -> None:
    header = ["t_s", "p1_pa", "p2_pa", "f_gas_n", "f_damp_n", "f_fric_n",
              "f_out_n", "v_mps", "h_m", "a_mps2"]
    cols = [trace.t, trace.samples, bd.p2, bd.f_gas, bd.f_damp, bd.f_fric,
            bd.f_out, bd.v, bd.h_total, bd.a]
    _write_rows(path, header, cols)


def write_wheel_load_csv(path, dt: float, series: WheelLoadSeries) -> None:
    header = ["t_s", "f_out_n", "h_sus_m", "v_mps", "a_sus_mps2", "theta_rad",
              "beta_rad", "i_sus", "ztt_acc_mps2", "f_tire_n", "liftoff_flag"]
    t = np.arange(series.f_tire.size) * dt
    liftoff = (series.f_tire < 0.0).astype(float)
    cols = [t, series.f_out, series.h_sus, series.v, series.a_sus,
            series.theta, series.beta, series.i_sus, series.z_ddot_t,
            series.f_tire, liftoff]
    _write_rows(path, header, cols)
