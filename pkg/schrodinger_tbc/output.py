# Copyright (c) 2026 The schrodinger-tbc authors.
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom
# the Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE
# AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE
import csv
import glob
import json
import logging
import os
import re

import numpy as np

from schrodinger_tbc.errors import OutputError
from schrodinger_tbc.mesh import GridSpec, WaveField
from schrodinger_tbc.utils import format_float, output_file

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = "# schrodinger-snapshot v1"
SNAPSHOT_PATTERN = "snapshot_{:06d}.csv"
NORMS_FILE = "norms.csv"
REPORT_FILE = "report.json"
DIFFERENCES_FILE = "differences.csv"
COEFFICIENTS_FILE = "coefficients.csv"

_GRID_LINE = re.compile(r"^# grid X=(\S+) Y=(\S+) T=(\S+) J=(\d+) K=(\d+) M=(\d+)$")
_LEVEL_LINE = re.compile(r"^# level m=(\d+) t=(\S+)$")


def _writer(file):
    return csv.writer(file, lineterminator="\n")


def _optional(value):
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return format_float(value)


def write_snapshot(directory, field, m):
    """Write one level as ``snapshot_<m>.csv``: text header, then ``j,k,x,y,re,im`` rows."""
    grid = field.grid
    path = os.path.join(directory, SNAPSHOT_PATTERN.format(m))
    x, y = grid.x, grid.y
    with output_file(path) as file:
        file.write(SNAPSHOT_MAGIC + "\n")
        file.write("# grid X={} Y={} T={} J={} K={} M={}\n".format(
            format_float(grid.X), format_float(grid.Y), format_float(grid.T), grid.J, grid.K, grid.M))
        file.write("# level m={} t={}\n".format(m, format_float(grid.t(m))))
        writer = _writer(file)
        writer.writerow(("j", "k", "x", "y", "re", "im"))
        for j in range(grid.J + 1):
            row = field.values[j]
            for k in range(grid.K + 1):
                writer.writerow((j, k, format_float(x[j]), format_float(y[k]), format_float(row[k].real),
                                 format_float(row[k].imag)))
    logger.debug("Snapshot of level %d written to %s", m, path)
    return path


def read_snapshot(path):
    """Read a snapshot file back.

    :param str path:
    :return tuple: level and WaveField
    :raises OutputError: unreadable or malformed file
    """
    with output_file(path, "r") as file:
        header = [file.readline().rstrip("\n") for _ in range(3)]
        if header[0] != SNAPSHOT_MAGIC:
            raise OutputError("{} is not a snapshot file".format(path), path=path)
        grid_match, level_match = _GRID_LINE.match(header[1]), _LEVEL_LINE.match(header[2])
        if not grid_match or not level_match:
            raise OutputError("Malformed snapshot header in {}".format(path), path=path)
        X, Y, T = (float(value) for value in grid_match.groups()[:3])
        J, K, M = (int(value) for value in grid_match.groups()[3:])
        grid = GridSpec(X, Y, T, J, K, M)
        values = np.zeros(grid.shape, dtype=complex)
        reader = csv.reader(file)
        next(reader, None)
        try:
            for row in reader:
                values[int(row[0]), int(row[1])] = complex(float(row[4]), float(row[5]))
        except (IndexError, ValueError) as e:
            raise OutputError("Malformed snapshot row in {}: {}".format(path, e), path=path)
    return int(level_match.group(1)), WaveField(grid, values)


def load_snapshots(directory):
    """All snapshots of a run directory as ``(level, WaveField)`` sorted by level."""
    paths = glob.glob(os.path.join(directory, "snapshot_*.csv"))
    if not paths:
        raise OutputError("No snapshot files in {}".format(directory), path=directory)
    return sorted((read_snapshot(path) for path in paths), key=lambda item: item[0])


def write_norms(directory, report):
    path = os.path.join(directory, NORMS_FILE)
    with output_file(path) as file:
        writer = _writer(file)
        writer.writerow(("m", "t", "l2_norm", "c_norm"))
        for m, t, l2, c in zip(report.levels, report.times, report.l2_norms, report.c_norms):
            writer.writerow((m, format_float(t), format_float(l2), format_float(c)))
    return path


def write_report(directory, report, config_text, files):
    """Structured run summary; timings stay out so that repeated runs give identical bytes."""
    path = os.path.join(directory, REPORT_FILE)
    grid = report.grid
    summary = {
        "format": "schrodinger-run v1",
        "grid": {"X": grid.X, "Y": grid.Y, "T": grid.T, "J": grid.J, "K": grid.K, "M": grid.M},
        "geometry": report.config.geometry,
        "levels": len(report.l2_norms),
        "l2_norm": {"initial": float(report.l2_norms[0]), "final": float(report.l2_norms[-1]),
                    "max": float(np.max(report.l2_norms))},
        "c_norm": {"initial": float(report.c_norms[0]), "final": float(report.c_norms[-1]),
                   "max": float(np.max(report.c_norms))},
        "snapshots": sorted(report.snapshots),
        "files": sorted(os.path.basename(name) for name in files),
        "config": config_text,
    }
    with output_file(path) as file:
        json.dump(summary, file, indent=2, sort_keys=True)
        file.write("\n")
    return path


def read_report(directory):
    path = os.path.join(directory, REPORT_FILE)
    with output_file(path, "r") as file:
        try:
            return json.load(file)
        except ValueError as e:
            raise OutputError("Malformed report {}: {}".format(path, e), path=path)


def write_ratio_table(directory, table):
    path = os.path.join(directory, "ratios_{}.csv".format(table.direction))
    with output_file(path) as file:
        writer = _writer(file)
        writer.writerow(("direction", "l", "J", "K", "M", "E_C", "E_L2", "R_C", "R_L2"))
        for row in table.rows:
            writer.writerow((table.direction, row.level, row.J, row.K, row.M, format_float(row.e_c),
                             format_float(row.e_l2), _optional(row.r_c), _optional(row.r_l2)))
    logger.info("Ratio table written to %s", path)
    return path


def write_differences(directory, series):
    path = os.path.join(directory, DIFFERENCES_FILE)
    with output_file(path) as file:
        writer = _writer(file)
        writer.writerow(("m", "t", "abs_c", "abs_l2", "rel_c", "rel_l2"))
        for row in zip(series.levels, series.times, series.abs_c, series.abs_l2, series.rel_c, series.rel_l2):
            writer.writerow((row[0],) + tuple(_optional(value) for value in row[1:]))
    return path


def write_kernel(directory, q, values):
    path = os.path.join(directory, "kernel_q{:04d}.csv".format(q))
    with output_file(path) as file:
        writer = _writer(file)
        writer.writerow(("m", "re", "im"))
        for m, value in enumerate(values):
            writer.writerow((m, format_float(value.real), format_float(value.imag)))
    return path


def write_coefficients(directory, coefficients):
    """One row per mode with every coefficient, complex ones split into re/im columns."""
    path = os.path.join(directory, COEFFICIENTS_FILE)
    columns = []
    for name in coefficients[0]._fields:
        if isinstance(getattr(coefficients[0], name), complex):
            columns += [name + "_re", name + "_im"]
        else:
            columns.append(name)
    with output_file(path) as file:
        writer = _writer(file)
        writer.writerow(columns)
        for mode in coefficients:
            row = []
            for value in mode:
                if isinstance(value, complex):
                    row += [format_float(value.real), format_float(value.imag)]
                elif isinstance(value, int):
                    row.append(value)
                else:
                    row.append(format_float(value))
            writer.writerow(row)
    return path
