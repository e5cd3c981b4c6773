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
import hashlib
import json
import logging
import os
from collections import namedtuple

import numpy as np

from schrodinger_tbc.errors import ConfigurationError, MeshMismatchError
from schrodinger_tbc.mesh import WaveField, coarser_grid, is_power_of_two, norm_c, norm_l2, restrict
from schrodinger_tbc.stepper import Simulation
from schrodinger_tbc.utils import ensure_directory, output_file

logger = logging.getLogger(__name__)

DIRECTIONS = ("x", "y", "t")
CANDIDATE_ORDERS = (1, 2, 3, 4)
VANISHING_NORM = 1e-12

RatioRow = namedtuple("RatioRow", ("level", "J", "K", "M", "e_c", "e_l2", "r_c", "r_l2", "order_c", "order_l2"))


def reference_ratio(order, level):
    """Ratio of successive differences expected for convergence of the given order.

    :param float order: convergence order, > 0
    :param int level: refinement level, >= 1
    :return float: (2^((level+1) order) - 1) / (2^(level order) - 1)
    """
    if not order > 0 or level < 1:
        raise ConfigurationError("reference_ratio needs order > 0 and level >= 1, got ({}, {})".format(order, level))
    return (2.0 ** ((level + 1) * order) - 1.0) / (2.0 ** (level * order) - 1.0)


def nearest_order(ratio, level, orders=CANDIDATE_ORDERS):
    if ratio is None or not np.isfinite(ratio):
        return None
    return min(orders, key=lambda order: abs(ratio - reference_ratio(order, level)))


class DifferenceSeries(object):
    """Absolute and relative C and L2 differences at the common time levels of two runs.

    Levels are counted on the coarser time mesh. Relative entries are NaN where the reference norm vanishes.
    """

    __slots__ = ("levels", "times", "abs_c", "abs_l2", "rel_c", "rel_l2")

    def __init__(self, levels=(), times=(), abs_c=(), abs_l2=(), rel_c=(), rel_l2=()):
        self.levels = list(levels)
        self.times = list(times)
        self.abs_c = list(abs_c)
        self.abs_l2 = list(abs_l2)
        self.rel_c = list(rel_c)
        self.rel_l2 = list(rel_l2)

    def append(self, level, time, abs_c, abs_l2, rel_c, rel_l2):
        self.levels.append(level)
        self.times.append(time)
        self.abs_c.append(abs_c)
        self.abs_l2.append(abs_l2)
        self.rel_c.append(rel_c)
        self.rel_l2.append(rel_l2)

    def __len__(self):
        return len(self.levels)

    @staticmethod
    def _max(values):
        finite = [value for value in values if not np.isnan(value)]
        return max(finite) if finite else float("nan")

    @property
    def max_abs_c(self):
        return self._max(self.abs_c)

    @property
    def max_abs_l2(self):
        return self._max(self.abs_l2)

    @property
    def max_rel_c(self):
        return self._max(self.rel_c)

    @property
    def max_rel_l2(self):
        return self._max(self.rel_l2)

    def to_dict(self):
        return {name: [None if isinstance(v, float) and np.isnan(v) else v for v in getattr(self, name)]
                for name in self.__slots__}

    @classmethod
    def from_dict(cls, data):
        return cls(**{name: [float("nan") if v is None else v for v in data[name]] for name in cls.__slots__})


def _nesting_factor(name, fine, coarse):
    if fine == coarse:
        return 1
    if coarse == 0 or fine % coarse or not is_power_of_two(fine // coarse):
        raise MeshMismatchError("{} counts {} and {} are not nested by a power of two".format(name, fine, coarse))
    return fine // coarse


class _Comparison(object):
    """Restricts the finer of two runs onto the coarser mesh and records differences."""

    def __init__(self, reference_grid, other_grid):
        if not np.allclose((reference_grid.X, reference_grid.Y, reference_grid.T),
                           (other_grid.X, other_grid.Y, other_grid.T), rtol=1e-12, atol=0):
            raise MeshMismatchError("Runs cover different domains: {} vs {}".format(
                reference_grid.describe(), other_grid.describe()))
        counts = list(zip("JKM", reference_grid[3:], other_grid[3:]))
        if all(ref >= other for _, ref, other in counts):
            self.reference_is_fine = True
            factors = [_nesting_factor(name, ref, other) for name, ref, other in counts]
            self.grid = other_grid
        elif all(ref <= other for _, ref, other in counts):
            self.reference_is_fine = False
            factors = [_nesting_factor(name, other, ref) for name, ref, other in counts]
            self.grid = reference_grid
        else:
            raise MeshMismatchError("Meshes are not nested: {} vs {}".format(
                reference_grid.describe(), other_grid.describe()))
        self.x_factor, self.y_factor, self.t_factor = factors
        self.reference_grid = reference_grid
        self.other_grid = other_grid
        self.series = DifferenceSeries()

    def add(self, reference, other, level):
        if self.reference_is_fine:
            reference = restrict(reference, self.x_factor, self.y_factor)
        else:
            other = restrict(other, self.x_factor, self.y_factor)
        reference = WaveField(self.grid, reference.values)
        difference = WaveField(self.grid, other.values - reference.values)
        abs_c, abs_l2 = norm_c(difference), norm_l2(difference)
        ref_c, ref_l2 = norm_c(reference), norm_l2(reference)
        rel_c = abs_c / ref_c if ref_c >= VANISHING_NORM else float("nan")
        rel_l2 = abs_l2 / ref_l2 if ref_l2 >= VANISHING_NORM else float("nan")
        if np.isnan(rel_l2) or np.isnan(rel_c):
            logger.warning("Reference norm vanished at level %d, relative difference omitted", level)
        self.series.append(level, self.grid.t(level), abs_c, abs_l2, rel_c, rel_l2)


def _time_key(level, other_grid):
    return level * max(other_grid.M, 1)


def difference_norms(reference, other):
    """Differences at every common time level of two runs on nested meshes.

    :param reference: iterable of ``(level, WaveField)`` of the reference run
    :param other: iterable of ``(level, WaveField)`` of the compared run
    :return DifferenceSeries: levels on the coarser time mesh
    :raises MeshMismatchError: meshes not nested by powers of two
    """
    reference, other = iter(reference), iter(other)
    ref_item, other_item = next(reference, None), next(other, None)
    if ref_item is None or other_item is None:
        return DifferenceSeries()
    comparison = _Comparison(ref_item[1].grid, other_item[1].grid)
    ref_grid, other_grid = comparison.reference_grid, comparison.other_grid
    while ref_item is not None and other_item is not None:
        ref_key = _time_key(ref_item[0], other_grid)
        other_key = _time_key(other_item[0], ref_grid)
        if ref_key < other_key:
            ref_item = next(reference, None)
        elif other_key < ref_key:
            other_item = next(other, None)
        else:
            level = other_item[0] if comparison.reference_is_fine else ref_item[0]
            comparison.add(ref_item[1], other_item[1], level)
            ref_item, other_item = next(reference, None), next(other, None)
    return comparison.series


def simulation_levels(simulation):
    for state in simulation.iterate():
        yield state.m, state.field


class RatioTable(object):
    """Refinement ratios of one direction, rows from the coarsest mesh to the finest."""

    def __init__(self, direction, reference_grid, rows):
        self.direction = direction
        self.reference_grid = reference_grid
        self.rows = rows

    @classmethod
    def from_series(cls, direction, reference_grid, grids, series):
        """Build the table from difference series indexed by refinement level 1..l_max."""
        e_c = {level: s.max_abs_c for level, s in series.items()}
        e_l2 = {level: s.max_abs_l2 for level, s in series.items()}
        rows = []
        for level in sorted(series, reverse=True):
            r_c = r_l2 = None
            if level + 1 in series:
                r_c = e_c[level + 1] / e_c[level] if e_c[level] else float("inf")
                r_l2 = e_l2[level + 1] / e_l2[level] if e_l2[level] else float("inf")
            grid = grids[level]
            rows.append(RatioRow(level, grid.J, grid.K, grid.M, e_c[level], e_l2[level], r_c, r_l2,
                                 nearest_order(r_c, level), nearest_order(r_l2, level)))
        return cls(direction, reference_grid, rows)

    def reference_ratios(self, orders=CANDIDATE_ORDERS):
        return {order: [reference_ratio(order, row.level) for row in self.rows] for order in orders}


def _cache_key(reference_text, coarse_text):
    digest = hashlib.sha256()
    digest.update(reference_text.encode("utf-8"))
    digest.update(b"\0")
    digest.update(coarse_text.encode("utf-8"))
    return digest.hexdigest()[:32]


def _load_cached(cache_dir, reference_text, coarse_text):
    if not cache_dir:
        return None
    path = os.path.join(cache_dir, _cache_key(reference_text, coarse_text) + ".json")
    if not os.path.exists(path):
        logger.debug("Cache miss %s", path)
        return None
    with output_file(path, "r") as file:
        try:
            data = json.load(file)
        except ValueError:
            logger.warning("Unreadable cache entry %s, recomputing", path)
            return None
    if data.get("reference") != reference_text or data.get("coarse") != coarse_text:
        logger.warning("Cache entry %s belongs to other configs, recomputing", path)
        return None
    logger.debug("Cache hit %s", path)
    return DifferenceSeries.from_dict(data["series"])


def _store_cached(cache_dir, reference_text, coarse_text, series):
    if not cache_dir:
        return
    ensure_directory(cache_dir)
    path = os.path.join(cache_dir, _cache_key(reference_text, coarse_text) + ".json")
    with output_file(path) as file:
        json.dump({"reference": reference_text, "coarse": coarse_text, "series": series.to_dict()}, file,
                  indent=1, sort_keys=True)


def refined_grids(reference_grid, direction, levels):
    """Coarse grids for refinement levels 1..levels along one direction."""
    if direction not in DIRECTIONS:
        raise ConfigurationError("Unknown refinement direction '{}'".format(direction), key="directions")
    grids = {}
    for level in range(1, levels + 1):
        factor = 2 ** level
        factors = {"x_factor": 1, "y_factor": 1, "t_factor": 1}
        factors[direction + "_factor"] = factor
        grids[level] = coarser_grid(reference_grid, **factors)
    return grids


def refinement_study(base_config, direction, levels, reference_grid, cache_dir=None, emit=None):
    """Ratios of successive differences against a fine reference run.

    The reference and all coarse runs that are not cached advance in lockstep, so only one level
    of each run is held in memory.

    :param RunConfig base_config: physics, packet, potential and run options
    :param str direction: x, y or t
    :param int levels: finest to coarsest refinement exponent
    :param GridSpec reference_grid: reference mesh
    :param str cache_dir: directory of cached difference series, or None
    :param emit: callable turning a config into its text, used as cache key
    :return RatioTable:
    """
    if levels < 1:
        raise ConfigurationError("A refinement study needs at least one level", key="levels")
    reference_config = base_config._replace(grid=reference_grid, snapshots=())
    grids = refined_grids(reference_grid, direction, levels)
    configs = {level: base_config._replace(grid=grid, snapshots=()) for level, grid in grids.items()}
    reference_text = emit(reference_config) if emit else repr(reference_config)
    texts = {level: emit(config) if emit else repr(config) for level, config in configs.items()}

    series = {}
    for level in configs:
        cached = _load_cached(cache_dir, reference_text, texts[level])
        if cached is not None:
            series[level] = cached
    pending = [level for level in configs if level not in series]
    if pending:
        logger.info("Direction %s: reference %s, %d coarse runs", direction, reference_grid.describe(),
                    len(pending))
        computed = _lockstep(reference_config, {level: configs[level] for level in pending})
        for level, result in computed.items():
            _store_cached(cache_dir, reference_text, texts[level], result)
            series[level] = result
    table = RatioTable.from_series(direction, reference_grid, grids, series)
    for row in table.rows:
        logger.info("%s l=%d J=%d K=%d M=%d E_C=%.3e E_L2=%.3e R_C=%s (order %s)", direction, row.level, row.J,
                    row.K, row.M, row.e_c, row.e_l2, "-" if row.r_c is None else "{:.2f}".format(row.r_c),
                    row.order_c)
    return table


def _lockstep(reference_config, coarse_configs):
    reference = Simulation.from_config(reference_config)
    ref_grid = reference_config.grid
    runs = {}
    for level, config in coarse_configs.items():
        simulation = Simulation.from_config(config)
        comparison = _Comparison(ref_grid, config.grid)
        iterator = simulation.iterate()
        runs[level] = [comparison, iterator, next(iterator)]
    for state in reference.iterate():
        for level, run in runs.items():
            comparison, iterator, coarse = run
            if coarse is None or state.m != coarse.m * comparison.t_factor:
                continue
            comparison.add(state.field, coarse.field, coarse.m)
            run[2] = next(iterator, None)
    return {level: run[0].series for level, run in runs.items()}
