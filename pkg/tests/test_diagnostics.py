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

import logging
import math

import mock
import numpy as np
import pytest

from schrodinger_tbc import diagnostics
from schrodinger_tbc.config import emit_config, load_config, load_study
from schrodinger_tbc.diagnostics import (DifferenceSeries, RatioTable, _lockstep, difference_norms, nearest_order,
                                         reference_ratio, refined_grids, refinement_study, simulation_levels)
from schrodinger_tbc.errors import ConfigurationError, MeshMismatchError
from schrodinger_tbc.mesh import GridSpec, WaveField, build_grid, restrict
from schrodinger_tbc.stepper import Simulation


def random_field(grid, seed):
    rng = np.random.RandomState(seed)
    values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return WaveField(grid, values)


def tiny_example_a(J=64, K=16, M=16):
    config = load_config("example-a")
    grid = build_grid(config.grid.X, config.grid.Y, config.grid.T, J, K, M)
    return config._replace(grid=grid, geometry="closed-box", snapshots=(), threads=1)


@pytest.mark.parametrize(
    "order, level, ratio", [
        (2, 1, 5.0),
        (4, 1, 17.0),
        (1, 1, 3.0),
        (4, 2, 4095.0 / 255.0),
    ]
)
def test_reference_ratio(order, level, ratio):
    assert reference_ratio(order, level) == pytest.approx(ratio)


def test_reference_ratio_limit():
    assert reference_ratio(2, 30) == pytest.approx(4.0)


@pytest.mark.parametrize("order, level", [(0, 1), (-1, 2), (2, 0)])
def test_reference_ratio_raise(order, level):
    with pytest.raises(ConfigurationError):
        reference_ratio(order, level)


def test_nearest_order():
    assert nearest_order(16.1, 1) == 4
    assert nearest_order(4.4, 2) == 2
    assert nearest_order(None, 1) is None
    assert nearest_order(float("inf"), 1) is None


def test_difference_series_dict_keeps_missing_values():
    series = DifferenceSeries()
    series.append(0, 0.0, 1.0, 2.0, float("nan"), 0.5)
    series.append(1, 0.1, 3.0, 1.0, 0.25, float("nan"))
    data = series.to_dict()
    assert data["rel_c"] == [None, 0.25]
    restored = DifferenceSeries.from_dict(data)
    assert math.isnan(restored.rel_c[0])
    assert restored.max_abs_c == 3.0
    assert restored.max_rel_c == 0.25
    assert restored.max_rel_l2 == 0.5
    assert len(restored) == 2


def test_compare_with_itself_is_zero():
    grid = GridSpec(1, 1, 1, 8, 8, 4)
    levels = [(m, random_field(grid, m)) for m in range(5)]
    series = difference_norms(levels, levels)
    assert series.levels == [0, 1, 2, 3, 4]
    assert series.abs_c == [0.0] * 5
    assert series.rel_l2 == [0.0] * 5


def test_difference_norms_on_nested_meshes():
    fine_grid = GridSpec(1, 1, 1, 8, 8, 4)
    coarse_grid = GridSpec(1, 1, 1, 4, 4, 2)
    fine = [(m, random_field(fine_grid, m)) for m in range(5)]
    coarse = [(m, random_field(coarse_grid, 10 + m)) for m in range(3)]
    series = difference_norms(fine, coarse)
    assert series.levels == [0, 1, 2]
    assert series.times == pytest.approx([0.0, 0.5, 1.0])
    restricted = restrict(fine[2][1], 2, 2).values
    expected = np.max(np.abs(coarse[1][1].values - restricted))
    assert series.abs_c[1] == pytest.approx(expected)
    assert series.rel_c[1] == pytest.approx(expected / np.max(np.abs(restricted)))

    swapped = difference_norms(coarse, fine)
    assert swapped.abs_c == pytest.approx(series.abs_c)
    assert swapped.rel_c[1] == pytest.approx(expected / np.max(np.abs(coarse[1][1].values)))


def test_difference_norms_skips_unmatched_levels():
    fine_grid = GridSpec(1, 1, 1, 8, 8, 4)
    coarse_grid = GridSpec(1, 1, 1, 8, 8, 2)
    fine = [(m, random_field(fine_grid, m)) for m in (0, 1, 3, 4)]
    coarse = [(m, random_field(coarse_grid, m)) for m in (0, 1, 2)]
    assert difference_norms(fine, coarse).levels == [0, 2]


def test_relative_difference_absent_for_vanishing_reference(caplog):
    grid = GridSpec(1, 1, 1, 4, 4, 1)
    reference = [(0, WaveField.zeros(grid))]
    other = [(0, random_field(grid, 1))]
    with caplog.at_level(logging.WARNING):
        series = difference_norms(reference, other)
    assert "relative difference omitted" in caplog.text
    assert series.abs_c[0] > 0
    assert math.isnan(series.rel_c[0])
    assert math.isnan(series.rel_l2[0])


@pytest.mark.parametrize(
    "other", [
        GridSpec(1, 1, 1, 4, 16, 4),
        GridSpec(1, 1, 1, 6, 8, 4),
        GridSpec(2, 1, 1, 8, 8, 4),
    ]
)
def test_difference_norms_raise(other):
    grid = GridSpec(1, 1, 1, 8, 8, 4)
    with pytest.raises(MeshMismatchError):
        difference_norms([(0, WaveField.zeros(grid))], [(0, WaveField.zeros(other))])


def test_refined_grids():
    grids = refined_grids(GridSpec(4, 4.2, 0.05, 1600, 128, 2000), "x", 3)
    assert [grids[level].J for level in (1, 2, 3)] == [800, 400, 200]
    assert {grids[level].M for level in grids} == {2000}
    with pytest.raises(ConfigurationError):
        refined_grids(GridSpec(4, 4.2, 0.05, 1600, 128, 2000), "z", 3)
    with pytest.raises(MeshMismatchError):
        refined_grids(GridSpec(4, 4.2, 0.05, 1600, 128, 2000), "t", 5)


def test_ratio_table_rows():
    reference = GridSpec(1, 1, 1, 64, 8, 8)
    grids = refined_grids(reference, "x", 3)
    series = {}
    for level, scale in ((1, 1.0), (2, 4.0), (3, 16.0)):
        entry = DifferenceSeries()
        entry.append(0, 0.0, scale, scale / 2, 0.0, 0.0)
        series[level] = entry
    table = RatioTable.from_series("x", reference, grids, series)
    assert [row.level for row in table.rows] == [3, 2, 1]
    assert table.rows[0].r_c is None
    assert table.rows[1].r_c == pytest.approx(4.0)
    assert table.rows[2].r_l2 == pytest.approx(4.0)
    assert table.rows[1].J == 16
    assert table.reference_ratios((2,))[2] == [reference_ratio(2, level) for level in (3, 2, 1)]


def test_lockstep_matches_full_histories():
    reference = tiny_example_a(64, 16, 16)
    coarse = tiny_example_a(64, 16, 4)
    computed = _lockstep(reference, {2: coarse})[2]
    expected = difference_norms(simulation_levels(Simulation.from_config(reference)),
                                simulation_levels(Simulation.from_config(coarse)))
    assert computed.levels == expected.levels == [0, 1, 2, 3, 4]
    assert computed.abs_c == expected.abs_c
    assert computed.abs_c[0] == 0.0
    assert computed.abs_c[-1] > 0


def test_refinement_study_uses_cache(tmpdir):
    base = tiny_example_a()
    reference = base.grid
    cache = str(tmpdir.join("cache"))
    first = refinement_study(base, "t", 2, reference, cache_dir=cache, emit=emit_config)
    assert len(tmpdir.join("cache").listdir()) == 2
    with mock.patch("schrodinger_tbc.diagnostics._lockstep") as lockstep:
        second = refinement_study(base, "t", 2, reference, cache_dir=cache, emit=emit_config)
    lockstep.assert_not_called()
    assert [row.e_c for row in first.rows] == [row.e_c for row in second.rows]
    assert [row.M for row in first.rows] == [4, 8]


def test_refinement_study_ignores_foreign_cache_entry(tmpdir):
    base = tiny_example_a()
    cache = str(tmpdir.join("cache"))
    refinement_study(base, "t", 1, base.grid, cache_dir=cache, emit=emit_config)
    with mock.patch("schrodinger_tbc.diagnostics._load_cached", return_value=None) as loaded:
        refinement_study(base, "t", 1, base.grid, cache_dir=cache, emit=emit_config)
    loaded.assert_called_once()
    entry = tmpdir.join("cache").listdir()[0]
    entry.write("{not json")
    with mock.patch("schrodinger_tbc.diagnostics._lockstep", wraps=diagnostics._lockstep) as lockstep:
        refinement_study(base, "t", 1, base.grid, cache_dir=cache, emit=emit_config)
    lockstep.assert_called_once()


def test_refinement_study_needs_levels():
    base = tiny_example_a()
    with pytest.raises(ConfigurationError):
        refinement_study(base, "x", 0, base.grid)


def ratios(table):
    return [row.r_c for row in table.rows if row.r_c is not None]


@pytest.mark.slow
def test_example_a_desk_convergence_orders():
    study = load_study("example-a-desk")
    base = study.base._replace(threads=None)
    in_t = refinement_study(base, "t", study.levels, study.reference, emit=emit_config)
    assert all(3.5 <= ratio <= 5.5 for ratio in ratios(in_t))
    in_x = refinement_study(base, "x", study.levels, study.reference, emit=emit_config)
    assert all(13.0 <= ratio <= 18.0 for ratio in ratios(in_x))


@pytest.mark.slow
def test_example_b_desk_convergence_order():
    study = load_study("example-b-desk")
    table = refinement_study(study.base._replace(threads=None), "x", study.levels, study.reference,
                             emit=emit_config)
    assert all(3.8 <= ratio <= 6.0 for ratio in ratios(table))


@pytest.mark.slow
def test_averaged_barrier_effect_exceeds_refinement_difference():
    base = load_config("example-b")
    averaged = base._replace(grid=build_grid(3, 2.8, 0.027, 600, 64, 600), snapshots=())
    pointwise = averaged._replace(potential=averaged.potential._replace(averaged=False))
    refined = averaged._replace(grid=build_grid(3, 2.8, 0.027, 1200, 64, 600))

    variant_gap = difference_norms(simulation_levels(Simulation.from_config(averaged)),
                                   simulation_levels(Simulation.from_config(pointwise))).max_abs_c
    refinement_gap = difference_norms(simulation_levels(Simulation.from_config(refined)),
                                      simulation_levels(Simulation.from_config(averaged))).max_abs_c
    assert variant_gap >= 10 * refinement_gap
