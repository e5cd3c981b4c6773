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

import os

import pytest

from schrodinger_tbc.config import (PRESETS, RunConfig, emit_config, load_config, load_study, parse_config,
                                    parse_study, resolve_path)
from schrodinger_tbc.errors import ConfigurationError, OutputError
from schrodinger_tbc.mesh import GridSpec
from schrodinger_tbc.physics import PoschlTeller, RectangularBarrier, ZeroPotential

MINIMAL = """
[grid]
X = 4
Y = 4.2
T = 0.05
J = 400
K = 64
M = 100

[packet]
k = 42.42640687119285
alpha = 1/120
x0 = 1
y0 = 2.1
"""


def test_example_a_preset():
    config = load_config("example-a")
    assert isinstance(config, RunConfig)
    assert config.grid == GridSpec(4, 4.2, 0.05, 400, 64, 1000)
    assert config.potential == PoschlTeller(6, 47, 2)
    assert config.packet.alpha == 1.0 / 120
    assert config.geometry == "infinite-strip"
    assert config.snapshots == (0, 250, 500, 750, 1000)
    assert config.reference is None


def test_example_b_preset():
    config = load_config("example-b")
    assert (config.grid.X, config.grid.Y, config.grid.T) == (3.0, 2.8, 0.027)
    assert config.potential == RectangularBarrier(1.6, 1.7, 0.7, 2.1, 1500, averaged=True)


def test_defaults():
    config = parse_config(MINIMAL)
    assert config.physics == (1.0, 1.0, 0.0)
    assert config.potential == ZeroPotential()
    assert config.geometry == "semi-infinite"
    assert config.transform == "fft"
    assert config.norm == "interior"
    assert config.threads is None
    assert config.snapshots == ()
    assert not config.debug


def test_empty_file_lists_required_keys():
    with pytest.raises(ConfigurationError) as ex:
        parse_config("")
    message = str(ex.value)
    for key in ("grid.X", "grid.M", "packet.k", "packet.y0"):
        assert key in message


@pytest.mark.parametrize(
    "extra, key", [
        ("[run]\nspeed = 3\n", "speed"),
        ("[run]\nthreads = many\n", "threads"),
        ("[run]\nsnapshots = 0, 101\n", "snapshots"),
        ("[run]\ngeometry = torus\n", "geometry"),
        ("[run]\nnorm = energy\n", "norm"),
        ("[run]\ntransform = wavelet\n", "transform"),
        ("[run]\nthreads = 0\n", "threads"),
        ("[run]\ndebug = maybe\n", "debug"),
        ("[potential]\nkind = gaussian\n", "kind"),
        ("[potential]\nkind = poschl-teller\nalpha0 = 6\nc1 = 47\n", "x_star"),
        ("[potential]\nkind = zero\nlipschitz = 1\n", "lipschitz"),
        ("[potential]\nkind = poschl-teller\nalpha0 = 6\nc1 = 47\nx_star = 3.9\n", "potential"),
        ("[reference-potential]\nkind = rectangular\n", "kind"),
        ("[physics]\nhbar = -1\n", "hbar"),
        ("[extras]\nfoo = 1\n", "extras"),
    ]
)
def test_parse_config_raise(extra, key):
    with pytest.raises(ConfigurationError) as ex:
        parse_config(MINIMAL + extra)
    assert ex.value.key == key


def test_malformed_text():
    with pytest.raises(ConfigurationError):
        parse_config("X = 4\n")


def test_rectangular_barrier_must_fit_mesh():
    text = MINIMAL.replace("J = 400", "J = 256") + ("[potential]\nkind = rectangular\na = 1.6\nb = 1.7\nc = 0.7\n"
                                                    "d = 2.1\nQ = 1500\naveraged = true\n")
    with pytest.raises(ConfigurationError) as ex:
        parse_config(text)
    assert ex.value.key == "a"


def test_reference_potential_section():
    text = MINIMAL + ("[reference-potential]\nkind = poschl-teller\nalpha0 = 6\nc1 = 47\nx_star = 2\n"
                      "lipschitz = 1e4\nholder_exponent = 1\n")
    config = parse_config(text)
    assert config.reference == PoschlTeller(6, 47, 2)
    assert config.lipschitz == 1e4
    assert config.holder_exponent == 1.0


def test_constant_reference_potential():
    config = parse_config(MINIMAL + "[reference-potential]\nkind = constant\nlipschitz = 5\n")
    assert config.reference is None
    assert config.lipschitz == 5.0


@pytest.mark.parametrize("name", ["example-a", "example-b"])
def test_emit_round_trip(name):
    config = load_config(name)
    assert parse_config(emit_config(config)) == config


def test_emit_round_trip_with_run_options():
    text = MINIMAL + ("[reference-potential]\nkind = zero\nholder_exponent = 0.5\n"
                      "[run]\ngeometry = closed-box\nthreads = 3\nnorm = boundary\ndebug = yes\n"
                      "output = results\nresidual_tolerance = 1e-11\n")
    config = parse_config(text)
    assert parse_config(emit_config(config)) == config


def test_load_config_overrides():
    config = load_config("example-a", threads=2, transform="direct")
    assert config.threads == 2
    assert config.transform == "direct"
    assert load_config("example-a", threads=None).threads is None


def test_load_config_missing_file(tmpdir):
    with pytest.raises(OutputError):
        load_config(str(tmpdir.join("missing.ini")))


def test_resolve_path():
    assert os.path.isfile(resolve_path("example-a"))
    assert resolve_path("my/run.ini") == "my/run.ini"
    for name in PRESETS:
        assert os.path.isfile(resolve_path(name))


@pytest.mark.parametrize(
    "name, direction, levels, reference", [
        ("example-a-x", ("x",), 4, (3200, 256, 4444)),
        ("example-a-y", ("y",), 4, (1600, 512, 4444)),
        ("example-a-t", ("t",), 4, (1600, 256, 4000)),
        ("example-b-x", ("x",), 5, (4800, 256, 2400)),
        ("example-a-desk", ("x", "t"), 3, (1600, 128, 2000)),
        ("example-b-desk", ("x",), 3, (2400, 128, 1200)),
    ]
)
def test_study_presets(name, direction, levels, reference):
    study = load_study(name)
    assert study.directions == direction
    assert study.levels == levels
    assert (study.reference.J, study.reference.K, study.reference.M) == reference
    assert study.reference.X == study.base.grid.X


def test_study_with_relative_base(tmpdir):
    tmpdir.join("base.ini").write(MINIMAL)
    tmpdir.join("study.ini").write("[study]\nbase = base.ini\ndirections = t\nlevels = 2\ncache = cache\n"
                                   "[reference]\nJ = 400\nK = 64\nM = 400\n")
    study = load_study(str(tmpdir.join("study.ini")))
    assert study.base.grid.M == 100
    assert study.reference.M == 400
    assert study.cache == "cache"


@pytest.mark.parametrize(
    "text, key", [
        ("[study]\nbase = example-a\ndirections = z\nlevels = 2\n[reference]\nJ = 8\nK = 8\nM = 8\n",
         "directions"),
        ("[study]\nbase = example-a\ndirections = x\nlevels = 0\n[reference]\nJ = 8\nK = 8\nM = 8\n", "levels"),
        ("[study]\nbase = example-a\ndirections = x\nlevels = 2\n", "J"),
        ("[study]\nbase = example-a\ndirections = x\nlevels = 2\nmesh = 3\n", "mesh"),
    ]
)
def test_parse_study_raise(text, key):
    with pytest.raises(ConfigurationError) as ex:
        parse_study(text)
    assert ex.value.key == key
