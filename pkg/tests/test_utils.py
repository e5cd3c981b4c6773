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

import mock
import pytest

from schrodinger_tbc import utils
from schrodinger_tbc.errors import OutputError
from schrodinger_tbc.utils import (ensure_directory, format_float, output_file, parse_int_list, parse_number,
                                   phase_timer, root_logger_setup)


@pytest.mark.parametrize(
    "text, value", [
        ("4", 4.0),
        (" 0.05 ", 0.05),
        ("1/120", 1.0 / 120),
        ("-3/4", -0.75),
        ("1e-6", 1e-6),
    ]
)
def test_parse_number(text, value):
    assert parse_number(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1/0", "1/2/3"])
def test_parse_number_raise(text):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_number(text)


def test_parse_int_list():
    assert parse_int_list("0, 250,500 ,") == (0, 250, 500)
    assert parse_int_list("") == ()
    with pytest.raises(ValueError):
        parse_int_list("1, two")


def test_format_float_round_trip():
    value = 1.0 / 3.0
    assert float(format_float(value)) == value
    assert format_float(0.5) == "0.5"


def test_output_file_raise():
    with mock.patch("schrodinger_tbc.utils.open", side_effect=IOError("denied")):
        with pytest.raises(OutputError) as ex:
            with output_file("some/file.csv"):
                pass
    assert ex.value.path == "some/file.csv"


def test_output_file(tmpdir):
    path = str(tmpdir.join("file.txt"))
    with output_file(path) as file:
        file.write("a\n")
    with output_file(path, "r") as file:
        assert file.read() == "a\n"


def test_ensure_directory_raise():
    with mock.patch("schrodinger_tbc.utils.os.makedirs", side_effect=OSError("read-only")):
        with pytest.raises(OutputError):
            ensure_directory("out")


def test_phase_timer_accumulates():
    timings = {}
    with mock.patch("schrodinger_tbc.utils.time.perf_counter", side_effect=[1.0, 1.5, 2.0, 2.25]):
        with phase_timer(timings, "solve"):
            pass
        with phase_timer(timings, "solve"):
            pass
    assert timings == {"solve": 0.75}


def test_phase_timer_records_on_error():
    timings = {}
    with pytest.raises(RuntimeError):
        with phase_timer(timings, "phase"):
            raise RuntimeError("boom")
    assert "phase" in timings


def test_root_logger_setup_replaces_handler():
    root = logging.getLogger()
    before = list(root.handlers)
    try:
        root_logger_setup(logging.DEBUG)
        first = utils._handler
        root_logger_setup(logging.INFO)
        assert first not in root.handlers
        assert utils._handler in root.handlers
        assert root.level == logging.INFO
    finally:
        root.removeHandler(utils._handler)
        utils._handler = None
        for handler in before:
            if handler not in root.handlers:
                root.addHandler(handler)
