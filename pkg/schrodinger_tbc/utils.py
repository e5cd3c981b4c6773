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
import os
import time
from contextlib import contextmanager
from fractions import Fraction

from colorlog import ColoredFormatter

from schrodinger_tbc.errors import OutputError

FLOAT_FORMAT = "{:.17g}"

_handler = None


def format_float(value):
    """17 significant digits, enough to round-trip any double."""
    return FLOAT_FORMAT.format(float(value))


def parse_number(text):
    """Parse a decimal float or a simple fraction such as ``1/120``.

    :param str text: value text
    :return float:
    :raises ValueError
    """
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_int_list(text):
    """Comma separated integers, blanks ignored."""
    return tuple(int(item) for item in text.replace(" ", "").split(",") if item)


@contextmanager
def output_file(path, mode="w"):
    try:
        with open(path, mode, newline="") as file:
            yield file
    except (IOError, OSError) as e:
        raise OutputError("Unable to access {}: {}".format(path, e), path=path)


def ensure_directory(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise OutputError("Unable to create output directory {}: {}".format(path, e), path=path)
    return path


@contextmanager
def phase_timer(timings, name):
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def root_logger_setup(level):
    global _handler
    colors = {
        "DEBUG": "green",
        "INFO": "cyan",
        "WARNING": "yellow",
        "ERROR": "red",
        "CRITICAL": "red,bg_white",
    }
    log_format = "%(log_color)s%(message)s"
    formatter = ColoredFormatter(log_format, log_colors=colors)

    handler = logging.StreamHandler()
    handler.setFormatter(formatter)

    logger = logging.getLogger()
    if _handler is not None:
        logger.removeHandler(_handler)
    logger.addHandler(handler)
    logger.setLevel(level)
    _handler = handler
