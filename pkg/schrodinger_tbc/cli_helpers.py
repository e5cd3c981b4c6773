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
from functools import wraps

import click

from schrodinger_tbc.config import load_config
from schrodinger_tbc.utils import ensure_directory

logger = logging.getLogger(__name__)

OUTPUT_ENV = "SCHRODINGER_TBC_OUTPUT"
DEFAULT_OUTPUT = "schrodinger-output"


def output_directory(out, config=None):
    """Pick the output directory: option or env, then the config's own, then a default under the cwd."""
    path = out or (config.output if config is not None else None) or DEFAULT_OUTPUT
    ensure_directory(path)
    logger.debug("Output directory %s", os.path.abspath(path))
    return path


def config_from_argument(func):
    """Replace the ``config`` name or path and the threads and transform overrides by a loaded RunConfig."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        overrides = {name: kwargs.pop(name, None) for name in ("threads", "transform")}
        config = load_config(kwargs.pop("config"), **overrides)
        return func(*args, config=config, **kwargs)

    return wrapper


class IntList(click.ParamType):
    name = "integer list"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            items = tuple(int(item) for item in value.replace(" ", "").split(",") if item)
        except ValueError:
            self.fail("{!r} is not a comma separated list of integers".format(value), param, ctx)
        if not items:
            self.fail("empty list", param, ctx)
        return items


class Mutex(click.Option):
    def __init__(self, *args, **kwargs):
        self.exclusive_with = kwargs.pop("exclusive_with")
        if not self.exclusive_with:
            raise click.UsageError("'exclusive_with' parameter is required")

        kwargs["help"] = ("{orig_help} Option is mutually exclusive with [{options}]".format(
            orig_help=kwargs.get("help", ""), options=", ".join(self.exclusive_with)).strip())
        super(Mutex, self).__init__(*args, **kwargs)

    def handle_parse_result(self, ctx, opts, args):
        current_opt = self.name in opts
        for mutex_opt in self.exclusive_with:
            if mutex_opt in opts:
                if current_opt:
                    raise click.UsageError("Illegal usage: '{name}' is mutually exclusive with {opts}".format(
                        name=str(self.name), opts=str(mutex_opt)))
        return super(Mutex, self).handle_parse_result(ctx, opts, args)
