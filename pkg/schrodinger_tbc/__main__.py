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
import sys

import click

from schrodinger_tbc.cli_helpers import OUTPUT_ENV, IntList, Mutex, config_from_argument, output_directory
from schrodinger_tbc.config import emit_config, load_study
from schrodinger_tbc.diagnostics import difference_norms, refinement_study
from schrodinger_tbc.errors import ConfigurationError, MeshMismatchError, NumericalError, OutputError
from schrodinger_tbc.mesh import TRANSFORMS
from schrodinger_tbc.output import (load_snapshots, write_coefficients, write_differences, write_kernel,
                                    write_norms, write_ratio_table, write_report, write_snapshot)
from schrodinger_tbc.stepper import run
from schrodinger_tbc.tbc import TbcState, coefficient_table
from schrodinger_tbc.utils import root_logger_setup

logger = logging.getLogger(__name__)

out_option = click.option("--out", envvar=OUTPUT_ENV, type=click.Path(file_okay=False),
                          help="Output directory [env: {}]".format(OUTPUT_ENV))
threads_option = click.option("--threads", type=click.IntRange(min=1), default=None,
                              help="Worker threads for the mode solves, CPU count by default")


def _study_key(config):
    return emit_config(config._replace(threads=None, output=None))


@click.group()
@click.option("--verbose", "-v", default=False, is_flag=True, help="Enable verbose mode")
def cli(verbose):
    root_logger_setup(level=logging.DEBUG if verbose else logging.INFO)


@cli.command("run")
@click.argument("config")
@out_option
@threads_option
@click.option("--transform", type=click.Choice(TRANSFORMS), default=None, help="Sine transform path")
@config_from_argument
def run_command(config, out):
    """Advance a run config or preset (example-a, example-b) and write norms, snapshots and a report."""
    directory = output_directory(out, config)
    report = run(config)
    files = [write_norms(directory, report)]
    for m, field in report.snapshots.items():
        files.append(write_snapshot(directory, field, m))
    write_report(directory, report, emit_config(config), files)
    logger.info("Run finished, %d files written to %s", len(files) + 1, directory)


@cli.command("convergence")
@click.argument("study")
@out_option
@threads_option
@click.option("--cache", type=click.Path(file_okay=False), default=None, help="Cache directory of difference series")
def convergence(study, out, threads, cache):
    """Refinement ratios of a study config or preset (example-a-desk, example-b-x, ...)."""
    study = load_study(study)
    base = study.base if threads is None else study.base._replace(threads=threads)
    directory = output_directory(out, base)
    for direction in study.directions:
        table = refinement_study(base, direction, study.levels, study.reference, cache or study.cache,
                                 emit=_study_key)
        write_ratio_table(directory, table)


@cli.command("compare")
@click.argument("run-a", type=click.Path(exists=True, file_okay=False))
@click.argument("run-b", type=click.Path(exists=True, file_okay=False))
@out_option
def compare(run_a, run_b, out):
    """Differences of two runs at their common time levels, relative to RUN_A."""
    series = difference_norms(load_snapshots(run_a), load_snapshots(run_b))
    if not len(series):
        logger.warning("Runs %s and %s share no snapshot time level", run_a, run_b)
    path = write_differences(output_directory(out), series)
    logger.info("Differences at %d levels written to %s", len(series), path)


@cli.command("kernel-dump")
@click.argument("config")
@click.option("--modes", type=IntList(), default=None, cls=Mutex, exclusive_with=["all_modes"],
              help="Comma separated modes q")
@click.option("--all-modes", is_flag=True, default=False, cls=Mutex, exclusive_with=["modes"],
              help="Dump every mode 1..K-1")
@click.option("--mmax", type=click.IntRange(min=0), required=True, help="Last kernel level")
@out_option
@config_from_argument
def kernel_dump(config, modes, all_modes, mmax, out):
    """Write the convolution kernel R_q^0..R_q^mmax and the coefficients of the chosen modes."""
    if not modes and not all_modes:
        raise click.UsageError("One of --modes or --all-modes is required")
    grid = config.grid
    modes = tuple(range(1, grid.K)) if all_modes else modes
    for q in modes:
        if not 1 <= q <= grid.K - 1:
            raise ConfigurationError("Mode {} outside 1..{}".format(q, grid.K - 1), key="modes")
    table = coefficient_table(grid, config.physics)
    kernel = TbcState.from_coefficients(table, capacity=mmax).extend(mmax)
    directory = output_directory(out, config)
    for q in modes:
        write_kernel(directory, q, kernel[:, q - 1])
    write_coefficients(directory, [table.mode(q) for q in modes])
    logger.info("Kernel of %d modes up to level %d written to %s", len(modes), mmax, directory)


def main():
    try:
        cli(standalone_mode=False)
        sys.exit(0)
    except click.ClickException as e:
        e.show()
        sys.exit(e.exit_code)
    except (ConfigurationError, MeshMismatchError) as e:
        logging.error("Configuration error: %s", e)
        sys.exit(2)
    except NumericalError as e:
        logging.error("Numerical failure: %s", e)
        sys.exit(3)
    except OutputError as e:
        logging.error("I/O error: %s", e)
        sys.exit(4)
    except (KeyboardInterrupt, click.Abort):
        logging.warning("Interrupted by user")
        sys.exit(130)
    except Exception as e:
        logging.exception("Unknown error: %s", e)
        sys.exit(1)


if __name__ == "__main__":
    main()
