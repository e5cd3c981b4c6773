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
from collections import namedtuple

import numpy as np

from schrodinger_tbc.errors import ConfigurationError, MeshMismatchError

logger = logging.getLogger(__name__)

TRANSFORMS = ("fft", "direct")

BaseGridSpec = namedtuple("GridSpec", ("X", "Y", "T", "J", "K", "M"))


def is_power_of_two(value):
    return value >= 1 and value & (value - 1) == 0


class GridSpec(BaseGridSpec):
    """Uniform mesh on [0, X] x [0, Y] x [0, T].

    ``M = 0`` describes a degenerate run holding only the initial level.
    """

    __slots__ = ()

    def __new__(cls, X, Y, T, J, K, M):
        for key, value in (("X", X), ("Y", Y), ("T", T)):
            if not value > 0:
                raise ConfigurationError("{} must be strictly positive, got {}".format(key, value), key=key)
        for key, value, lowest in (("J", J, 2), ("K", K, 2), ("M", M, 0)):
            if int(value) != value or value < lowest:
                raise ConfigurationError("{} must be an integer >= {}, got {}".format(key, lowest, value), key=key)
        return super(GridSpec, cls).__new__(cls, float(X), float(Y), float(T), int(J), int(K), int(M))

    @property
    def h_x(self):
        return self.X / self.J

    @property
    def h_y(self):
        return self.Y / self.K

    @property
    def tau(self):
        if self.M == 0:
            raise ConfigurationError("Time step is undefined for M = 0", key="M")
        return self.T / self.M

    @property
    def x(self):
        return np.arange(self.J + 1) * self.h_x

    @property
    def y(self):
        return np.arange(self.K + 1) * self.h_y

    @property
    def shape(self):
        return self.J + 1, self.K + 1

    def t(self, m):
        return m * self.tau if self.M else 0.0

    def describe(self):
        return "X={g.X!r} Y={g.Y!r} T={g.T!r} J={g.J} K={g.K} M={g.M}".format(g=self)


def build_grid(X, Y, T, J, K, M, transform="fft"):
    """Build and validate a uniform mesh.

    :param float X: strip extent in x
    :param float Y: strip width
    :param float T: time horizon
    :param int J: number of x intervals
    :param int K: number of y intervals
    :param int M: number of time steps
    :param str transform: sine transform path, ``fft`` or ``direct``
    :return GridSpec:
    :raises ConfigurationError
    """
    if transform not in TRANSFORMS:
        raise ConfigurationError("Unknown transform '{}', expected one of {}".format(
            transform, ", ".join(TRANSFORMS)), key="transform")
    grid = GridSpec(X, Y, T, J, K, M)
    if transform == "fft" and not is_power_of_two(grid.K):
        raise ConfigurationError("K={} is not a power of two as the fft transform requires; "
                                 "select transform 'direct' for the O(K^2) fallback".format(grid.K), key="K")
    logger.debug("Grid %s: h_x=%g h_y=%g", grid.describe(), grid.h_x, grid.h_y)
    return grid


class WaveField(object):
    """Complex values on the (J+1) x (K+1) node lattice at one time level."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=complex)
        if values.shape != grid.shape:
            raise MeshMismatchError("Field shape {} does not match grid shape {}".format(values.shape, grid.shape))
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def __eq__(self, other):
        return (isinstance(other, WaveField) and self.grid == other.grid
                and np.array_equal(self.values, other.values))

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class ModeLine(object):
    __slots__ = ("q", "values")

    def __init__(self, grid, q, values):
        if not 1 <= q <= grid.K - 1:
            raise MeshMismatchError("Mode index q={} outside 1..{}".format(q, grid.K - 1))
        values = np.array(values, dtype=complex)
        if values.shape != (grid.J + 1,):
            raise MeshMismatchError("Mode line needs {} values, got {}".format(grid.J + 1, values.shape))
        values.setflags(write=False)
        self.q = q
        self.values = values


def squared_l2(values, grid, include_boundary=False):
    interior = values[1:grid.J, 1:grid.K]
    total = np.sum(interior.real ** 2 + interior.imag ** 2) * grid.h_x * grid.h_y
    if include_boundary:
        edge = values[grid.J, 1:grid.K]
        total += np.sum(edge.real ** 2 + edge.imag ** 2) * 0.5 * grid.h_x * grid.h_y
    return float(total)


def norm_l2(field, include_boundary=False):
    """Mesh L2 norm over interior nodes.

    :param WaveField field:
    :param bool include_boundary: add the j=J column with half weight
    :return float:
    """
    return np.sqrt(squared_l2(field.values, field.grid, include_boundary))


def norm_c(field):
    return float(np.max(np.abs(field.values)))


def _check_factor(name, factor, count):
    if not is_power_of_two(factor):
        raise MeshMismatchError("Restriction factor {}={} is not a power of two".format(name, factor))
    if count % factor:
        raise MeshMismatchError("{} intervals ({}) are not divisible by {}".format(name, count, factor))


def coarser_grid(grid, x_factor=1, y_factor=1, t_factor=1):
    _check_factor("x", x_factor, grid.J)
    _check_factor("y", y_factor, grid.K)
    _check_factor("t", t_factor, grid.M)
    return GridSpec(grid.X, grid.Y, grid.T, grid.J // x_factor, grid.K // y_factor, grid.M // t_factor)


def restrict(fine, x_factor=1, y_factor=1):
    """Sample a field at the nodes of a mesh coarser by powers of two.

    :param WaveField fine:
    :param int x_factor: coarsening factor in x
    :param int y_factor: coarsening factor in y
    :return WaveField:
    :raises MeshMismatchError
    """
    grid = coarser_grid(fine.grid, x_factor, y_factor)
    return WaveField(grid, fine.values[::x_factor, ::y_factor])
