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
from functools import lru_cache

import numpy as np
import scipy.fft

from schrodinger_tbc.errors import BoundaryViolationError, ConfigurationError
from schrodinger_tbc.mesh import is_power_of_two

logger = logging.getLogger(__name__)

ENDPOINT_TOLERANCE = 1e-12

ModeEigenvalues = namedtuple("ModeEigenvalues", ("lambda_", "sigma"))


class SineTransform(object):
    """Discrete sine transform in y for lines with zero endpoints.

    The forward transform carries the 2/K factor, the inverse is the plain synthesis sum.
    ``fft`` needs K = 2^p; ``direct`` multiplies by a precomputed sine table.
    Instances are read-only after construction and may be shared between threads.
    """

    __slots__ = ("K", "method", "workers", "_table")

    def __init__(self, K, method="fft", workers=None):
        if method not in ("fft", "direct"):
            raise ConfigurationError("Unknown transform '{}'".format(method), key="transform")
        if method == "fft" and not is_power_of_two(K):
            raise ConfigurationError("K={} is not a power of two as the fft transform requires; "
                                     "select transform 'direct' for the O(K^2) fallback".format(K), key="K")
        self.K = K
        self.method = method
        self.workers = workers
        self._table = None
        if method == "direct":
            index = np.arange(1, K)
            table = np.sin(np.pi * np.outer(index, index) / K)
            table.setflags(write=False)
            self._table = table

    def _dst1(self, values):
        kwargs = {"type": 1, "axis": -1}
        if self.workers:
            kwargs["workers"] = self.workers
        return scipy.fft.dst(values.real, **kwargs) + 1j * scipy.fft.dst(values.imag, **kwargs)

    def forward(self, values):
        """Sine coefficients q=1..K-1 along the last axis.

        :param values: complex array with last axis of length K+1
        :return: complex array with last axis of length K-1
        :raises BoundaryViolationError: when an endpoint is not zero
        """
        values = np.asarray(values, dtype=complex)
        if values.shape[-1] != self.K + 1:
            raise ConfigurationError("Line length {} does not match K+1={}".format(values.shape[-1], self.K + 1))
        endpoint = max(float(np.max(np.abs(values[..., 0]))), float(np.max(np.abs(values[..., self.K]))))
        if endpoint > ENDPOINT_TOLERANCE:
            raise BoundaryViolationError("Sine transform input has endpoint modulus {:.3g} above {:g}; "
                                         "the Dirichlet rows were violated upstream".format(
                                             endpoint, ENDPOINT_TOLERANCE))
        inner = values[..., 1:self.K]
        if self.method == "fft":
            return self._dst1(inner) / self.K
        return (2.0 / self.K) * np.dot(inner, self._table)

    def inverse(self, coeffs):
        """Synthesis sum with exactly zero endpoints.

        :param coeffs: complex array with last axis of length K-1
        :return: complex array with last axis of length K+1
        """
        coeffs = np.asarray(coeffs, dtype=complex)
        out = np.zeros(coeffs.shape[:-1] + (self.K + 1,), dtype=complex)
        if self.method == "fft":
            out[..., 1:self.K] = 0.5 * self._dst1(coeffs)
        else:
            out[..., 1:self.K] = np.dot(coeffs, self._table)
        return out


@lru_cache(maxsize=32)
def plan(K, method=None):
    """Shared transform for K, fft when K is a power of two unless a method is forced."""
    if method is None:
        method = "fft" if is_power_of_two(K) else "direct"
    logger.debug("Build %s sine transform for K=%d", method, K)
    return SineTransform(K, method)


def dst_forward(line, transform=None):
    line = np.asarray(line, dtype=complex)
    transform = transform or plan(line.shape[-1] - 1)
    return transform.forward(line)


def dst_inverse(coeffs, transform=None):
    coeffs = np.asarray(coeffs, dtype=complex)
    transform = transform or plan(coeffs.shape[-1] + 1)
    return transform.inverse(coeffs)


def _half_angle_sine(grid):
    q = np.arange(1, grid.K)
    return np.sin(np.pi * q * grid.h_y / (2.0 * grid.Y))


def eigenvalues(grid):
    """Eigenvalues of the y-difference operator and of the Numerov average in y.

    :param GridSpec grid:
    :return ModeEigenvalues: arrays indexed by q-1
    """
    s = _half_angle_sine(grid)
    lambda_ = (2.0 / grid.h_y * s) ** 2
    sigma = 1.0 - s ** 2 / 3.0
    return ModeEigenvalues(lambda_, sigma)


def numerov_weight(grid, eig=None):
    """sigma_q * [1 + (h_x h_y lambda_q / (12 sigma_q))^2], positive for every mode."""
    eig = eig or eigenvalues(grid)
    return eig.sigma * (1.0 + (grid.h_x * grid.h_y * eig.lambda_ / (12.0 * eig.sigma)) ** 2)
