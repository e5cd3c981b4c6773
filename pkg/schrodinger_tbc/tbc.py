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

from schrodinger_tbc.errors import CoefficientError, NumericalError
from schrodinger_tbc.sine_transform import eigenvalues

logger = logging.getLogger(__name__)

COEFFICIENT_FIELDS = ("q", "lambda_q", "sigma_q", "c_hbar_q", "theta_q", "v_inf_q", "a_q", "alpha_q", "beta_q",
                      "phi_q", "c1_q", "kappa_q", "mu_q")

ModeCoefficients = namedtuple("ModeCoefficients", COEFFICIENT_FIELDS)


class CoefficientTable(namedtuple("CoefficientTable", COEFFICIENT_FIELDS)):
    """Mode coefficients for q=1..K-1 as arrays indexed by q-1."""

    __slots__ = ()

    def mode(self, q):
        index = q - 1
        if not 0 <= index < len(self.q):
            raise CoefficientError("Mode outside the table", q=q)
        return ModeCoefficients(*(field[index].item() for field in self))


def coefficient_arrays(lambda_, sigma, grid, physics, q=None):
    """Transparent boundary coefficients for given eigenvalues of the y operators.

    No range checks on sigma and theta are made here, so analytic limits such as lambda=0 can be evaluated.

    :param lambda_: eigenvalues of the y second difference, array
    :param sigma: eigenvalues of the Numerov average in y, array
    :param GridSpec grid:
    :param PhysicsParams physics:
    :param q: mode numbers used in error messages
    :return CoefficientTable:
    :raises CoefficientError
    """
    lambda_ = np.atleast_1d(np.asarray(lambda_, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    q = np.arange(1, len(lambda_) + 1) if q is None else np.atleast_1d(q)
    h_x, tau = grid.h_x, grid.tau

    c_hbar_q = physics.c_hbar * (1.0 + (h_x * grid.h_y * lambda_ / (12.0 * sigma)) ** 2)
    theta_q = 1.0 / (12.0 * sigma)
    v_inf_q = physics.v_inf + physics.c_hbar * lambda_ / sigma
    a_q = v_inf_q / (2.0 * c_hbar_q) + 1j * physics.hbar / (tau * c_hbar_q)
    alpha_q = 2.0 * a_q + (1.0 - 4.0 * theta_q) * h_x ** 2 * a_q ** 2
    beta_q = 2.0 * a_q.real + (1.0 - 4.0 * theta_q) * h_x ** 2 * np.abs(a_q) ** 2

    for index in np.flatnonzero(alpha_q == 0):
        raise CoefficientError("alpha_q vanishes", q=int(q[index]))
    angle = np.angle(alpha_q)
    for index in np.flatnonzero(angle == 0):
        raise CoefficientError("alpha_q={!r} lies on the positive real axis where arg in (0, 2pi) is "
                               "undefined".format(complex(alpha_q[index])), q=int(q[index]))
    phi_q = np.where(angle < 0, angle + 2.0 * np.pi, angle)

    modulus = np.abs(alpha_q)
    c1_q = -0.5 * np.sqrt(modulus) * np.exp(-0.5j * phi_q)
    kappa_q = -np.exp(1j * phi_q)
    mu_q = beta_q / modulus
    for index in np.flatnonzero(~(np.abs(mu_q) < 1.0)):
        raise CoefficientError("mu_q={!r} is outside (-1, 1)".format(float(mu_q[index])), q=int(q[index]))

    return CoefficientTable(q, lambda_, sigma, c_hbar_q, theta_q, v_inf_q, a_q, alpha_q, beta_q, phi_q, c1_q,
                            kappa_q, mu_q)


def _check_range(name, values, low, high, q):
    bad = np.flatnonzero(~((values > low) & (values < high)))
    if bad.size:
        index = bad[0]
        raise CoefficientError("{}={!r} is outside ({!r}, {!r})".format(name, float(values[index]), low, high),
                               q=int(q[index]))


def coefficient_table(grid, physics):
    """Coefficients for all modes of a grid with the parameter ranges asserted.

    :param GridSpec grid:
    :param PhysicsParams physics:
    :return CoefficientTable:
    :raises CoefficientError
    """
    eig = eigenvalues(grid)
    table = coefficient_arrays(eig.lambda_, eig.sigma, grid, physics)
    _check_range("sigma_q", table.sigma_q, 2.0 / 3.0, 1.0, table.q)
    _check_range("theta_q", table.theta_q, 1.0 / 12.0, 1.0 / 8.0, table.q)
    logger.debug("Coefficients for %d modes, mu in [%.4f, %.4f]", len(table.q), table.mu_q.min(), table.mu_q.max())
    return table


def mode_coefficients(q, grid, physics):
    """Coefficient set of a single mode.

    :param int q: mode number, 1 <= q <= K-1
    :return ModeCoefficients:
    """
    return coefficient_table(grid, physics).mode(q)


class TbcState(object):
    """Convolution kernel and boundary trace history of one boundary, all modes at once.

    Column i holds mode q = i + 1. The kernel grows lazily; the history is append only and
    holds the traces of levels 0..m-1 before level m is solved.
    """

    __slots__ = ("c1", "kappa", "mu", "kernel", "history", "kernel_length", "history_length")

    def __init__(self, c1, kappa, mu, capacity=16):
        self.c1 = np.atleast_1d(np.asarray(c1, dtype=complex))
        self.kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
        self.mu = np.atleast_1d(np.asarray(mu, dtype=float))
        modes = len(self.c1)
        self.kernel = np.zeros((capacity + 1, modes), dtype=complex)
        self.history = np.zeros((capacity + 1, modes), dtype=complex)
        self.kernel_length = 0
        self.history_length = 0

    @classmethod
    def from_coefficients(cls, table, capacity=16):
        return cls(table.c1_q, table.kappa_q, table.mu_q, capacity)

    @classmethod
    def with_kernel(cls, kernel):
        """State with a fixed kernel, rows are levels and columns modes."""
        kernel = np.asarray(kernel, dtype=complex)
        if kernel.ndim == 1:
            kernel = kernel[:, None]
        modes = kernel.shape[1]
        state = cls(np.zeros(modes), np.ones(modes), np.zeros(modes), capacity=len(kernel) - 1)
        state.kernel[:] = kernel
        state.kernel_length = len(kernel)
        return state

    @property
    def modes(self):
        return len(self.c1)

    @staticmethod
    def _grow(buffer, rows):
        if rows <= len(buffer):
            return buffer
        grown = np.zeros((max(rows, 2 * len(buffer)), buffer.shape[1]), dtype=complex)
        grown[:len(buffer)] = buffer
        return grown

    def extend(self, up_to_m):
        """Kernel values R^0..R^up_to_m; extending twice to the same level is a no-op."""
        if up_to_m < self.kernel_length:
            return self.kernel[:up_to_m + 1]
        self.kernel = self._grow(self.kernel, up_to_m + 1)
        kernel = self.kernel
        kappa_mu = self.kappa * self.mu
        kappa2 = self.kappa ** 2
        for m in range(self.kernel_length, up_to_m + 1):
            if m == 0:
                kernel[0] = self.c1
            elif m == 1:
                kernel[1] = -self.c1 * kappa_mu
            else:
                kernel[m] = ((2 * m - 3) / m) * kappa_mu * kernel[m - 1] - ((m - 3) / m) * kappa2 * kernel[m - 2]
        logger.debug("Kernel extended from %d to %d levels", self.kernel_length, up_to_m + 1)
        self.kernel_length = up_to_m + 1
        return kernel[:up_to_m + 1]

    def record(self, m, traces):
        """Append the boundary trace of level m for every mode."""
        if m != self.history_length:
            raise NumericalError("Boundary trace recorded out of order: expected level {}".format(
                self.history_length), m=m)
        self.history = self._grow(self.history, m + 1)
        self.history[m] = traces
        self.history_length = m + 1

    def convolve(self, m, columns=slice(None)):
        """Sum over p=1..m of R^p times the trace of level m-p; the p=0 term belongs to the unknown.

        :param int m: level being solved, m >= 1
        :param columns: mode columns to convolve
        :return: complex array over the selected modes
        """
        if m < 1 or self.kernel_length <= m:
            raise NumericalError("Kernel not extended to the requested level", m=m)
        if self.history_length < m:
            raise NumericalError("Boundary history holds {} levels, {} needed".format(self.history_length, m), m=m)
        terms = self.kernel[1:m + 1, columns] * self.history[m - 1::-1, columns]
        return np.sum(terms, axis=0)


def kernel_extend(state, q, up_to_m):
    """Kernel values R_q^0..R_q^up_to_m of one mode."""
    return state.extend(up_to_m)[:, q - 1].copy()


def convolve_history(state, q, m):
    """History convolution of one mode at level m."""
    return complex(state.convolve(m, columns=slice(q - 1, q))[0])
