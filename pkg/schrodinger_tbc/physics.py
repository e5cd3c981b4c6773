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

from schrodinger_tbc.errors import ConfigurationError
from schrodinger_tbc.mesh import WaveField

logger = logging.getLogger(__name__)

BasePhysicsParams = namedtuple("PhysicsParams", ("hbar", "c_hbar", "v_inf"))
BasePacketParams = namedtuple("PacketParams", ("k", "alpha", "x0", "y0"))
BasePoschlTeller = namedtuple("PoschlTeller", ("alpha0", "c1", "x_star"))
BaseRectangularBarrier = namedtuple("RectangularBarrier", ("a", "b", "c", "d", "Q", "averaged"))


class PhysicsParams(BasePhysicsParams):
    """Constants of the equation: hbar, c_hbar = hbar^2 / (2 m0) and the asymptotic potential."""

    __slots__ = ()

    def __new__(cls, hbar=1.0, c_hbar=1.0, v_inf=0.0):
        if not hbar > 0:
            raise ConfigurationError("hbar must be positive, got {}".format(hbar), key="hbar")
        if not c_hbar > 0:
            raise ConfigurationError("c_hbar must be positive, got {}".format(c_hbar), key="c_hbar")
        return super(PhysicsParams, cls).__new__(cls, float(hbar), float(c_hbar), float(v_inf))


class PacketParams(BasePacketParams):
    __slots__ = ()

    def __new__(cls, k, alpha, x0, y0):
        if not alpha > 0:
            raise ConfigurationError("Packet width alpha must be positive, got {}".format(alpha), key="alpha")
        return super(PacketParams, cls).__new__(cls, float(k), float(alpha), float(x0), float(y0))


class ZeroPotential(namedtuple("ZeroPotential", ())):
    __slots__ = ()
    kind = "zero"
    x_only = True

    def evaluate(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def mesh_values(self, grid):
        return np.zeros(grid.shape)

    def validate(self, grid):
        pass


class PoschlTeller(BasePoschlTeller):
    """Barrier alpha0^2 c1 / cosh^2(alpha0 (x - x_star)), constant in y."""

    __slots__ = ()
    kind = "poschl-teller"
    x_only = True

    def __new__(cls, alpha0, c1, x_star):
        return super(PoschlTeller, cls).__new__(cls, float(alpha0), float(c1), float(x_star))

    def evaluate(self, x, y):
        z = np.abs(self.alpha0 * (np.asarray(x, dtype=float) - self.x_star))
        # sech written with exp(-|z|) so that far tails underflow to zero instead of overflowing
        e = np.exp(-z)
        sech = 2.0 * e / (1.0 + e * e)
        values = self.alpha0 ** 2 * self.c1 * sech ** 2
        return values + np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def mesh_values(self, grid):
        return self.evaluate(grid.x[:, None], grid.y[None, :])

    def validate(self, grid):
        pass


class RectangularBarrier(BaseRectangularBarrier):
    """Height Q on the open rectangle (a, b) x (c, d), zero elsewhere."""

    __slots__ = ()
    kind = "rectangular"
    x_only = False

    def __new__(cls, a, b, c, d, Q, averaged=False):
        if not a < b:
            raise ConfigurationError("Barrier needs a < b, got a={} b={}".format(a, b), key="a")
        if not c < d:
            raise ConfigurationError("Barrier needs c < d, got c={} d={}".format(c, d), key="c")
        return super(RectangularBarrier, cls).__new__(cls, float(a), float(b), float(c), float(d), float(Q),
                                                      bool(averaged))

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (self.a < x) & (x < self.b) & (self.c < y) & (y < self.d)
        return np.where(inside, self.Q, 0.0)

    def mesh_values(self, grid):
        if self.averaged:
            return averaged_mesh_potential(self, grid).values
        return self.evaluate(grid.x[:, None], grid.y[None, :])

    def validate(self, grid):
        if not (0 < self.a and self.b < grid.X and 0 < self.c and self.d < grid.Y):
            raise ConfigurationError("Barrier (a,b)x(c,d)=({},{})x({},{}) must lie inside the domain "
                                     "[0,{}]x[0,{}]".format(self.a, self.b, self.c, self.d, grid.X, grid.Y),
                                     key="a")
        if self.averaged:
            averaged_mesh_potential(self, grid)


class TabulatedMesh(object):
    __slots__ = ("values",)
    kind = "tabulated"
    x_only = False

    def __init__(self, values):
        values = np.array(values, dtype=float)
        values.setflags(write=False)
        self.values = values

    def evaluate(self, x, y):
        raise ConfigurationError("A tabulated potential is only defined on its mesh nodes")

    def mesh_values(self, grid):
        if self.values.shape != grid.shape:
            raise ConfigurationError("Tabulated potential shape {} does not match grid {}".format(
                self.values.shape, grid.shape))
        return self.values

    def validate(self, grid):
        self.mesh_values(grid)


def eval_potential(spec, x, y):
    """Pointwise value of an analytic potential.

    :param spec: ZeroPotential, PoschlTeller or RectangularBarrier
    :param x: abscissa, scalar or array
    :param y: ordinate, scalar or array
    :return: float or ndarray
    """
    values = spec.evaluate(x, y)
    return float(values) if np.ndim(values) == 0 else values


def mesh_potential(spec, grid):
    return np.array(spec.mesh_values(grid), dtype=float)


def _mesh_index(value, step, name):
    ratio = value / step
    index = int(round(ratio))
    if abs(ratio - index) > 1e-9 * max(1.0, abs(ratio)):
        raise ConfigurationError("Barrier edge {}={} is not a mesh node (step {}); choose J and K so that "
                                 "the barrier edges fall on the mesh".format(name, value, step), key=name)
    return index


def _edge_weights(count, low, high):
    weights = np.zeros(count + 1)
    weights[low + 1:high] = 1.0
    weights[low] = weights[high] = 0.5
    return weights


def averaged_mesh_potential(spec, grid):
    """Average a rectangular barrier over mesh cells.

    Interior nodes get Q, nodes on a face Q/2 and corner nodes Q/4.

    :param RectangularBarrier spec:
    :param GridSpec grid:
    :return TabulatedMesh:
    :raises ConfigurationError: when a barrier edge is off the mesh
    """
    ia = _mesh_index(spec.a, grid.h_x, "a")
    ib = _mesh_index(spec.b, grid.h_x, "b")
    ic = _mesh_index(spec.c, grid.h_y, "c")
    id_ = _mesh_index(spec.d, grid.h_y, "d")
    values = spec.Q * np.outer(_edge_weights(grid.J, ia, ib), _edge_weights(grid.K, ic, id_))
    logger.debug("Averaged barrier on nodes j=%d..%d, k=%d..%d", ia, ib, ic, id_)
    return TabulatedMesh(values)


def gaussian_values(packet, x, y):
    dx = np.asarray(x, dtype=float) - packet.x0
    dy = np.asarray(y, dtype=float) - packet.y0
    return np.exp(1j * packet.k * dx - (dx ** 2 + dy ** 2) / (4.0 * packet.alpha))


def gaussian_packet(packet, grid, zero_left=False):
    """Gaussian wave packet sampled on the mesh.

    Rows k=0 and k=K are zeroed, and column j=0 as well when ``zero_left`` is set.

    :param PacketParams packet:
    :param GridSpec grid:
    :param bool zero_left: semi-infinite strip, Dirichlet at x=0
    :return WaveField:
    :raises ConfigurationError: when the centre lies outside the domain
    """
    if not (0 <= packet.x0 <= grid.X and 0 <= packet.y0 <= grid.Y):
        raise ConfigurationError("Packet centre ({}, {}) lies outside [0,{}]x[0,{}]".format(
            packet.x0, packet.y0, grid.X, grid.Y), key="x0")
    values = gaussian_values(packet, grid.x[:, None], grid.y[None, :])
    values[:, 0] = values[:, grid.K] = 0
    if zero_left:
        values[0, :] = 0
    return WaveField(grid, values)


def reference_profile(spec, grid, physics):
    """Split-off potential V~ on the x nodes; ``None`` means the constant V_inf."""
    if spec is None:
        return np.full(grid.J + 1, physics.v_inf)
    if not spec.x_only:
        raise ConfigurationError("Reference potential must depend on x only, got '{}'".format(spec.kind),
                                 key="kind")
    return np.asarray(spec.evaluate(grid.x, 0.0), dtype=float)


def check_asymptotic_columns(values, grid, v_inf, columns, tolerance, name="V"):
    """Require ``values`` to equal V_inf within ``tolerance`` on the given x columns.

    :raises ConfigurationError
    """
    block = np.asarray(values)[list(columns)]
    deviation = float(np.max(np.abs(block - v_inf))) if block.size else 0.0
    if deviation > tolerance:
        raise ConfigurationError("{} deviates from V_inf={} by {:.3g} on columns j={} (tolerance {:.3g}); "
                                 "the transparent boundary needs the potential to be asymptotic there".format(
                                     name, v_inf, deviation, list(columns), tolerance), key="potential")
    return deviation


def check_uniqueness(grid, physics, lipschitz=None, holder_exponent=None):
    """Warn unless L * tau * h_x^alpha < 8 hbar holds for the split-off potential.

    :return bool: True when the condition was verified
    """
    if lipschitz is None or holder_exponent is None:
        logger.warning("Reference potential is not constant and no (lipschitz, holder_exponent) pair is set; "
                       "uniqueness of the split solution cannot be verified")
        return False
    value = lipschitz * grid.tau * grid.h_x ** holder_exponent
    if value >= 8 * physics.hbar:
        logger.warning("Uniqueness condition L*tau*h_x^alpha = %.4g < 8*hbar = %.4g is violated",
                       value, 8 * physics.hbar)
        return False
    logger.debug("Uniqueness condition holds: %.4g < %.4g", value, 8 * physics.hbar)
    return True
