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
from collections import OrderedDict, namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from schrodinger_tbc.errors import (BoundaryViolationError, ConfigurationError, NumericalError,
                                    TridiagonalSolveError)
from schrodinger_tbc.mesh import WaveField, norm_c, norm_l2
from schrodinger_tbc.physics import (check_asymptotic_columns, check_uniqueness, gaussian_packet, mesh_potential,
                                     reference_profile)
from schrodinger_tbc.sine_transform import SineTransform
from schrodinger_tbc.tbc import TbcState, coefficient_table
from schrodinger_tbc.utils import phase_timer

logger = logging.getLogger(__name__)

GEOMETRIES = ("semi-infinite", "infinite-strip", "closed-box")
MODE_CHUNK = 32
INITIAL_TRACE_TOLERANCE = 1e-12
# moduli below this are too close to underflow for a relative check
MODULUS_FLOOR = 1e-280


def _geometry_flags(geometry):
    if geometry not in GEOMETRIES:
        raise ConfigurationError("Unknown geometry '{}', expected one of {}".format(
            geometry, ", ".join(GEOMETRIES)), key="geometry")
    return geometry == "infinite-strip", geometry != "closed-box"


class PhaseMultiplier(object):
    """Half step exp-like factor (1 - i z) / (1 + i z) with z = tau dV / (4 hbar)."""

    __slots__ = ("values", "identity")

    def __init__(self, values):
        values = np.array(values, dtype=complex)
        values.setflags(write=False)
        self.values = values
        self.identity = bool(np.all(values == 1))


def build_phase_multiplier(delta_v, grid, physics, columns=None):
    """Phase multiplier of the potential difference on the active columns.

    :param delta_v: V - V~ on the mesh
    :param GridSpec grid:
    :param PhysicsParams physics:
    :param columns: x columns the multiplier acts on, all when None
    :return PhaseMultiplier:
    """
    z = grid.tau / (4.0 * physics.hbar) * np.asarray(delta_v, dtype=float)
    values = ((1.0 - z * z) - 2j * z) / (1.0 + z * z)
    if columns is not None:
        mask = np.zeros(grid.J + 1, dtype=bool)
        mask[list(columns)] = True
        values[~mask, :] = 1.0
    return PhaseMultiplier(values)


def phase_halfstep(field, multiplier):
    if multiplier.identity:
        return field
    return WaveField(field.grid, field.values * multiplier.values)


def check_modulus(before, after, m, label):
    """Raise unless the phase step kept |psi| pointwise to 1e-15 relative."""
    reference = np.abs(before)
    mask = reference > MODULUS_FLOOR
    if not np.any(mask):
        return 0.0
    drift = float(np.max(np.abs(np.abs(after[mask]) - reference[mask]) / reference[mask]))
    if drift > 1e-15:
        raise BoundaryViolationError("{} phase step changed the modulus by {:.3g} relative".format(label, drift), m=m)
    return drift


class TridiagonalMatrix(object):
    """Tridiagonal band, one column per mode.

    ``lower[j]`` multiplies x[j-1] and ``upper[j]`` multiplies x[j+1]; ``lower[0]`` and ``upper[-1]`` are unused.
    The elimination without pivoting is factored once and cached.
    """

    __slots__ = ("lower", "diag", "upper", "first_mode", "_factor")

    def __init__(self, lower, diag, upper, first_mode=1):
        self.lower = np.asarray(lower, dtype=complex)
        self.diag = np.asarray(diag, dtype=complex)
        self.upper = np.asarray(upper, dtype=complex)
        self.first_mode = first_mode
        self._factor = None

    @property
    def size(self):
        return len(self.diag)

    def select(self, columns):
        start = columns.start or 0
        return TridiagonalMatrix(self.lower[:, columns], self.diag[:, columns], self.upper[:, columns],
                                 self.first_mode + start)

    def dot(self, x):
        result = self.diag * x
        result[1:] += self.lower[1:] * x[:-1]
        result[:-1] += self.upper[:-1] * x[1:]
        return result

    def dense(self, column=0):
        diag = self.diag if self.diag.ndim == 1 else self.diag[:, column]
        lower = self.lower if self.lower.ndim == 1 else self.lower[:, column]
        upper = self.upper if self.upper.ndim == 1 else self.upper[:, column]
        return np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)

    def factor(self, m=None):
        if self._factor is not None:
            return self._factor
        n = self.size
        inverse = np.empty_like(self.diag)
        ratio = np.empty_like(self.diag)
        pivot = self.diag[0]
        for j in range(n):
            if j:
                pivot = self.diag[j] - self.lower[j] * ratio[j - 1]
            bad = np.flatnonzero(np.atleast_1d((pivot == 0) | ~np.isfinite(pivot)))
            if bad.size:
                raise TridiagonalSolveError("Zero pivot in row {}".format(j), q=self.first_mode + int(bad[0]), m=m)
            inverse[j] = 1.0 / pivot
            ratio[j] = self.upper[j] * inverse[j]
        self._factor = inverse, ratio
        return self._factor


ModeSystem = namedtuple("ModeSystem", ("matrix", "rhs", "m"))


def solve_tridiagonal(system, tolerance=1e-12):
    """Gaussian elimination on the band without pivoting, checked by the residual.

    :param ModeSystem system: right-hand side shaped like the matrix diagonal
    :param float tolerance: bound on max|Ax-b| / max|b| per mode
    :return: solution array shaped like the right-hand side
    :raises TridiagonalSolveError: zero pivot or residual above the tolerance
    """
    matrix, rhs = system.matrix, np.asarray(system.rhs, dtype=complex)
    inverse, ratio = matrix.factor(system.m)
    n = matrix.size
    x = np.empty_like(rhs)
    x[0] = rhs[0] * inverse[0]
    for j in range(1, n):
        x[j] = (rhs[j] - matrix.lower[j] * x[j - 1]) * inverse[j]
    for j in range(n - 2, -1, -1):
        x[j] -= ratio[j] * x[j + 1]

    residual = np.max(np.abs(matrix.dot(x) - rhs), axis=0)
    scale = np.max(np.abs(rhs), axis=0)
    relative = np.where(scale > 0, residual / np.where(scale > 0, scale, 1.0), residual)
    bad = np.flatnonzero(np.atleast_1d(~(relative <= tolerance)))
    if bad.size:
        index = int(bad[0])
        value = float(np.atleast_1d(relative)[index])
        raise TridiagonalSolveError("Residual {:.3g} exceeds {:g}".format(value, tolerance),
                                    q=matrix.first_mode + index, m=system.m)
    return x


class ModeOperator(object):
    """Banded per-mode operators of the Numerov Crank-Nicolson step in x.

    Row j of mode q reads (r S - H/2) u = (r S + H/2) b with r = i hbar / tau, S the theta_q average
    and H = -c_{hbar,q} D2 + S V~_q; boundary rows are Dirichlet or the discrete transparent condition.
    """

    def __init__(self, grid, physics, table, v_tilde, geometry):
        left_tbc, right_tbc = _geometry_flags(geometry)
        self.grid = grid
        self.geometry = geometry
        self.left_tbc = left_tbc
        self.right_tbc = right_tbc
        self.table = table
        self._matrices = {}

        J, h = grid.J, grid.h_x
        r = 1j * physics.hbar / grid.tau
        theta = table.theta_q[None, :]
        c = table.c_hbar_q[None, :]
        vt = np.asarray(v_tilde, dtype=float)[:, None] + (physics.c_hbar * table.lambda_q / table.sigma_q)[None, :]
        shape = (J + 1, len(table.q))
        self.c_hbar_q = table.c_hbar_q
        self.sigma_q = table.sigma_q

        lower = np.zeros(shape, dtype=complex)
        diag = np.zeros(shape, dtype=complex)
        upper = np.zeros(shape, dtype=complex)
        b_lower = np.zeros(shape, dtype=complex)
        b_diag = np.zeros(shape, dtype=complex)
        b_upper = np.zeros(shape, dtype=complex)

        inner = slice(1, J)
        diffusion = c / (2.0 * h * h)
        lower[inner] = r * theta + diffusion - 0.5 * theta * vt[0:J - 1]
        diag[inner] = r * (1.0 - 2.0 * theta) - 2.0 * diffusion - 0.5 * (1.0 - 2.0 * theta) * vt[1:J]
        upper[inner] = r * theta + diffusion - 0.5 * theta * vt[2:J + 1]
        b_lower[inner] = r * theta - diffusion + 0.5 * theta * vt[0:J - 1]
        b_diag[inner] = r * (1.0 - 2.0 * theta) + 2.0 * diffusion + 0.5 * (1.0 - 2.0 * theta) * vt[1:J]
        b_upper[inner] = r * theta - diffusion + 0.5 * theta * vt[2:J + 1]

        v_inf = table.v_inf_q[None, :]
        flux = c / (2.0 * h)
        near = h * (0.5 - theta)
        far = h * theta
        boundary_diag = flux - near * (r - 0.5 * v_inf) - c * table.c1_q[None, :]
        boundary_off = -flux - far * (r - 0.5 * v_inf)
        rhs_near = -(flux + near * (r + 0.5 * v_inf))
        rhs_far = flux - far * (r + 0.5 * v_inf)

        if right_tbc:
            diag[J], lower[J] = boundary_diag[0], boundary_off[0]
            b_diag[J], b_lower[J] = rhs_near[0], rhs_far[0]
        else:
            diag[J] = 1.0
        if left_tbc:
            diag[0], upper[0] = boundary_diag[0], boundary_off[0]
            b_diag[0], b_upper[0] = rhs_near[0], rhs_far[0]
        else:
            diag[0] = 1.0

        self.matrix = TridiagonalMatrix(lower, diag, upper)
        self.rhs_band = (b_lower, b_diag, b_upper)

    def matrix_for(self, columns):
        key = (columns.start, columns.stop)
        if key not in self._matrices:
            self._matrices[key] = self.matrix.select(columns)
        return self._matrices[key]

    def apply_rhs_band(self, breve, columns):
        b_lower, b_diag, b_upper = (band[:, columns] for band in self.rhs_band)
        rhs = b_diag * breve
        rhs[1:] += b_lower[1:] * breve[:-1]
        rhs[:-1] += b_upper[:-1] * breve[1:]
        return rhs


def assemble_mode_system(operator, breve, m, right=None, left=None, forcing=None, columns=slice(None)):
    """Linear system of level m for the selected modes.

    :param ModeOperator operator:
    :param breve: transformed half-stepped field, shape (J+1, modes in ``columns``)
    :param int m: level being computed
    :param TbcState right: right boundary state, kernel extended to m
    :param TbcState left: left boundary state for the infinite strip
    :param forcing: transformed forcing, same shape as ``breve``, or None
    :param slice columns: mode columns, column i is mode i+1
    :return ModeSystem:
    :raises NumericalError: kernel or history not ready for level m
    """
    J = operator.grid.J
    rhs = operator.apply_rhs_band(np.asarray(breve, dtype=complex), columns)
    if forcing is not None:
        rhs[1:J] += forcing[1:J] / operator.sigma_q[columns][None, :]
    c = operator.c_hbar_q[columns]
    if operator.right_tbc:
        if right is None:
            raise NumericalError("Right boundary state missing", m=m)
        rhs[J] += c * right.convolve(m, columns)
    if operator.left_tbc:
        if left is None:
            raise NumericalError("Left boundary state missing", m=m)
        rhs[0] += c * left.convolve(m, columns)
    return ModeSystem(operator.matrix_for(columns), rhs, m)


class SimulationState(object):
    __slots__ = ("field", "m", "right", "left", "timings")

    def __init__(self, field, m, right=None, left=None, timings=None):
        self.field = field
        self.m = m
        self.right = right
        self.left = left
        self.timings = timings if timings is not None else OrderedDict()


class Simulation(object):
    """Everything fixed for one run: mesh, operators, multiplier and the transform plan.

    :param GridSpec grid:
    :param PhysicsParams physics:
    :param potential: potential spec evaluated on the mesh
    :param str geometry: semi-infinite, infinite-strip or closed-box
    :param initial: WaveField at level 0
    :param reference: x-only potential split off as V~, constant V_inf when None
    :param forcing: callable ``forcing(t, grid)`` returning F on the mesh, taken at t = (m - 1/2) tau
    """

    def __init__(self, grid, physics, potential, geometry, initial, reference=None, transform="fft", threads=1,
                 forcing=None, debug=False, residual_tolerance=1e-12, potential_tolerance=1e-6,
                 lipschitz=None, holder_exponent=None):
        left_tbc, right_tbc = _geometry_flags(geometry)
        self.grid = grid
        self.physics = physics
        self.geometry = geometry
        self.left_tbc = left_tbc
        self.right_tbc = right_tbc
        self.forcing = forcing
        self.debug = debug
        self.residual_tolerance = residual_tolerance
        self.threads = max(1, int(threads or os.cpu_count() or 1))
        self.transform = SineTransform(grid.K, transform, workers=self.threads)

        v_mesh = mesh_potential(potential, grid)
        v_tilde = reference_profile(reference, grid, physics)
        J = grid.J
        right_columns = (J - 1, J)
        left_columns = (0, 1)
        if right_tbc:
            check_asymptotic_columns(v_mesh, grid, physics.v_inf, right_columns, potential_tolerance)
            check_asymptotic_columns(v_tilde, grid, physics.v_inf, right_columns, potential_tolerance, "V~")
        if left_tbc:
            check_asymptotic_columns(v_mesh, grid, physics.v_inf, left_columns, potential_tolerance)
            check_asymptotic_columns(v_tilde, grid, physics.v_inf, left_columns, potential_tolerance, "V~")
        if np.ptp(v_tilde) > 0 and grid.M:
            check_uniqueness(grid, physics, lipschitz, holder_exponent)

        first = 0 if left_tbc else 1
        last = J if right_tbc else J - 1
        self.active_columns = range(first, last + 1)
        self.initial = self._prepared_initial(initial)
        self.delta_v = v_mesh - v_tilde[:, None]
        self.table = None
        self.operator = None
        self.multiplier = None
        if grid.M:
            self.multiplier = build_phase_multiplier(self.delta_v, grid, physics, self.active_columns)
            self.table = coefficient_table(grid, physics)
            self.operator = ModeOperator(grid, physics, self.table, v_tilde, geometry)
            for columns in self._chunk_slices():
                self.operator.matrix_for(columns).factor(m=1)
        self.chunks = self._chunk_slices()

    def _chunk_slices(self):
        modes = self.grid.K - 1
        return [slice(start, min(start + MODE_CHUNK, modes)) for start in range(0, modes, MODE_CHUNK)]

    @classmethod
    def from_config(cls, config, forcing=None):
        left_tbc, _ = _geometry_flags(config.geometry)
        initial = gaussian_packet(config.packet, config.grid, zero_left=not left_tbc)
        return cls(config.grid, config.physics, config.potential, config.geometry, initial,
                   reference=config.reference, transform=config.transform, threads=config.threads,
                   forcing=forcing, debug=config.debug, residual_tolerance=config.residual_tolerance,
                   potential_tolerance=config.potential_tolerance, lipschitz=config.lipschitz,
                   holder_exponent=config.holder_exponent)

    def _prepared_initial(self, initial):
        grid = self.grid
        values = np.array(initial.values, dtype=complex)
        values[:, 0] = values[:, grid.K] = 0
        if not self.left_tbc:
            values[0] = 0
        if not self.right_tbc:
            values[grid.J] = 0
        columns = []
        if self.right_tbc:
            columns += [grid.J - 1, grid.J]
        if self.left_tbc:
            columns += [0, 1]
        if columns:
            tail = float(np.max(np.abs(values[columns])))
            if tail >= INITIAL_TRACE_TOLERANCE:
                raise ConfigurationError("Initial data reaches {:.3g} on boundary columns j={}; it must stay below "
                                         "{:g} there".format(tail, sorted(columns), INITIAL_TRACE_TOLERANCE),
                                         key="packet")
            if tail > 0:
                logger.warning("Initial data tail on the transparent boundary columns j=%s: %.3g, tolerated below %g",
                               sorted(columns), tail, INITIAL_TRACE_TOLERANCE)
        return WaveField(grid, values)

    def _forcing_coefficients(self, m):
        if self.forcing is None:
            return None
        grid = self.grid
        values = np.asarray(self.forcing((m - 0.5) * grid.tau, grid), dtype=complex)
        if values.shape != grid.shape:
            raise ConfigurationError("Forcing shape {} does not match grid {}".format(values.shape, grid.shape),
                                     key="forcing")
        # zero on the Dirichlet columns and on the two columns of each transparent boundary
        first = 2 if self.left_tbc else 1
        last = grid.J - 2 if self.right_tbc else grid.J - 1
        outside = np.ones(grid.J + 1, dtype=bool)
        outside[first:last + 1] = False
        if np.any(values[outside] != 0) or np.any(values[:, [0, grid.K]] != 0):
            raise BoundaryViolationError("Forcing must vanish on the boundary columns and rows", m=m)
        return self.transform.forward(values)

    def initial_state(self):
        right = left = None
        if self.grid.M:
            coefficients = self.table
            traces = self.transform.forward(self.initial.values)
            if self.right_tbc:
                right = TbcState.from_coefficients(coefficients, capacity=self.grid.M)
                right.record(0, traces[self.grid.J])
            if self.left_tbc:
                left = TbcState.from_coefficients(coefficients, capacity=self.grid.M)
                left.record(0, traces[0])
        return SimulationState(self.initial, 0, right, left)

    def _solve_chunk(self, state, m, breve, forcing, columns):
        system = assemble_mode_system(self.operator, breve[:, columns], m, state.right, state.left,
                                      None if forcing is None else forcing[:, columns], columns)
        return solve_tridiagonal(system, self.residual_tolerance)

    def step(self, state, executor=None):
        """Advance one level by the five-step direct algorithm.

        :param SimulationState state: state at level m-1
        :param executor: optional thread pool for the per-mode solves
        :return SimulationState: state at level m
        """
        m = state.m + 1
        if m > self.grid.M:
            raise NumericalError("Run already reached its last level", m=m)
        timings = state.timings

        with phase_timer(timings, "phase"):
            breve = phase_halfstep(state.field, self.multiplier)
            if self.debug:
                check_modulus(state.field.values, breve.values, m, "First")
        with phase_timer(timings, "transform"):
            breve_q = self.transform.forward(breve.values)
            forcing_q = self._forcing_coefficients(m)
        with phase_timer(timings, "solve"):
            for boundary in (state.right, state.left):
                if boundary is not None:
                    boundary.extend(m)
            if executor is not None and len(self.chunks) > 1:
                parts = list(executor.map(lambda columns: self._solve_chunk(state, m, breve_q, forcing_q, columns),
                                          self.chunks))
            else:
                parts = [self._solve_chunk(state, m, breve_q, forcing_q, columns) for columns in self.chunks]
            tilde_q = np.concatenate(parts, axis=1)
            if state.right is not None:
                state.right.record(m, tilde_q[self.grid.J])
            if state.left is not None:
                state.left.record(m, tilde_q[0])
        with phase_timer(timings, "synthesis"):
            tilde = WaveField(self.grid, self.transform.inverse(tilde_q))
            field = phase_halfstep(tilde, self.multiplier)
            if self.debug:
                check_modulus(tilde.values, field.values, m, "Second")
        return SimulationState(field, m, state.right, state.left, timings)

    def iterate(self, levels=None):
        """Yield the state at levels 0..M, or 0..levels."""
        last = self.grid.M if levels is None else min(levels, self.grid.M)
        state = self.initial_state()
        yield state
        executor = ThreadPoolExecutor(max_workers=self.threads) if self.threads > 1 and last else None
        try:
            for _ in range(last):
                state = self.step(state, executor)
                yield state
        finally:
            if executor is not None:
                executor.shutdown(wait=True)


def step(simulation, state):
    return simulation.step(state)


class RunReport(object):
    """Norm series of every level, snapshots and phase timings of one run."""

    __slots__ = ("config", "grid", "l2_norms", "c_norms", "snapshots", "final", "timings")

    def __init__(self, config, grid, l2_norms, c_norms, snapshots, final, timings):
        self.config = config
        self.grid = grid
        self.l2_norms = np.asarray(l2_norms, dtype=float)
        self.c_norms = np.asarray(c_norms, dtype=float)
        self.snapshots = snapshots
        self.final = final
        self.timings = timings

    @property
    def levels(self):
        return np.arange(len(self.l2_norms))

    @property
    def times(self):
        return np.array([self.grid.t(m) for m in self.levels])

    @property
    def max_l2_growth(self):
        """max_m |Psi^m| / |Psi^0| - 1."""
        if self.l2_norms[0] == 0:
            return 0.0
        return float(np.max(self.l2_norms) / self.l2_norms[0] - 1.0)


def run(config, forcing=None, simulation=None):
    """Advance a configured run through all levels.

    :param RunConfig config: validated configuration
    :param forcing: optional callable ``forcing(t, grid)`` evaluated at the half level t = (m - 1/2) tau
    :return RunReport:
    """
    simulation = simulation or Simulation.from_config(config, forcing)
    grid = config.grid
    include_boundary = config.norm == "boundary"
    wanted = set(config.snapshots)
    logger.info("Run %s geometry on %s", config.geometry, grid.describe())
    l2_norms, c_norms = [], []
    snapshots = OrderedDict()
    state = None
    for state in simulation.iterate():
        l2_norms.append(norm_l2(state.field, include_boundary))
        c_norms.append(norm_c(state.field))
        logger.debug("Level %d: l2=%.17g c=%.17g", state.m, l2_norms[-1], c_norms[-1])
        if state.m in wanted:
            snapshots[state.m] = state.field
    for name, seconds in state.timings.items():
        logger.info("Phase %-9s %.3f s", name, seconds)
    logger.info("Finished %d levels: l2 norm %.6g -> %.6g", grid.M, l2_norms[0], l2_norms[-1])
    return RunReport(config, grid, l2_norms, c_norms, snapshots, state.field, state.timings)
