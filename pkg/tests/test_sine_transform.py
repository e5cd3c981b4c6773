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

import numpy as np
import pytest

from schrodinger_tbc.errors import BoundaryViolationError, ConfigurationError
from schrodinger_tbc.mesh import build_grid
from schrodinger_tbc.sine_transform import (SineTransform, dst_forward, dst_inverse, eigenvalues, numerov_weight,
                                            plan)


def random_lines(K, rows=5, seed=7):
    rng = np.random.RandomState(seed)
    values = rng.standard_normal((rows, K + 1)) + 1j * rng.standard_normal((rows, K + 1))
    values[:, 0] = values[:, K] = 0
    return values


@pytest.mark.parametrize("K", [4, 8, 16, 32])
def test_fft_matches_direct(K):
    lines = random_lines(K)
    fast = SineTransform(K, "fft").forward(lines)
    slow = SineTransform(K, "direct").forward(lines)
    assert np.max(np.abs(fast - slow)) <= 1e-12 * np.max(np.abs(slow))

    fast_back = SineTransform(K, "fft").inverse(slow)
    slow_back = SineTransform(K, "direct").inverse(slow)
    assert np.max(np.abs(fast_back - slow_back)) <= 1e-12 * np.max(np.abs(slow_back))


@pytest.mark.parametrize("K, method", [(16, "fft"), (12, "direct")])
def test_inverse_recovers_line(K, method):
    transform = SineTransform(K, method, workers=2)
    lines = random_lines(K)
    restored = transform.inverse(transform.forward(lines))
    assert np.allclose(restored, lines, rtol=0, atol=1e-12)
    assert not np.any(restored[:, [0, K]])


def test_single_mode_coefficient():
    K = 8
    k = np.arange(K + 1)
    line = np.sin(3 * np.pi * k / K)
    coeffs = dst_forward(line)
    expected = np.zeros(K - 1)
    expected[2] = 1.0
    assert np.allclose(coeffs, expected, atol=1e-14)
    assert np.allclose(dst_inverse(coeffs), line, atol=1e-14)


def test_forward_endpoint_violation():
    lines = random_lines(8)
    lines[2, 8] = 1e-6
    with pytest.raises(BoundaryViolationError):
        SineTransform(8).forward(lines)


def test_transform_raise():
    with pytest.raises(ConfigurationError):
        SineTransform(12, "fft")
    with pytest.raises(ConfigurationError):
        SineTransform(8, "chebyshev")
    with pytest.raises(ConfigurationError):
        SineTransform(8).forward(np.zeros(5))


def test_plan_is_shared():
    assert plan(16) is plan(16)
    assert plan(16).method == "fft"
    assert plan(12).method == "direct"


def test_eigenvalues_of_difference_operators():
    grid = build_grid(1, 4.2, 1, 4, 16, 1)
    eig = eigenvalues(grid)
    k = np.arange(grid.K + 1)
    for q in (1, 5, 15):
        mode = np.sin(np.pi * q * k / grid.K)
        second = (mode[2:] - 2 * mode[1:-1] + mode[:-2]) / grid.h_y ** 2
        average = mode[1:-1] + (mode[2:] - 2 * mode[1:-1] + mode[:-2]) / 12
        assert np.allclose(second, -eig.lambda_[q - 1] * mode[1:-1], atol=1e-10)
        assert np.allclose(average, eig.sigma[q - 1] * mode[1:-1], atol=1e-12)


def test_eigenvalue_ranges():
    eig = eigenvalues(build_grid(4, 4.2, 0.05, 400, 64, 1000))
    assert np.all(eig.lambda_ > 0)
    assert np.all(np.diff(eig.lambda_) > 0)
    assert np.all((eig.sigma > 2.0 / 3.0) & (eig.sigma < 1.0))


def test_numerov_weight_positive():
    grid = build_grid(4, 4.2, 0.05, 400, 64, 1000)
    weight = numerov_weight(grid)
    eig = eigenvalues(grid)
    assert np.all(weight >= eig.sigma)


@pytest.mark.parametrize("K, method", [(32, "fft"), (12, "direct")])
def test_parseval(K, method):
    transform = SineTransform(K, method)
    lines = random_lines(K, seed=K)
    coeffs = transform.forward(lines)
    energy = np.sum(np.abs(lines) ** 2, axis=-1)
    assert np.allclose(energy, 0.5 * K * np.sum(np.abs(coeffs) ** 2, axis=-1), rtol=1e-12, atol=0)
    synthesised = np.sum(np.abs(transform.inverse(coeffs)) ** 2, axis=-1)
    assert np.allclose(synthesised, energy, rtol=1e-12, atol=0)


@pytest.mark.parametrize("K", [8, 64])
def test_eigenvalues_at_half_band(K):
    grid = build_grid(4, 4.2, 0.05, 400, K, 1000)
    eig = eigenvalues(grid)
    assert eig.sigma[K // 2 - 1] == pytest.approx(5.0 / 6.0, rel=1e-14)
    assert eig.lambda_[K // 2 - 1] == pytest.approx(2.0 / grid.h_y ** 2, rel=1e-14)
