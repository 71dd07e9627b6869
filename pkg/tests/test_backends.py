"""The compiled and pure row-reduction kernels are interchangeable."""

import random

import pytest

from diracsim.ratlin import _pure

try:
    from diracsim.ratlin import _speedups
except ImportError:  # pragma: no cover - compiled extension not built
    _speedups = None


@pytest.mark.skipif(_speedups is None, reason="compiled kernel not built")
def test_kernels_agree_on_random_matrices():
    rng = random.Random(2024)
    for _ in range(200):
        rows = rng.randint(0, 7)
        cols = rng.randint(0, 7)
        m = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        a = [row[:] for row in m]
        b = [row[:] for row in m]
        pa = _pure.reduce_int_rows(a, cols)
        pb = _speedups.reduce_int_rows(b, cols)
        assert pa == pb
        assert a == b


@pytest.mark.skipif(_speedups is None, reason="compiled kernel not built")
def test_kernels_agree_on_large_entries():
    rng = random.Random(7)
    big = 10 ** 30
    for _ in range(20):
        m = [[rng.randint(-big, big) for _ in range(5)] for _ in range(5)]
        a = [row[:] for row in m]
        b = [row[:] for row in m]
        assert _pure.reduce_int_rows(a, 5) == _speedups.reduce_int_rows(b, 5)
        assert a == b


def test_pure_kernel_shape():
    rows = [[0, 0], [1, 2], [2, 4]]
    pivots = _pure.reduce_int_rows(rows, 2)
    assert pivots == [0]
    assert rows[0] == [1, 2]
    assert rows[1] == [0, 0] and rows[2] == [0, 0]
