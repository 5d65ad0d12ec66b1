import numpy as np
import pytest

from davmm.baseline import AdcSpec, adc_quantize, build_bitsliced, column_sum, execute_bitslice_vmm
from davmm.engine import DaEngine
from davmm.quant import QuantizedMatrix, validate_input
from conftest import random_int8
from oracles import count_ones, matmul


def test_zero_weights_all_zero_cells():
    assert not build_bitsliced(QuantizedMatrix(np.zeros((3, 2), dtype=int))).cells.any()


def test_minus_one_all_ones():
    arr = build_bitsliced(QuantizedMatrix(np.array([[-1, 0]])))
    assert arr.cells[0, :8].tolist() == [1] * 8
    assert arr.cells[0, 8:].tolist() == [0] * 8


def test_msb_column_first():
    arr = build_bitsliced(QuantizedMatrix(np.array([[1]])))
    assert arr.cells[0].tolist() == [0] * 7 + [1]


def test_round_trip(rng):
    w = random_int8(rng, 25, 6)
    arr = build_bitsliced(w)
    assert arr.cells.shape == (25, 48)
    assert arr.to_matrix() == w


def test_column_sum(rng):
    w = random_int8(rng, 25, 6)
    arr = build_bitsliced(w)
    assert column_sum(arr, 5, [0] * 25) == 0
    ones = build_bitsliced(QuantizedMatrix(np.full((25, 1), -1)))
    assert column_sum(ones, 3, [1] * 25) == 25
    for _ in range(50):
        xb = rng.integers(0, 2, size=25).tolist()
        col = int(rng.integers(0, 48))
        assert column_sum(arr, col, xb) == count_ones(xb, arr.cells[:, col].tolist())


def test_adc():
    assert adc_quantize(0) == 0
    assert adc_quantize(25, AdcSpec(5)) == 25
    assert adc_quantize(40, AdcSpec(5, 40)) == 31
    assert AdcSpec(5).is_ideal(25) and not AdcSpec(5).is_ideal(32)


def test_zero_input(rng):
    res = execute_bitslice_vmm(build_bitsliced(random_int8(rng, 25, 6)), validate_input([0] * 25))
    assert res.y == (0,) * 6 and not res.saturated


def test_matches_engine_and_matmul(rng):
    for _ in range(200):
        w = random_int8(rng, 25, 6)
        x = validate_input(rng.integers(0, 256, size=25).tolist())
        bs = execute_bitslice_vmm(build_bitsliced(w), x)
        assert not bs.saturated
        assert bs.y == DaEngine.from_matrix(w)(x).y
        assert list(bs.y) == matmul(x.values, w.values.tolist())


def test_negating_weight_negates_contribution(rng):
    w = rng.integers(-127, 128, size=(25, 6))
    x = validate_input(rng.integers(0, 256, size=25).tolist())
    w2 = w.copy()
    w2[4, 1] = -w2[4, 1]
    y1 = execute_bitslice_vmm(build_bitsliced(QuantizedMatrix(w)), x).y
    y2 = execute_bitslice_vmm(build_bitsliced(QuantizedMatrix(w2)), x).y
    assert y1[1] - y2[1] == 2 * x.values[4] * w[4, 1]
    assert [a for j, a in enumerate(y1) if j != 1] == [b for j, b in enumerate(y2) if j != 1]


def test_saturation_with_40_rows():
    w = QuantizedMatrix(np.full((40, 1), -1))
    x = validate_input([1] * 40)
    res = execute_bitslice_vmm(build_bitsliced(w), x, AdcSpec(5, 40))
    assert res.saturated
    # every column counts 40 -> 31; MSB plane -128, the rest sum to 127
    assert res.y == (-31,)
    assert matmul(x.values, w.values.tolist()) == [-40]
