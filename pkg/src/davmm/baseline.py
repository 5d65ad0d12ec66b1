"""Conventional bit-slicing VMM, used as a cross-check and for cost comparison.

Weight bit ``s`` (s = 0 is the sign/MSB bit) of w[i, j] sits in physical
column ``j * bits_w + s``. Input bits are applied LSB first; each column's
analog sum is an ideal popcount digitized by an ADC that saturates at
2**resolution - 1. Two shift-and-add stages undo the weight slicing and then
the input slicing, with the MSB plane weighted negatively.
"""

from dataclasses import dataclass

import numpy as np

from .quant import QuantizedMatrix


@dataclass(frozen=True)
class AdcSpec:
    resolution: int = 5
    full_scale: int | None = None  # defaults to the array's row count

    @property
    def max_code(self):
        return (1 << self.resolution) - 1

    def is_ideal(self, rows):
        return (1 << self.resolution) > (self.full_scale if self.full_scale is not None else rows)


@dataclass(eq=False)
class BitSlicedArray:
    cells: np.ndarray  # (rows, cols * bits_w) of {0, 1}
    bits_w: int = 8

    @property
    def rows(self):
        return self.cells.shape[0]

    @property
    def cols(self):
        return self.cells.shape[1] // self.bits_w

    def plane_weights(self):
        w = [1 << (self.bits_w - 1 - s) for s in range(self.bits_w)]
        w[0] = -w[0]
        return np.array(w, dtype=np.int64)

    def to_matrix(self):
        planes = self.cells.reshape(self.rows, self.cols, self.bits_w).astype(np.int64)
        return QuantizedMatrix(planes @ self.plane_weights(), 1.0, self.bits_w)


def build_bitsliced(w):
    b = w.bits
    patterns = w.values & ((1 << b) - 1)
    shifts = np.arange(b - 1, -1, -1)
    cells = (patterns[:, :, None] >> shifts) & 1
    return BitSlicedArray(cells.reshape(w.rows, w.cols * b).astype(np.uint8), b)


def column_sum(arr, column, x_bits):
    """Popcount of the rows that are both driven and store a 1 in ``column``."""
    x_bits = np.asarray(x_bits, dtype=np.int64)
    return int(x_bits @ arr.cells[:, column])


def adc_quantize(count, spec=AdcSpec()):
    return min(int(count), spec.max_code)


@dataclass
class BitSliceResult:
    y: tuple
    saturated: bool


def execute_bitslice_vmm(arr, x, adc=AdcSpec()):
    values = np.asarray(x.values, dtype=np.int64)
    if values.shape[0] != arr.rows:
        raise ValueError(f"input length {values.shape[0]} != {arr.rows} rows")
    cells = arr.cells.astype(np.int64)
    weights = arr.plane_weights()
    y = np.zeros(arr.cols, dtype=np.int64)
    saturated = False
    for b in range(x.bits):
        counts = ((values >> b) & 1) @ cells
        if counts.max(initial=0) > adc.max_code:
            saturated = True
        codes = np.minimum(counts, adc.max_code).reshape(arr.cols, arr.bits_w)
        y += (codes @ weights) << b
    return BitSliceResult(tuple(int(v) for v in y), saturated)
