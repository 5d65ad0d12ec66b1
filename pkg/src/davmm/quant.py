"""Symmetric INT8 weight quantization and unsigned input validation."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


class QuantError(ValidationError):
    module = "quant"


@dataclass(frozen=True, eq=False)
class QuantizedMatrix:
    """Signed fixed-point weights ``values`` (rows x cols) with one scale.

    Real weight ~= ``scale * values[i, j]``.
    """

    values: np.ndarray
    scale: float = 1.0
    bits: int = 8

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 2 or 0 in values.shape:
            raise QuantError(f"weight matrix must be non-empty 2-D, got shape {values.shape}",
                             op="QuantizedMatrix")
        if not self.scale > 0:
            raise QuantError(f"scale must be positive, got {self.scale}", op="QuantizedMatrix")
        lo, hi = -(1 << (self.bits - 1)), (1 << (self.bits - 1)) - 1
        if values.min() < lo or values.max() > hi:
            raise QuantError(f"values outside [{lo}, {hi}]", op="QuantizedMatrix")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    def row_slice(self, start, size):
        return QuantizedMatrix(self.values[start:start + size], self.scale, self.bits)

    def dequantize(self):
        return self.values * self.scale

    def __eq__(self, other):
        if not isinstance(other, QuantizedMatrix):
            return NotImplemented
        return (self.bits == other.bits and self.scale == other.scale
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class InputVector:
    """Unsigned ``bits``-wide integers applied bit-serially to the banks."""

    values: tuple
    bits: int = 8

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def quantize_weights(w, bits=8):
    """Per-tensor symmetric uniform quantization to signed ``bits``-bit integers.

    The largest magnitude maps to +-(2**(bits-1) - 1); ties round away from
    zero. An all-zero matrix gets scale 1.
    """
    if bits < 2:
        raise QuantError(f"bits must be >= 2, got {bits}", op="quantize_weights")
    w = np.asarray(w, dtype=np.float64)
    if w.ndim == 1:
        w = w[np.newaxis, :]
    if w.ndim != 2 or w.size == 0:
        raise QuantError(f"expected a non-empty matrix, got shape {w.shape}", op="quantize_weights")
    if not np.all(np.isfinite(w)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(w))[0])
        raise QuantError(f"non-finite weight at {bad}", op="quantize_weights")

    qmax = (1 << (bits - 1)) - 1
    peak = float(np.max(np.abs(w)))
    if peak == 0.0:
        return QuantizedMatrix(np.zeros(w.shape, dtype=np.int64), 1.0, bits)
    scale = peak / qmax
    if scale == 0.0:
        raise QuantError(f"max |w| = {peak} is too small to quantize", op="quantize_weights")
    q = np.clip(round_half_away(w / scale), -qmax - 1, qmax).astype(np.int64)
    return QuantizedMatrix(q, scale, bits)


def validate_input(x, bits=8):
    """Check every element is an unsigned ``bits``-bit integer."""
    hi = (1 << bits) - 1
    out = []
    for i, v in enumerate(x):
        if isinstance(v, (bool, np.bool_)) or int(v) != v:
            raise QuantError(f"input[{i}] = {v!r} is not an integer", op="validate_input")
        v = int(v)
        if not 0 <= v <= hi:
            raise QuantError(f"input[{i}] = {v} outside [0, {hi}]", op="validate_input")
        out.append(v)
    return InputVector(tuple(out), bits)
