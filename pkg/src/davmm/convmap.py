"""Lowering a single-channel convolution layer to a sequence of VMMs.

Each K x K input patch is flattened row-major into one input vector and each
filter is flattened the same way into one column of the weight matrix, so
one VMM yields one output pixel of every feature map. Convolution here is
cross-correlation (no kernel flip).
"""

from dataclasses import dataclass

import numpy as np

from .engine import execute_vmm
from .errors import ValidationError
from .quant import InputVector, QuantizedMatrix


class ConvError(ValidationError):
    module = "convmap"


@dataclass(frozen=True)
class ConvLayerSpec:
    in_height: int
    in_width: int
    kernel: int
    filters: int
    stride: int = 1
    padding: int = 0

    def __post_init__(self):
        for name in ("in_height", "in_width", "kernel", "filters", "stride"):
            if getattr(self, name) < 1:
                raise ConvError(f"{name} must be >= 1", op="ConvLayerSpec")
        if self.padding < 0:
            raise ConvError("padding must be >= 0", op="ConvLayerSpec")
        for dim in (self.in_height, self.in_width):
            span = dim - self.kernel + 2 * self.padding
            if span < 0 or span % self.stride:
                raise ConvError(f"input {dim} with kernel {self.kernel}, padding {self.padding}, "
                                f"stride {self.stride} gives a non-integer output size",
                                op="ConvLayerSpec")

    @property
    def out_height(self):
        return (self.in_height - self.kernel + 2 * self.padding) // self.stride + 1

    @property
    def out_width(self):
        return (self.in_width - self.kernel + 2 * self.padding) // self.stride + 1

    @property
    def vmm_count(self):
        return self.out_height * self.out_width


CONV1 = ConvLayerSpec(32, 32, 5, 6)


@dataclass(eq=False)
class FeatureMap:
    values: np.ndarray  # (height, width) integers

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.ndim != 2 or 0 in self.values.shape:
            raise ConvError(f"feature map must be non-empty 2-D, got {self.values.shape}",
                            op="FeatureMap")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        return np.array_equal(self.values, other.values)


def unroll_filters(filters, scale=1.0, bits=8):
    """Stack F integer K x K kernels into a K*K x F weight matrix."""
    kernels = [np.asarray(f, dtype=np.int64) for f in filters]
    if not kernels:
        raise ConvError("no filters given", op="unroll_filters")
    shape = kernels[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ConvError(f"filters must be square, got {shape}", op="unroll_filters")
    for i, k in enumerate(kernels):
        if k.shape != shape:
            raise ConvError(f"filter {i} has shape {k.shape}, expected {shape}",
                            op="unroll_filters")
    return QuantizedMatrix(np.stack([k.ravel() for k in kernels], axis=1), scale, bits)


def unroll_patch(fmap, top, left, kernel, padding=0, bits=8):
    """Row-major flatten of the K x K window at (top, left) of the padded map."""
    values = fmap.values if isinstance(fmap, FeatureMap) else np.asarray(fmap)
    h, w = values.shape
    if top < 0 or left < 0 or top + kernel > h + 2 * padding or left + kernel > w + 2 * padding:
        raise ConvError(f"patch at ({top}, {left}) of size {kernel} leaves the "
                        f"{h}x{w} map (padding {padding})", op="unroll_patch")
    out = []
    for r in range(top - padding, top - padding + kernel):
        for c in range(left - padding, left - padding + kernel):
            out.append(int(values[r, c]) if 0 <= r < h and 0 <= c < w else 0)
    return InputVector(tuple(out), bits)


@dataclass
class ConvLayerResult:
    maps: list
    vmm_count: int


def run_conv_layer(spec, fmap, plan, banks, tree, bits_x=8):
    """One VMM per output pixel; output map j collects column j of every result."""
    if (fmap.height, fmap.width) != (spec.in_height, spec.in_width):
        raise ConvError(f"input is {fmap.height}x{fmap.width}, layer expects "
                        f"{spec.in_height}x{spec.in_width}", op="run_conv_layer")
    if plan.rows != spec.kernel ** 2 or banks[0].cols != spec.filters:
        raise ConvError("banks were not built from this layer's unrolled filters",
                        op="run_conv_layer")
    out = np.zeros((spec.filters, spec.out_height, spec.out_width), dtype=np.int64)
    count = 0
    for r in range(spec.out_height):
        for c in range(spec.out_width):
            x = unroll_patch(fmap, r * spec.stride, c * spec.stride, spec.kernel,
                             spec.padding, bits_x)
            out[:, r, c] = execute_vmm(x, plan, banks, tree).y
            count += 1
    return ConvLayerResult([FeatureMap(m) for m in out], count)

