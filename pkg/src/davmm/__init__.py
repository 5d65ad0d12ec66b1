"""Multiplier-free vector-matrix multiplication by Distributed Arithmetic.

Weight subset sums live in simulated non-volatile lookup banks; inputs are
applied bit-serially and combined by an adder tree and a shift-accumulator.
A bit-slicing baseline and a latency/energy/area model are included for
comparison.
"""

from .errors import CalibrationError, DaError, TableOverflowError, ValidationError, WidthOverflowError
from .quant import InputVector, QuantizedMatrix, quantize_weights, validate_input
from .tables import BankPlan, ProcessingMemoryArray, WriteCostLedger, build_banks, build_table, lookup, plan_banks, write_cost
from .engine import AdderTreeSpec, DaEngine, DaTrace, VmmResult, execute_vmm, make_addresses, run_batch
from .convmap import ConvLayerSpec, FeatureMap, run_conv_layer, unroll_filters, unroll_patch
from .baseline import AdcSpec, BitSlicedArray, build_bitsliced, execute_bitslice_vmm

__all__ = [
    "AdcSpec", "AdderTreeSpec", "BankPlan", "DaEngine", "BitSlicedArray", "CalibrationError",
    "ConvLayerSpec", "DaError", "DaTrace", "FeatureMap", "InputVector",
    "ProcessingMemoryArray", "QuantizedMatrix", "TableOverflowError",
    "ValidationError", "VmmResult", "WidthOverflowError", "WriteCostLedger",
    "build_banks", "build_bitsliced", "build_table", "execute_bitslice_vmm",
    "execute_vmm", "lookup", "make_addresses", "plan_banks", "quantize_weights",
    "run_batch", "run_conv_layer", "unroll_filters", "unroll_patch",
    "validate_input", "write_cost",
]
