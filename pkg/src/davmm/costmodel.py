"""Latency, energy and area for the DA pipeline and the bit-slicing baseline.

Times are in ns, energies in pJ. Two modes:

* ``calibrated`` returns the published circuit-simulation numbers and refuses
  any shape other than the 1x25 by 25x6 CONV1 VMM they were measured on;
* ``analytic`` evaluates parametric formulas. These are estimates.
"""

import json
from dataclasses import asdict, dataclass, field, fields

from .errors import CalibrationError, ValidationError
from .tables import WriteCostLedger, ceil_log2, plan_banks, write_cost

MODES = ("calibrated", "analytic")


class CostError(ValidationError):
    module = "costmodel"


@dataclass(frozen=True)
class CostParams:
    # read timing: first cycle is precharge + discharge + sense, later cycles overlap
    t_precharge: float = 5.0
    t_discharge: float = 5.0
    t_sense: float = 5.0
    t_pipelined_cycle: float = 10.0
    t_final_add: float = 3.0
    t_add: float = 2.5
    t_shift: float = 2.5
    # energies
    e_read_da: float = 0.035  # per sense-amplifier read (one stored bit)
    e_add_small: float = 0.052  # per addition at e_add_ref_width bits
    e_add_ref_width: int = 11
    e_write_bit: float = 1.0
    e_read_bs_col: float = 0.506  # per bit-slicing column per cycle, at e_read_bs_rows rows
    e_read_bs_rows: int = 25
    e_iv_adc: float = 3.0  # I-V converter plus ADC, per conversion
    prevmm_additions: int = 24576
    # calibrated totals for CONV1
    E_da_vmm: float = 110.2
    E_bs_vmm: float = 1421.5
    T_da: float = 88.0
    T_bs: float = 400.0
    # area
    adc5_transistors: int = 679
    adc5_resistors: int = 32
    iv_resistors: int = 1
    dac_transistors: int = 6
    # back-solved so that the default preset reproduces the published totals
    sa_transistors: int = 47
    adder_transistors_per_bit: int = 41
    iv_transistors: int = 128
    bs_unitemized_transistors: int = 36

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v < 0 or (f.name.startswith(("t_", "e_", "E_", "T_")) and v <= 0):
                raise CostError(f"{f.name} must be positive, got {v}", op="CostParams")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"format_version"}
        if unknown:
            raise CostError(f"unknown cost parameters: {sorted(unknown)}", op="CostParams")
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)

    @property
    def t_bs_read_cycle(self):
        """Per-cycle read + ADC time that makes 8 analytic cycles equal T_bs."""
        return self.T_bs / 8 - self.t_shift - 2 * self.t_add


BACKSOLVED = ("sa_transistors", "adder_transistors_per_bit", "iv_transistors",
              "bs_unitemized_transistors")


@dataclass(frozen=True)
class VmmShape:
    rows: int = 25
    cols: int = 6
    bits_x: int = 8
    bits_w: int = 8


CONV1_SHAPE = VmmShape()
CONV1_CHUNKS = [8, 8, 9]


def _mode(mode):
    if mode not in MODES:
        raise CostError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def da_latency(bits_x=8, params=CostParams()):
    if bits_x < 1:
        raise CostError("bits_x must be >= 1", op="da_latency")
    first = params.t_precharge + params.t_discharge + params.t_sense
    return first + (bits_x - 1) * params.t_pipelined_cycle + params.t_final_add


def da_adder_widths(plan, bits_x=8, bits_w=8):
    """Bank-combining stage widths followed by the accumulator width."""
    stages, width = [], plan.entry_widths[0]
    for nxt in plan.entry_widths[1:]:
        width = 1 + max(width, nxt)
        stages.append(width)
    return stages + [bits_x + bits_w + ceil_log2(plan.rows)]


def _add_energy(width, params):
    return params.e_add_small * width / params.e_add_ref_width


def da_energy(plan, cols, bits_x=8, mode="calibrated", params=CostParams(), bits_w=8):
    """Energy of one VMM, excluding the one-time table write."""
    if _mode(mode) == "calibrated":
        if plan.sizes != CONV1_CHUNKS or cols != 6 or bits_x != 8:
            raise CalibrationError(
                f"no calibrated DA energy for chunks {plan.sizes}, {cols} columns, "
                f"{bits_x}-bit inputs", op="da_energy")
        return params.E_da_vmm
    if len(plan) == 0:
        return 0.0
    sensed = sum(cols * w for w in plan.entry_widths)
    adders = cols * sum(_add_energy(w, params) for w in da_adder_widths(plan, bits_x, bits_w))
    return bits_x * (sensed * params.e_read_da + adders)


def prevmm_energy(ledger, inferences=10000, params=CostParams()):
    """(total, per-inference) energy of computing and writing the weight sums."""
    if inferences < 1:
        raise CostError("inferences must be >= 1", op="prevmm_energy")
    total = write_cost(ledger, params.e_add_small, params.e_write_bit)
    return total, total / inferences


def bitslice_latency(bits_x=8, mode="calibrated", params=CostParams()):
    if bits_x < 1:
        raise CostError("bits_x must be >= 1", op="bitslice_latency")
    if _mode(mode) == "calibrated":
        if bits_x != 8:
            raise CalibrationError(f"no calibrated bit-slicing latency for {bits_x}-bit inputs",
                                   op="bitslice_latency")
        return params.T_bs
    return bits_x * (params.t_bs_read_cycle + params.t_shift + 2 * params.t_add)


def bs_adder_widths(shape, adc_bits=5):
    first = adc_bits + shape.bits_w
    return [first, first + shape.bits_x]


def bitslice_energy_breakdown(shape=CONV1_SHAPE, params=CostParams(), adc_bits=5):
    """Per-component energy of one bit-slicing VMM.

    Read energy scales linearly with the row count. The adder term is the
    analytic estimate (bits_w - 1 weight-recombining additions and one
    input-recombining addition per matrix column per cycle).
    """
    columns = shape.cols * shape.bits_w
    conversions = columns * shape.bits_x
    first, second = bs_adder_widths(shape, adc_bits)
    per_cycle_add = shape.cols * ((shape.bits_w - 1) * _add_energy(first, params)
                                  + _add_energy(second, params))
    return {
        "iv_adc": conversions * params.e_iv_adc,
        "read": conversions * params.e_read_bs_col * shape.rows / params.e_read_bs_rows,
        "adders": shape.bits_x * per_cycle_add,
    }


def bitslice_energy(shape=CONV1_SHAPE, mode="calibrated", params=CostParams()):
    if _mode(mode) == "calibrated":
        if shape != CONV1_SHAPE:
            raise CalibrationError(f"no calibrated bit-slicing energy for {shape}",
                                   op="bitslice_energy")
        return params.E_bs_vmm
    return sum(bitslice_energy_breakdown(shape, params).values())


def calibrated_decomposition(params=CostParams()):
    """Split the calibrated total into footnote-derived parts plus an adder remainder."""
    parts = bitslice_energy_breakdown(CONV1_SHAPE, params)
    known = parts["iv_adc"] + parts["read"]
    return {"iv_adc": parts["iv_adc"], "read": parts["read"],
            "adders_remainder": params.E_bs_vmm - known, "footnote_sum": known,
            "total": params.E_bs_vmm}


@dataclass
class AreaReport:
    memory_cells: int
    transistors: int
    resistors: int
    hardware: str


def _da_hardware(plan, cols, bits_x, bits_w):
    arrays = {}
    for k, w in zip(plan.sizes, plan.entry_widths):
        key = f"{1 << k}x{cols * w}"
        arrays[key] = arrays.get(key, 0) + 1
    parts = [f"{n} {key} array" for key, n in arrays.items()]
    parts.append("0 DACs")
    parts.append(f"{sum(cols * w for w in plan.entry_widths)} SA")
    parts += [f"{cols} {w}-bit adder" for w in da_adder_widths(plan, bits_x, bits_w)]
    return " + ".join(parts)


def area_report(design, shape=CONV1_SHAPE, plan=None, params=CostParams(), adc_bits=5):
    if design == "da":
        if plan is None:
            raise CostError("DA area needs a bank plan", op="area_report")
        widths = da_adder_widths(plan, shape.bits_x, shape.bits_w)
        sensed = sum(shape.cols * w for w in plan.entry_widths)
        cells = sum((1 << k) * shape.cols * w for k, w in zip(plan.sizes, plan.entry_widths))
        transistors = (sensed * params.sa_transistors
                       + shape.cols * sum(widths) * params.adder_transistors_per_bit)
        hw = _da_hardware(plan, shape.cols, shape.bits_x, shape.bits_w)
        return AreaReport(cells, transistors, 0, hw)
    if design == "bitslice":
        columns = shape.cols * shape.bits_w
        widths = bs_adder_widths(shape, adc_bits)
        transistors = (shape.rows * params.dac_transistors
                       + columns * (params.iv_transistors + params.adc5_transistors)
                       + shape.cols * sum(widths) * params.adder_transistors_per_bit
                       + params.bs_unitemized_transistors)
        resistors = columns * (params.adc5_resistors + params.iv_resistors)
        hw = " + ".join([f"{shape.rows}x{columns} array", f"{shape.rows} DACs",
                         f"{columns} I-V", f"{columns} {adc_bits}-bit ADCs"]
                        + [f"{shape.cols} {w}-bit adder" for w in widths])
        return AreaReport(shape.rows * columns, transistors, resistors, hw)
    raise CostError(f"design must be 'da' or 'bitslice', got {design!r}", op="area_report")


@dataclass
class CostReport:
    design: str
    mode: str
    latency_ns: float
    energy_pj: float
    amortized_prevmm_pj: float
    memory_cells: int
    transistors: int
    resistors: int
    hardware: str
    prevmm_total_pj: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def total_energy_pj(self):
        return self.energy_pj + self.amortized_prevmm_pj

    def to_dict(self):
        d = asdict(self)
        d["total_energy_pj"] = self.total_energy_pj
        return d


def da_report(shape, plan, ledger, mode="calibrated", params=CostParams(), inferences=10000):
    total, amortized = prevmm_energy(ledger, inferences, params)
    area = area_report("da", shape, plan, params)
    return CostReport("da", _mode(mode), da_latency(shape.bits_x, params),
                      da_energy(plan, shape.cols, shape.bits_x, mode, params, shape.bits_w),
                      amortized, area.memory_cells, area.transistors, area.resistors,
                      area.hardware, prevmm_total_pj=total,
                      notes={"inferences": inferences, "additions": ledger.additions,
                             "cells_written": ledger.cells_written})


def bitslice_report(shape, mode="calibrated", params=CostParams()):
    area = area_report("bitslice", shape, None, params)
    notes = {}
    if mode == "calibrated":
        notes["energy_decomposition"] = calibrated_decomposition(params)
    else:
        notes["t_read_cycle_ns"] = params.t_bs_read_cycle
        notes["energy_breakdown"] = bitslice_energy_breakdown(shape, params)
    return CostReport("bitslice", _mode(mode), bitslice_latency(shape.bits_x, mode, params),
                      bitslice_energy(shape, mode, params), 0.0, area.memory_cells,
                      area.transistors, area.resistors, area.hardware, notes=notes)


def conv1_preset(params=CostParams(), mode="calibrated", inferences=10000, ledger=None):
    """DA (compact 11-bit entries) and bit-slicing reports for CONV1."""
    plan = plan_banks(25, 9, 8, paper_widths=True)
    if ledger is None:
        cells = sum((1 << k) * 6 * w for k, w in zip(plan.sizes, plan.entry_widths))
        actual = sum(((1 << k) - 1) * 6 for k in plan.sizes)
        ledger = WriteCostLedger(actual, cells, params.prevmm_additions)
    return (da_report(CONV1_SHAPE, plan, ledger, mode, params, inferences),
            bitslice_report(CONV1_SHAPE, mode, params))


def ratios(da, bs):
    if da.mode != bs.mode:
        raise CostError("ratios need both reports in the same mode", op="ratios")
    return {
        "latency": bs.latency_ns / da.latency_ns,
        "energy": bs.total_energy_pj / da.total_energy_pj,
        "memory_cells": da.memory_cells / bs.memory_cells,
        "transistors": bs.transistors / da.transistors,
    }


def format_table(da, bs, params=CostParams()):
    """Aligned text table with the same rows as the published comparison."""
    r = ratios(da, bs)
    rows = [
        ("", "Bit-slicing", "DA", "DA is"),
        ("Latency", f"{bs.latency_ns:.0f} ns", f"{da.latency_ns:.0f} ns",
         f"{r['latency']:.1f}x less"),
        ("Energy", f"{bs.total_energy_pj:.1f} pJ",
         f"{da.energy_pj:.1f} pJ+{da.amortized_prevmm_pj:.2f} pJ*={da.total_energy_pj:.0f} pJ",
         f"{r['energy']:.0f}x less"),
        ("Hardware", bs.hardware, da.hardware, ""),
        ("Area", f"{bs.memory_cells} memory cells + {bs.transistors} transistors + "
                 f"{bs.resistors} resistors",
         f"{da.memory_cells} memory cells + {da.transistors} transistors",
         f"{r['memory_cells']:.0f}x more memory cells, {r['transistors']:.1f}x less transistors"
         + (" and no passive resistors" if da.resistors == 0 else "")),
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = [f"mode: {da.mode}"]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    n = da.notes
    lines.append(f"* pre-VMM energy {da.prevmm_total_pj / 1000:.1f} nJ "
                 f"({n['additions']} additions x {params.e_add_small * 1000:.0f} fJ + "
                 f"{n['cells_written']} cells x {params.e_write_bit:g} pJ) "
                 f"over {n['inferences']} inferences")
    lines.append("assumed (back-solved) block constants: "
                 + ", ".join(f"{name}={getattr(params, name)}" for name in BACKSOLVED))
    return "\n".join(lines) + "\n"
