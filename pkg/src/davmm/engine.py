"""Bit-serial Distributed-Arithmetic VMM over a bank plan.

Each cycle takes one bit-plane of the input (MSB first), turns it into one
address per bank, reads the banks, sums the readouts through a left-deep
adder tree and adds the result to the left-shifted intermediate sum::

    IS <- 2 * IS + (MR_1 + MR_2 + ... + MR_b)

After ``bits_x`` cycles IS holds x @ W exactly. All arithmetic is on Python
ints, with every stage checked against its declared two's-complement width,
so a value that fits is the same value its sign-extended hardware register
holds.
"""

import json
from operator import add
from dataclasses import dataclass, field

from .bits import sign_extend, signed_range, to_binary  # noqa: F401  (sign_extend re-exported)
from .errors import ValidationError, WidthOverflowError
from .quant import InputVector, validate_input
from .tables import build_banks, ceil_log2, plan_banks


class EngineError(ValidationError):
    module = "engine"


@dataclass(frozen=True)
class AdderTreeSpec:
    """Widths of the bank-combining adders and of the shift-accumulator."""

    stage_widths: tuple
    acc_width: int

    @classmethod
    def for_plan(cls, plan, bits_x=8, bits_w=8):
        stages, width = [], plan.entry_widths[0]
        for nxt in plan.entry_widths[1:]:
            width = 1 + max(width, nxt)
            stages.append(width)
        return cls(tuple(stages), required_acc_width(plan.rows, bits_x, bits_w))

    @property
    def output_width(self):
        return self.stage_widths[-1] if self.stage_widths else None


def required_acc_width(n, bits_x=8, bits_w=8):
    return bits_x + bits_w + ceil_log2(n)


@dataclass(slots=True)
class CycleRecord:
    cycle: int
    bit: int  # input bit position read this cycle (bits_x - 1 on cycle 1)
    addresses: tuple
    readouts: tuple  # per bank, per column
    stages: tuple  # per adder stage, per column
    tree_sum: tuple
    lsis: tuple
    intermediate: tuple


@dataclass
class DaTrace:
    cycles: list
    y: tuple
    addr_widths: tuple
    entry_widths: tuple
    stage_widths: tuple
    acc_width: int

    def __len__(self):
        return len(self.cycles)

    def horner_unrolled(self):
        """sum_c 2**(bits_x - c) * tree_sum_c, per column."""
        n = len(self.cycles)
        cols = len(self.y)
        return tuple(sum(rec.tree_sum[j] << (n - rec.cycle) for rec in self.cycles)
                     for j in range(cols))

    def records(self):
        acc = self.acc_width
        for rec in self.cycles:
            yield {
                "cycle": rec.cycle,
                "bit": rec.bit,
                "addresses": [format(a, f"0{w}b") for a, w in zip(rec.addresses, self.addr_widths)],
                "mr": [list(r) for r in rec.readouts],
                "mr_bits": [[to_binary(v, w) for v in r]
                            for r, w in zip(rec.readouts, self.entry_widths)],
                "stages": [list(s) for s in rec.stages],
                "lsis": list(rec.lsis),
                "is": list(rec.intermediate),
                "is_bits": [to_binary(v, acc) for v in rec.intermediate],
            }

    def to_jsonl(self):
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())


@dataclass
class VmmResult:
    y: tuple
    trace: DaTrace = field(repr=False)


def bit_position(plane, bits):
    """Plane 0 is applied on cycle 1 and reads the MSB."""
    if not 0 <= plane < bits:
        raise EngineError(f"plane {plane} outside [0, {bits})", op="make_addresses")
    return bits - 1 - plane


def make_addresses(x, plan, plane):
    """Per-bank addresses for bit-plane ``plane`` (0 = MSB) of ``x``."""
    pos = bit_position(plane, x.bits)
    values = x.values
    out = []
    for start, k in plan.chunks:
        a = 0
        for p in range(k):
            a |= (values[start + p] >> pos & 1) << p
        out.append(a)
    return tuple(out)


def _overflow(values, width, cycle, stage):
    lo, hi = signed_range(width)
    j, v = next((j, v) for j, v in enumerate(values) if not lo <= v <= hi)
    raise WidthOverflowError(
        f"cycle {cycle}: {stage} value {v} (column {j}) overflows {width} bits",
        cycle=cycle, stage=stage)


def _check_consistent(x, plan, banks, tree):
    if len(x) != plan.rows:
        raise EngineError(f"input length {len(x)} != {plan.rows} matrix rows", op="execute_vmm")
    if len(banks) != len(plan):
        raise EngineError(f"{len(banks)} banks for a {len(plan)}-chunk plan", op="execute_vmm")
    for bank, (start, k), width in zip(banks, plan.chunks, plan.entry_widths):
        if bank.start != start or bank.addr_width != k or bank.entry_width != width:
            raise EngineError(f"bank at row {bank.start} does not match plan chunk ({start}, {k})",
                              op="execute_vmm")
    if len(tree.stage_widths) != len(banks) - 1:
        raise EngineError(f"{len(banks)} banks need {len(banks) - 1} adder stages, "
                          f"got {len(tree.stage_widths)}", op="execute_vmm")


def execute_vmm(x, plan, banks, tree):
    """Run one VMM; raises WidthOverflowError if any stage is under-sized."""
    _check_consistent(x, plan, banks, tree)
    cols = banks[0].cols
    acc_width = tree.acc_width
    acc_lo, acc_hi = signed_range(acc_width)
    stage_bounds = [signed_range(w) for w in tree.stage_widths]
    acc = (0,) * cols
    cycles = []
    for cycle in range(1, x.bits + 1):
        addresses = make_addresses(x, plan, cycle - 1)
        readouts = tuple(bank.read(a) for bank, a in zip(banks, addresses))
        total = readouts[0]
        stages = []
        for s, mr in enumerate(readouts[1:]):
            total = tuple(map(add, total, mr))
            lo, hi = stage_bounds[s]
            if min(total) < lo or max(total) > hi:
                _overflow(total, tree.stage_widths[s], cycle, f"adder-{s + 1}")
            stages.append(total)
        lsis = tuple(v << 1 for v in acc)
        if min(lsis) < acc_lo or max(lsis) > acc_hi:
            _overflow(lsis, acc_width, cycle, "shift")
        acc = tuple(map(add, lsis, total))
        if min(acc) < acc_lo or max(acc) > acc_hi:
            _overflow(acc, acc_width, cycle, "accumulator")
        cycles.append(CycleRecord(cycle, x.bits - cycle, addresses, readouts, tuple(stages),
                                  total, lsis, acc))
    trace = DaTrace(cycles, acc, tuple(k for _, k in plan.chunks), plan.entry_widths,
                    tree.stage_widths, acc_width)
    return VmmResult(acc, trace)


def run_batch(xs, plan, banks, tree):
    return [execute_vmm(x, plan, banks, tree) for x in xs]


@dataclass
class DaEngine:
    """Plan, banks and adder tree bundled for repeated VMMs on one matrix."""

    plan: object
    banks: list
    tree: AdderTreeSpec
    bits_x: int = 8

    @classmethod
    def from_matrix(cls, w, bits_x=8, max_addr_width=9, paper_widths=False):
        plan = plan_banks(w.rows, max_addr_width, w.bits, paper_widths)
        banks = build_banks(w, plan)
        return cls(plan, banks, AdderTreeSpec.for_plan(plan, bits_x, w.bits), bits_x)

    def __call__(self, x):
        if not isinstance(x, InputVector):
            x = validate_input(x, self.bits_x)
        return execute_vmm(x, self.plan, self.banks, self.tree)

    def run_batch(self, xs):
        return [self(x) for x in xs]
