"""Bank planning and weight-sum lookup tables (processing memory arrays).

Address convention: within a chunk of ``k`` rows starting at ``start``, bit
``p`` of the address (bit 0 = LSB) selects row ``start + p``. So the MSB of
the address corresponds to the highest row index in the chunk.
"""

from dataclasses import dataclass, field

import numpy as np

from . import bits as _bits
from .errors import TableOverflowError, ValidationError
from .quant import QuantizedMatrix

MAX_ADDR_WIDTH_GUARD = 20


class TablesError(ValidationError):
    module = "tables"


def ceil_log2(n):
    return (n - 1).bit_length() if n > 1 else 0


def default_entry_width(k, bits_w=8):
    """Width that holds any sum of ``k`` signed ``bits_w``-bit weights."""
    return bits_w + ceil_log2(k)


def compact_entry_width(k, bits_w=8):
    """Narrower sizing (11 bits for both 8- and 9-row chunks of INT8 weights).

    Enough for realistic trained weights but not for the worst case once
    ``k`` is not a power of two; build_table rejects sums that do not fit.
    """
    return bits_w + max(k.bit_length() - 1, 0)


@dataclass(frozen=True)
class BankPlan:
    chunks: tuple  # ((start_row, size), ...)
    entry_widths: tuple
    max_addr_width: int = 9

    def __post_init__(self):
        object.__setattr__(self, "chunks", tuple((int(s), int(k)) for s, k in self.chunks))
        object.__setattr__(self, "entry_widths", tuple(int(w) for w in self.entry_widths))
        if len(self.chunks) != len(self.entry_widths):
            raise TablesError("one entry width per chunk required", op="BankPlan")
        nxt = 0
        for start, k in self.chunks:
            if start != nxt or k < 1 or k > self.max_addr_width:
                raise TablesError(f"bad chunk layout {self.chunks}", op="BankPlan")
            nxt += k

    @property
    def rows(self):
        return sum(k for _, k in self.chunks)

    @property
    def sizes(self):
        return [k for _, k in self.chunks]

    def __len__(self):
        return len(self.chunks)


def plan_banks(n, max_addr_width=9, bits_w=8, paper_widths=False):
    """Split ``n`` rows into ceil(n / max_addr_width) near-equal contiguous chunks.

    Any remainder goes to the trailing chunks, e.g. 25 rows with width 9 gives
    [8, 8, 9].
    """
    if n < 1 or max_addr_width < 1:
        raise TablesError(f"need n >= 1 and max_addr_width >= 1, got {n}, {max_addr_width}",
                          op="plan_banks")
    count = -(-n // max_addr_width)
    base, extra = divmod(n, count)
    sizes = [base] * (count - extra) + [base + 1] * extra
    width_rule = compact_entry_width if paper_widths else default_entry_width
    chunks, start = [], 0
    for k in sizes:
        chunks.append((start, k))
        start += k
    return BankPlan(tuple(chunks), tuple(width_rule(k, bits_w) for k in sizes), max_addr_width)


@dataclass(eq=False)
class ProcessingMemoryArray:
    """All 2**k subset sums of a k-row weight chunk, one column per matrix column."""

    entries: np.ndarray  # (2**k, cols) int64
    entry_width: int
    start: int = 0
    additions: int = 0
    _rows: list = field(init=False, repr=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int64)
        self.entries.setflags(write=False)
        # plain-int rows keep the bit-serial inner loop off numpy scalars
        self._rows = [tuple(r) for r in self.entries.tolist()]

    @property
    def addr_width(self):
        return int(self.entries.shape[0]).bit_length() - 1

    @property
    def cols(self):
        return self.entries.shape[1]

    @property
    def depth(self):
        return self.entries.shape[0]

    @property
    def cells(self):
        return self.depth * self.cols * self.entry_width

    def read(self, address):
        return self._rows[address]

    def bit_image(self):
        """Binary cells, row-major, each entry MSB first (1 = HRS, 0 = LRS)."""
        mask = (1 << self.entry_width) - 1
        patterns = self.entries & mask
        shifts = np.arange(self.entry_width - 1, -1, -1)
        bits = (patterns[:, :, None] >> shifts) & 1
        return bits.reshape(self.depth, self.cols * self.entry_width).astype(np.uint8)

    @staticmethod
    def entries_from_bit_image(image, cols, entry_width):
        image = np.asarray(image, dtype=np.int64).reshape(image.shape[0], cols, entry_width)
        weights = 1 << np.arange(entry_width - 1, -1, -1, dtype=np.int64)
        patterns = image @ weights
        sign = 1 << (entry_width - 1)
        return np.where(patterns & sign, patterns - (1 << entry_width), patterns)


def build_table(chunk, entry_width, start=0):
    """Fill a bank by walking the reflected Gray code over addresses.

    Consecutive Gray codes differ in one bit, so each new entry costs one add
    or subtract per column: 2**k - 1 additions per column in total.
    """
    w = chunk.values if isinstance(chunk, QuantizedMatrix) else np.asarray(chunk, dtype=np.int64)
    k, cols = w.shape
    if k > MAX_ADDR_WIDTH_GUARD:
        raise TablesError(f"chunk of {k} rows exceeds the {MAX_ADDR_WIDTH_GUARD}-bit address guard",
                          op="build_table")
    entries = np.zeros((1 << k, cols), dtype=np.int64)
    running = np.zeros(cols, dtype=np.int64)
    for i in range(1, 1 << k):
        flip = (i & -i).bit_length() - 1
        gray = i ^ (i >> 1)
        if gray >> flip & 1:
            running = running + w[flip]
        else:
            running = running - w[flip]
        entries[gray] = running

    lo, hi = _bits.signed_range(entry_width)
    bad = np.argwhere((entries < lo) | (entries > hi))
    if bad.size:
        a, j = (int(v) for v in bad[0])
        raise TableOverflowError(
            f"sum {int(entries[a, j])} at address {a:0{k}b}, column {j} "
            f"exceeds {entry_width}-bit entries", address=a, column=j)
    return ProcessingMemoryArray(entries, entry_width, start, additions=((1 << k) - 1) * cols)


def build_table_naive(chunk):
    """Reference tables: every subset sum recomputed from scratch."""
    w = chunk.values if isinstance(chunk, QuantizedMatrix) else np.asarray(chunk, dtype=np.int64)
    k, cols = w.shape
    out = np.zeros((1 << k, cols), dtype=np.int64)
    for a in range(1 << k):
        for p in range(k):
            if a >> p & 1:
                out[a] += w[p]
    return out


def build_banks(w, plan):
    if w.rows != plan.rows:
        raise TablesError(f"plan covers {plan.rows} rows, matrix has {w.rows}", op="build_banks")
    return [build_table(w.row_slice(start, k), width, start)
            for (start, k), width in zip(plan.chunks, plan.entry_widths)]


def lookup(pma, address, column=None):
    """Memory readout at ``address``: one column, or the whole row if ``column`` is None."""
    if not 0 <= address < pma.depth:
        raise TablesError(f"address {address} outside [0, {pma.depth})", op="lookup")
    row = pma.read(address)
    return row if column is None else row[column]


@dataclass
class WriteCostLedger:
    additions_performed: int = 0
    cells_written: int = 0
    paper_addition_count: int | None = None

    @classmethod
    def from_banks(cls, banks, paper_addition_count=None):
        return cls(sum(b.additions for b in banks), sum(b.cells for b in banks),
                   paper_addition_count)

    @property
    def additions(self):
        if self.paper_addition_count is not None:
            return self.paper_addition_count
        return self.additions_performed


def write_cost(ledger, e_add, e_write_per_bit):
    """One-time energy to compute and program the weight sums (units of the inputs)."""
    return ledger.additions * e_add + ledger.cells_written * e_write_per_bit
