"""Smallest accumulator width that survives extreme inputs, versus the closed form."""

import numpy as np

from davmm.engine import AdderTreeSpec, execute_vmm
from davmm.errors import WidthOverflowError
from davmm.quant import QuantizedMatrix, validate_input
from davmm.tables import build_banks, plan_banks


def survives(n, acc_width):
    plan = plan_banks(n, 9)
    tree = AdderTreeSpec.for_plan(plan)
    tree = AdderTreeSpec(tree.stage_widths, acc_width)
    x = validate_input([255] * n)
    for wv in (-128, 127):
        banks = build_banks(QuantizedMatrix(np.full((n, 1), wv)), plan)
        try:
            execute_vmm(x, plan, banks, tree)
        except WidthOverflowError:
            return False
    return True


def main():
    print(" N  closed-form  minimal")
    for n in (1, 2, 3, 4, 8, 9, 16, 25, 27, 64):
        closed = AdderTreeSpec.for_plan(plan_banks(n, 9)).acc_width
        w = closed
        while w > 1 and survives(n, w - 1):
            w -= 1
        print(f"{n:2d}  {closed:11d}  {w:7d}")


if __name__ == "__main__":
    main()
