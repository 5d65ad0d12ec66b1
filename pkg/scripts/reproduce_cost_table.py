"""Print the CONV1 cost comparison in calibrated and analytic modes."""

import argparse

from davmm.costmodel import CostParams, conv1_preset, format_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", help="CostParams JSON overriding the defaults")
    ap.add_argument("--inferences", type=int, default=10000)
    args = ap.parse_args()
    params = CostParams.from_json(args.params) if args.params else CostParams()
    for mode in ("calibrated", "analytic"):
        da, bs = conv1_preset(params, mode, args.inferences)
        print(format_table(da, bs, params))


if __name__ == "__main__":
    main()
