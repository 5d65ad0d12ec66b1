"""Command-line pipeline: quantize -> build -> vmm / conv1 / baseline -> compare.

Every subcommand accepts ``--config run.json`` plus flag overrides and writes
into ``--out-dir``. Missing weight or input files are synthesized from the
seed, so a bare ``davmm compare`` is reproducible.
"""

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import formats
from .baseline import AdcSpec, build_bitsliced, execute_bitslice_vmm
from .convmap import CONV1, ConvLayerSpec, FeatureMap, run_conv_layer
from .costmodel import CostParams, VmmShape, bitslice_report, da_report, format_table, ratios
from .engine import AdderTreeSpec, DaEngine
from .errors import DaError, ValidationError
from .quant import quantize_weights, validate_input
from .tables import WriteCostLedger, build_banks, plan_banks


@dataclass(frozen=True)
class RunConfig:
    weights: str | None = None  # float JSON, or quantized JSON (has "scale")
    input: str | None = None  # input vector JSON; for conv1 a feature map JSON or PGM
    tables: str | None = None  # directory written by `build`
    params: str | None = None  # CostParams JSON
    out_dir: str = "out"
    bits_x: int = 8
    bits_w: int = 8
    max_addr_width: int = 9
    paper_widths: bool = False
    mode: str = "calibrated"
    seed: int = 0
    inferences: int = 10000
    rows: int = 25
    cols: int = 6
    trace: bool = True

    def __post_init__(self):
        if not 1 <= self.bits_x <= 32 or not 2 <= self.bits_w <= 32:
            raise CliError(f"unsupported widths bits_x={self.bits_x}, bits_w={self.bits_w}")
        if not 1 <= self.max_addr_width <= 20:
            raise CliError(f"max_addr_width must be in [1, 20], got {self.max_addr_width}")
        for name in ("weights", "input", "params"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise CliError(f"{name} file not found: {p}")
        if self.tables is not None and not Path(self.tables).is_dir():
            raise CliError(f"tables directory not found: {self.tables}")

    @classmethod
    def load(cls, path=None, **overrides):
        doc = {}
        if path is not None:
            with open(path) as fh:
                doc = json.load(fh)
            doc.pop("format_version", None)
            unknown = set(doc) - {f.name for f in fields(cls)}
            if unknown:
                raise CliError(f"unknown config keys: {sorted(unknown)}")
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)

    def rng(self, stream):
        # one independent stream per artifact, all derived from the one seed
        return np.random.default_rng([self.seed, stream])

    def cost_params(self):
        return CostParams.from_json(self.params) if self.params else CostParams()


class CliError(ValidationError):
    module = "cli"


WEIGHTS_STREAM, INPUT_STREAM, IMAGE_STREAM = 1, 2, 3


def _out(cfg, name):
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def float_weights(cfg):
    if cfg.weights is not None:
        return formats.load_float_matrix(cfg.weights)
    return cfg.rng(WEIGHTS_STREAM).normal(0.0, 0.2, size=(cfg.rows, cfg.cols))


def quantized_weights(cfg):
    if cfg.weights is not None and "scale" in formats.load_json(cfg.weights):
        return formats.load_quantized(cfg.weights)
    return quantize_weights(float_weights(cfg), cfg.bits_w)


def input_vector(cfg, rows):
    if cfg.input is not None:
        return formats.load_input(cfg.input, cfg.bits_x)
    data = cfg.rng(INPUT_STREAM).integers(0, 1 << cfg.bits_x, size=rows)
    return validate_input(data.tolist(), cfg.bits_x)


def load_engine(cfg):
    """Banks from ``cfg.tables`` if given, otherwise built in-process."""
    if cfg.tables is None:
        q = quantized_weights(cfg)
        return q, DaEngine.from_matrix(q, cfg.bits_x, cfg.max_addr_width, cfg.paper_widths)
    d = Path(cfg.tables)
    q = formats.load_quantized(d / "quantized.json")
    plan = formats.load_plan(d / "plan.json")
    banks = [formats.load_pma(d / f"pma_{i}.json") for i in range(len(plan))]
    return q, DaEngine(plan, banks, AdderTreeSpec.for_plan(plan, cfg.bits_x, q.bits), cfg.bits_x)


def cmd_quantize(cfg):
    q = quantize_weights(float_weights(cfg), cfg.bits_w)
    path = _out(cfg, "quantized.json")
    formats.save_quantized(q, path)
    return {"quantized": str(path), "scale": q.scale}


def cmd_build(cfg):
    q = quantized_weights(cfg)
    plan = plan_banks(q.rows, cfg.max_addr_width, q.bits, cfg.paper_widths)
    banks = build_banks(q, plan)
    formats.save_quantized(q, _out(cfg, "quantized.json"))
    formats.save_plan(plan, _out(cfg, "plan.json"))
    for i, bank in enumerate(banks):
        formats.save_pma(bank, _out(cfg, f"pma_{i}.json"))
        _out(cfg, f"pma_{i}.bin").write_bytes(formats.pack_bit_image(bank))
    ledger = WriteCostLedger.from_banks(banks)
    formats.save_ledger(ledger, _out(cfg, "ledger.json"))
    return {"chunks": plan.sizes, "entry_widths": list(plan.entry_widths),
            "additions": ledger.additions_performed, "cells": ledger.cells_written}


def cmd_vmm(cfg):
    _, engine = load_engine(cfg)
    x = input_vector(cfg, engine.plan.rows)
    res = engine(x)
    formats.dump_json({"y": list(res.y), "cycles": len(res.trace)}, _out(cfg, "vmm_result.json"))
    if cfg.trace:
        _out(cfg, "trace.jsonl").write_text(res.trace.to_jsonl())
    return {"y": list(res.y)}


def cmd_conv1(cfg):
    q, engine = load_engine(cfg)
    if cfg.input is not None:
        image = formats.load_feature_map(cfg.input)
    else:
        image = FeatureMap(cfg.rng(IMAGE_STREAM).integers(0, 1 << cfg.bits_x, size=(32, 32)))
    k = int(round(q.rows ** 0.5))
    spec = CONV1 if (image.height, image.width, k, q.cols) == (32, 32, 5, 6) else \
        ConvLayerSpec(image.height, image.width, k, q.cols)
    out = run_conv_layer(spec, image, engine.plan, engine.banks, engine.tree, cfg.bits_x)
    formats.save_feature_maps(out.maps, _out(cfg, "conv1_output.json"))
    return {"vmms": out.vmm_count, "maps": len(out.maps),
            "size": [spec.out_height, spec.out_width]}


def _baseline(cfg, q, x):
    return execute_bitslice_vmm(build_bitsliced(q), x, AdcSpec(5))


def cmd_baseline(cfg):
    q = quantized_weights(cfg) if cfg.tables is None else \
        formats.load_quantized(Path(cfg.tables) / "quantized.json")
    x = input_vector(cfg, q.rows)
    res = _baseline(cfg, q, x)
    formats.dump_json({"y": list(res.y), "saturated": res.saturated},
                      _out(cfg, "baseline_result.json"))
    return {"y": list(res.y), "saturated": res.saturated}


def cmd_compare(cfg):
    q, engine = load_engine(cfg)
    x = input_vector(cfg, q.rows)
    da = engine(x)
    bs = _baseline(cfg, q, x)
    if tuple(da.y) != tuple(bs.y) and not bs.saturated:
        raise CliError(f"DA result {list(da.y)} != bit-slicing result {list(bs.y)}",
                       op="cmd_compare")

    params = cfg.cost_params()
    shape = VmmShape(q.rows, q.cols, cfg.bits_x, q.bits)
    ledger = WriteCostLedger.from_banks(engine.banks)
    if cfg.mode == "calibrated":
        ledger = replace(ledger, paper_addition_count=params.prevmm_additions)
    da_rep = da_report(shape, engine.plan, ledger, cfg.mode, params, cfg.inferences)
    bs_rep = bitslice_report(shape, cfg.mode, params)
    formats.dump_json({"da": da_rep.to_dict(), "bitslice": bs_rep.to_dict(),
                       "ratios": ratios(da_rep, bs_rep),
                       "functional": {"da_y": list(da.y), "bitslice_y": list(bs.y),
                                      "equal": tuple(da.y) == tuple(bs.y),
                                      "saturated": bs.saturated},
                       "params": params.to_dict()},
                      _out(cfg, "cost_report.json"))
    text = format_table(da_rep, bs_rep, params)
    _out(cfg, "cost_report.txt").write_text(text)
    return {"report": text}


COMMANDS = {
    "quantize": cmd_quantize,
    "build": cmd_build,
    "vmm": cmd_vmm,
    "conv1": cmd_conv1,
    "baseline": cmd_baseline,
    "compare": cmd_compare,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="davmm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", ""))
        p.add_argument("--config", help="RunConfig JSON file")
        p.add_argument("--weights")
        p.add_argument("--input")
        p.add_argument("--tables", help="directory written by `build`")
        p.add_argument("--params", help="CostParams JSON file")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--bx", dest="bits_x", type=int)
        p.add_argument("--bw", dest="bits_w", type=int)
        p.add_argument("--max-addr-width", dest="max_addr_width", type=int)
        p.add_argument("--paper-widths", dest="paper_widths", action="store_const", const=True)
        p.add_argument("--mode", choices=["calibrated", "analytic"])
        p.add_argument("--seed", type=int)
        p.add_argument("--inferences", type=int)
        p.add_argument("--no-trace", dest="trace", action="store_const", const=False)
    return parser


def main(argv=None):
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config = args.pop("config")
    try:
        cfg = RunConfig.load(config, **args)
        summary = COMMANDS[command](cfg)
    except DaError as exc:
        err = exc.to_dict()
        err["command"] = command
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "module": "cli",
                          "op": f"cmd_{command}", "command": command}, sort_keys=True),
              file=sys.stderr)
        return 1
    if "report" in summary:
        sys.stdout.write(summary["report"])
    else:
        print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
