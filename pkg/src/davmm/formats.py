"""JSON / binary / PGM file formats. Every JSON document carries ``format_version``."""

import json
from pathlib import Path

import numpy as np

from .convmap import FeatureMap
from .errors import ValidationError
from .quant import QuantizedMatrix, validate_input
from .tables import BankPlan, ProcessingMemoryArray, WriteCostLedger

FORMAT_VERSION = 1


class FormatError(ValidationError):
    module = "formats"


def dump_json(obj, path):
    Path(path).write_text(json.dumps({"format_version": FORMAT_VERSION, **obj},
                                     indent=1, sort_keys=True) + "\n")


def load_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version", FORMAT_VERSION) if isinstance(doc, dict) else None
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version!r}", op="load_json")
    return doc


def _matrix(doc, path, dtype):
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        data = np.asarray(doc["data"], dtype=dtype)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed matrix ({exc})", op="load_matrix") from None
    if data.size != rows * cols:
        raise FormatError(f"{path}: {data.size} values for a {rows}x{cols} matrix",
                          op="load_matrix")
    return data.reshape(rows, cols)


def load_float_matrix(path):
    return _matrix(load_json(path), path, np.float64)


def save_float_matrix(w, path):
    w = np.asarray(w, dtype=np.float64)
    dump_json({"rows": w.shape[0], "cols": w.shape[1], "data": w.ravel().tolist()}, path)


def save_quantized(q, path):
    dump_json({"rows": q.rows, "cols": q.cols, "bits": q.bits, "scale": q.scale,
               "data": q.values.ravel().tolist()}, path)


def load_quantized(path):
    doc = load_json(path)
    if "scale" not in doc:
        raise FormatError(f"{path}: not a quantized matrix (no scale)", op="load_quantized")
    return QuantizedMatrix(_matrix(doc, path, np.int64), float(doc["scale"]), int(doc.get("bits", 8)))


def save_input(x, path):
    dump_json({"bits": x.bits, "data": list(x.values)}, path)


def load_input(path, bits=8):
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        return validate_input(doc, bits)
    return validate_input(doc["data"], int(doc.get("bits", bits)))


def save_plan(plan, path):
    dump_json({"chunks": [list(c) for c in plan.chunks], "entry_widths": list(plan.entry_widths),
               "max_addr_width": plan.max_addr_width}, path)


def load_plan(path):
    doc = load_json(path)
    return BankPlan(tuple(tuple(c) for c in doc["chunks"]), tuple(doc["entry_widths"]),
                    doc["max_addr_width"])


def save_pma(pma, path):
    dump_json({"k": pma.addr_width, "cols": pma.cols, "entry_width": pma.entry_width,
               "start": pma.start, "additions": pma.additions,
               "entries": pma.entries.ravel().tolist()}, path)


def load_pma(path):
    doc = load_json(path)
    entries = np.asarray(doc["entries"], dtype=np.int64).reshape(1 << doc["k"], doc["cols"])
    return ProcessingMemoryArray(entries, doc["entry_width"], doc["start"], doc["additions"])


def pack_bit_image(pma):
    """Row-major bit stream, each entry MSB first, zero-padded to a whole byte."""
    return np.packbits(pma.bit_image().ravel()).tobytes()


def unpack_bit_image(data, k, cols, entry_width):
    n = (1 << k) * cols * entry_width
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:n]
    return bits.reshape(1 << k, cols * entry_width)


def save_ledger(ledger, path):
    dump_json({"additions_performed": ledger.additions_performed,
               "cells_written": ledger.cells_written,
               "paper_addition_count": ledger.paper_addition_count}, path)


def load_ledger(path):
    doc = load_json(path)
    return WriteCostLedger(doc["additions_performed"], doc["cells_written"],
                           doc.get("paper_addition_count"))


def save_feature_map(fmap, path):
    dump_json({"height": fmap.height, "width": fmap.width,
               "data": fmap.values.ravel().tolist()}, path)


def save_feature_maps(maps, path):
    dump_json({"maps": [{"height": m.height, "width": m.width, "data": m.values.ravel().tolist()}
                        for m in maps]}, path)


def _fmap_from_doc(doc):
    return FeatureMap(np.asarray(doc["data"], dtype=np.int64).reshape(doc["height"], doc["width"]))


def load_feature_maps(path):
    return [_fmap_from_doc(d) for d in load_json(path)["maps"]]


def load_feature_map(path):
    """JSON feature map, or an 8-bit PGM image for inputs."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        from PIL import Image

        with Image.open(path) as img:
            if img.mode != "L":
                raise FormatError(f"{path}: expected an 8-bit grayscale image, got mode {img.mode}",
                                  op="load_feature_map")
            return FeatureMap(np.asarray(img, dtype=np.int64))
    return _fmap_from_doc(load_json(path))


def save_pgm(fmap, path):
    from PIL import Image

    values = fmap.values
    if values.min() < 0 or values.max() > 255:
        raise FormatError("PGM output needs values in [0, 255]", op="save_pgm")
    Image.fromarray(values.astype(np.uint8), mode="L").save(path, format="PPM")
