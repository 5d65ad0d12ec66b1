import json

import numpy as np
import pytest

from davmm import formats
from davmm.convmap import FeatureMap
from davmm.errors import ValidationError
from davmm.quant import quantize_weights, validate_input
from davmm.tables import WriteCostLedger, build_banks, plan_banks
from conftest import random_int8


def test_float_matrix_round_trip(tmp_path, rng):
    w = rng.normal(size=(4, 3))
    formats.save_float_matrix(w, tmp_path / "w.json")
    assert np.array_equal(formats.load_float_matrix(tmp_path / "w.json"), w)


def test_bare_weight_file(tmp_path):
    (tmp_path / "w.json").write_text(json.dumps({"rows": 1, "cols": 2, "data": [-1.27, 1.27]}))
    q = quantize_weights(formats.load_float_matrix(tmp_path / "w.json"))
    formats.save_quantized(q, tmp_path / "q.json")
    doc = json.loads((tmp_path / "q.json").read_text())
    assert doc["data"] == [-127, 127] and doc["format_version"] == 1
    assert formats.load_quantized(tmp_path / "q.json") == q


def test_malformed_matrix(tmp_path):
    (tmp_path / "w.json").write_text(json.dumps({"rows": 2, "cols": 2, "data": [1.0]}))
    with pytest.raises(ValidationError):
        formats.load_float_matrix(tmp_path / "w.json")
    (tmp_path / "v.json").write_text(json.dumps({"format_version": 99, "rows": 1}))
    with pytest.raises(ValidationError):
        formats.load_json(tmp_path / "v.json")


def test_pma_and_bit_image(tmp_path, rng):
    w = random_int8(rng, 25, 6)
    plan = plan_banks(25, 9)
    formats.save_plan(plan, tmp_path / "plan.json")
    assert formats.load_plan(tmp_path / "plan.json") == plan
    for bank in build_banks(w, plan):
        formats.save_pma(bank, tmp_path / "pma.json")
        back = formats.load_pma(tmp_path / "pma.json")
        assert np.array_equal(back.entries, bank.entries)
        assert (back.start, back.entry_width, back.additions) == (bank.start, bank.entry_width,
                                                                   bank.additions)
        blob = formats.pack_bit_image(bank)
        assert len(blob) == -(-bank.cells // 8)
        image = formats.unpack_bit_image(blob, bank.addr_width, bank.cols, bank.entry_width)
        assert np.array_equal(image, bank.bit_image())


def test_ledger_and_input(tmp_path):
    led = WriteCostLedger(10, 20, 30)
    formats.save_ledger(led, tmp_path / "l.json")
    assert formats.load_ledger(tmp_path / "l.json") == led
    x = validate_input([1, 2, 255])
    formats.save_input(x, tmp_path / "x.json")
    assert formats.load_input(tmp_path / "x.json") == x
    (tmp_path / "raw.json").write_text("[3, 4]")
    assert formats.load_input(tmp_path / "raw.json").values == (3, 4)


def test_feature_maps_json_and_pgm(tmp_path, rng):
    img = FeatureMap(rng.integers(0, 256, size=(32, 32)))
    formats.save_feature_map(img, tmp_path / "img.json")
    assert formats.load_feature_map(tmp_path / "img.json") == img
    formats.save_pgm(img, tmp_path / "img.pgm")
    assert (tmp_path / "img.pgm").read_bytes().startswith(b"P5")
    assert formats.load_feature_map(tmp_path / "img.pgm") == img
    maps = [FeatureMap(rng.integers(-1000, 1000, size=(3, 3))) for _ in range(2)]
    formats.save_feature_maps(maps, tmp_path / "maps.json")
    assert formats.load_feature_maps(tmp_path / "maps.json") == maps
