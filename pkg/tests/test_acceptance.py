"""Exit criteria. Each test prints one PASS/FAIL line (visible without -s)."""

import itertools
import time

import numpy as np
import pytest

from davmm.baseline import AdcSpec, build_bitsliced, execute_bitslice_vmm
from davmm.cli import main
from davmm.convmap import CONV1, FeatureMap, run_conv_layer, unroll_filters
from davmm.costmodel import (
    CostParams, VmmShape, conv1_preset, da_latency, da_report, ratios,
)
from davmm.engine import AdderTreeSpec, DaEngine, execute_vmm
from davmm.errors import WidthOverflowError
from davmm.quant import InputVector, QuantizedMatrix, validate_input
from davmm.tables import WriteCostLedger, build_banks, build_table, build_table_naive, plan_banks
from oracles import correlate2d, subset_sum


@pytest.fixture
def report(capsys):
    def _report(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail
    return _report


def test_ac1_exhaustive_small(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    mismatches = checked = 0
    for n, bits_x in itertools.product([1, 2, 3], [1, 2, 3, 4]):
        inputs = list(itertools.product(range(1 << bits_x), repeat=n))
        grid = np.array(inputs, dtype=np.int64)
        for _ in range(50):
            w = QuantizedMatrix(rng.integers(-128, 128, size=(n, 3)))
            eng = DaEngine.from_matrix(w, bits_x)
            expected = (grid @ w.values).tolist()
            for x, ref in zip(inputs, expected):
                mismatches += list(eng(InputVector(x, bits_x)).y) != ref
                checked += 1
    elapsed = time.perf_counter() - start
    report("AC1 exhaustive N<=3, B_x<=4, 50 matrices",
           mismatches == 0 and elapsed < 10,
           f"{checked} VMMs, {mismatches} mismatches, {elapsed:.2f} s (< 10 s)")


def test_ac2_conv1_equivalence(report):
    rng = np.random.default_rng(2)
    bad = 0
    conv_time = 0.0
    start = time.perf_counter()
    for _ in range(20):
        filters = rng.integers(-128, 128, size=(6, 5, 5))
        img = rng.integers(0, 256, size=(32, 32))
        eng = DaEngine.from_matrix(unroll_filters(filters))
        t0 = time.perf_counter()
        out = run_conv_layer(CONV1, FeatureMap(img), eng.plan, eng.banks, eng.tree)
        conv_time += time.perf_counter() - t0
        bad += out.vmm_count != 784
        for f, m in zip(filters, out.maps):
            bad += m.values.tolist() != correlate2d(img.tolist(), f.tolist())
    elapsed = time.perf_counter() - start
    report("AC2 CONV1 layer vs direct cross-correlation", bad == 0 and elapsed < 60,
           f"20 images x 784 VMMs, {bad} mismatches, layer {conv_time:.2f} s, "
           f"total {elapsed:.2f} s (< 60 s)")


def test_ac3_baseline_cross_oracle(report):
    rng = np.random.default_rng(3)
    bad = saturated = 0
    for _ in range(1000):
        w = QuantizedMatrix(rng.integers(-128, 128, size=(25, 6)))
        x = validate_input(rng.integers(0, 256, size=25).tolist())
        bs = execute_bitslice_vmm(build_bitsliced(w), x, AdcSpec(5))
        saturated += bs.saturated
        bad += bs.y != DaEngine.from_matrix(w)(x).y
    report("AC3 bit-slicing == DA engine, 1000 x (25x6), 5-bit ADC", bad == 0 and saturated == 0,
           f"{bad} mismatches, {saturated} saturated")


def test_ac4_conv1_cost_table(report):
    start = time.perf_counter()
    da, bs = conv1_preset(mode="calibrated", inferences=10000)
    r = ratios(da, bs)
    total, per = da.prevmm_total_pj, da.amortized_prevmm_pj
    # (value, printed reference, one unit in the last printed digit)
    checks = {
        "DA latency ns": (da.latency_ns, 88, 1),
        "bit-slicing latency ns": (bs.latency_ns, 400, 1),
        "latency ratio": (r["latency"], 4.5, 0.1),
        "DA energy pJ": (da.energy_pj, 110.2, 0.1),
        "amortized pre-VMM pJ": (da.amortized_prevmm_pj, 6.88, 0.01),
        "DA total pJ": (da.total_energy_pj, 117, 1),
        "bit-slicing energy pJ": (bs.energy_pj, 1421.5, 0.1),
        "energy ratio": (r["energy"], 12, 1),
        "DA cells": (da.memory_cells, 67584, 1),
        "bit-slicing cells": (bs.memory_cells, 1200, 1),
        "cell ratio": (r["memory_cells"], 56, 1),
        "pre-VMM total nJ": (total / 1000, 68.8, 0.1),
        "pre-VMM per inference pJ": (per, 6.88, 0.01),
        "pre-VMM additions": (da.notes["additions"], 24576, 1),
    }
    failed = [f"{k}={v:.4g} vs {ref}" for k, (v, ref, tol) in checks.items()
              if abs(v - ref) > tol + 1e-9]
    elapsed = time.perf_counter() - start
    report("AC4 CONV1 cost table (calibrated)", not failed and elapsed < 1,
           f"{len(checks) - len(failed)}/{len(checks)} values within +-1 last digit, "
           f"{elapsed * 1000:.1f} ms" + (f"; failed: {failed}" if failed else ""))


def test_ac5_latency_formula(report):
    p = CostParams()
    formula = (p.t_precharge + p.t_discharge + p.t_sense) + 7 * p.t_pipelined_cycle + p.t_final_add
    latencies, cycles = [], []
    rng = np.random.default_rng(5)
    for m in (1, 6, 16):
        plan = plan_banks(25, 9)
        ledger = WriteCostLedger(0, 0)
        latencies.append(da_report(VmmShape(25, m), plan, ledger, "analytic", p).latency_ns)
        w = QuantizedMatrix(rng.integers(-128, 128, size=(25, m)))
        cycles.append(len(DaEngine.from_matrix(w)(rng.integers(0, 256, size=25).tolist()).trace))
    ok = formula == 88 and da_latency(8) == 88 and set(latencies) == {88} and set(cycles) == {8}
    report("AC5 da_latency(8) = 15 + 7x10 + 3, independent of M", ok,
           f"formula {formula} ns, M=1/6/16 -> {latencies} ns, trace cycles {cycles}")


def test_ac6_table_oracle(report):
    rng = np.random.default_rng(6)
    bad = 0
    for k in range(1, 11):
        w = QuantizedMatrix(rng.integers(-128, 128, size=(k, 3)))
        bad += not np.array_equal(build_table(w, 8 + 4).entries, build_table_naive(w))
    w = QuantizedMatrix(rng.integers(-128, 128, size=(8, 6)))
    pma = build_table(w, 11)
    wl = w.values.tolist()
    fixture = all(pma.read(0b10101100)[j] == wl[7][j] + wl[5][j] + wl[3][j] + wl[2][j]
                  for j in range(6))
    brute = all(pma.read(a)[j] == subset_sum(wl, list(range(8)), a, j)
                for a in range(256) for j in range(6))
    report("AC6 Gray-code tables == naive subset sums (k<=10) + 10101100 fixture",
           bad == 0 and fixture and brute, f"{bad} mismatching k, fixture {fixture}, brute {brute}")


def test_ac7_width_sufficiency(report):
    lines = []
    ok = True
    for n in (8, 16, 25):
        plan = plan_banks(n, 9)
        tree = AdderTreeSpec.for_plan(plan)
        x = validate_input([255] * n)
        for wv in (-128, 127):
            w = QuantizedMatrix(np.full((n, 6), wv))
            banks = build_banks(w, plan)
            y = execute_vmm(x, plan, banks, tree).y
            ok &= y == (255 * n * wv,) * 6
        undersized = AdderTreeSpec(tree.stage_widths, tree.acc_width - 1)
        banks = build_banks(QuantizedMatrix(np.full((n, 6), -128)), plan)
        try:
            execute_vmm(x, plan, banks, undersized)
            caught = False
        except WidthOverflowError:
            caught = True
        ok &= caught
        lines.append(f"N={n}: W_acc={tree.acc_width} ok, {tree.acc_width - 1} overflows={caught}")
    report("AC7 W_acc = B_x + B_w + ceil(log2 N) sufficient and tight", ok, "; ".join(lines))


def test_ac8_determinism(report, tmp_path):
    outs = []
    for d in ("a", "b"):
        code = main(["compare", "--seed", "42", "--paper-widths", "--out-dir", str(tmp_path / d)])
        outs.append(code)
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in ("cost_report.txt", "cost_report.json"))
    report("AC8 cmd_compare byte-identical across runs", outs == [0, 0] and same,
           f"exit codes {outs}, identical={same}")
