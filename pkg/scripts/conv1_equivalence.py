"""Run CONV1 through the DA engine on random images and compare against numpy.

Reports mismatches and per-layer wall time.
"""

import argparse
import time

import numpy as np

from davmm.convmap import CONV1, FeatureMap, run_conv_layer, unroll_filters
from davmm.engine import DaEngine


def reference(img, filters):
    win = np.lib.stride_tricks.sliding_window_view(img, filters.shape[1:])
    return np.einsum("ijkl,fkl->fij", win, filters)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--images", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    mismatches = 0
    for i in range(args.images):
        filters = rng.integers(-128, 128, size=(6, 5, 5))
        img = rng.integers(0, 256, size=(32, 32))
        eng = DaEngine.from_matrix(unroll_filters(filters))
        t0 = time.perf_counter()
        out = run_conv_layer(CONV1, FeatureMap(img), eng.plan, eng.banks, eng.tree)
        dt = time.perf_counter() - t0
        got = np.stack([m.values for m in out.maps])
        bad = int(np.count_nonzero(got != reference(img, filters)))
        mismatches += bad
        print(f"image {i:2d}: {out.vmm_count} VMMs in {dt:.3f} s, {bad} mismatches")
    print(f"total mismatches: {mismatches}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
