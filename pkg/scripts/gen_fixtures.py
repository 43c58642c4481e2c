#!/usr/bin/env python3
"""Build the cross-implementation parity fixtures consumed by the GRU
detector package's tests (shared input construction and loss values)."""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from syncdet import datasets, fbnet, rng as rngmod  # noqa: E402
from syncdet.ber import make_random_grid  # noqa: E402
from syncdet.frames import load_code  # noqa: E402

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def main():
    os.makedirs(FIXTURE_DIR, exist_ok=True)
    c1 = load_code("c1")
    ds_path = os.path.join(FIXTURE_DIR, "parity.ds")
    grid = make_random_grid([0.012], snr_db=7.0)
    datasets.generate_dataset(c1, "idawgn", grid, 10, 99, ds_path)

    _, recs = datasets.read_dataset(ds_path)
    cs, ds_, binits = [], [], []
    for _, _, y_bits, r in recs:
        c, d = fbnet.build_inputs(r, c1.pmap, 17, "idawgn")
        cs.append(c)
        ds_.append(d)
        binits.append(fbnet.clamp_binit(len(r), c1.pmap.y, 17)[0])
    rng = rngmod.stream(98, 0)
    ys = rng.integers(0, 2, size=(3, 20)).astype(np.float64)
    os_ = rng.uniform(1e-13, 1.0 - 1e-13, size=(3, 20))
    losses = np.array([fbnet.bce_loss(y, o) for y, o in zip(ys, os_)])
    np.savez(os.path.join(FIXTURE_DIR, "parity_features.npz"),
             C=np.stack(cs), D=np.stack(ds_), binit=np.array(binits),
             bce_y=ys, bce_o=os_, bce_loss=losses)
    print("fixtures written to", FIXTURE_DIR)


if __name__ == "__main__":
    main()
