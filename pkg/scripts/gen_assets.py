#!/usr/bin/env python3
"""Regenerate the bundled parity-check matrices (deterministic)."""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from syncdet import ldpc, rng as rngmod  # noqa: E402

ASSET_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "syncdet", "assets")


def main():
    os.makedirs(ASSET_DIR, exist_ok=True)

    # (273,191): pseudo-random column-weight-3 code, full-rank 82x273
    h1 = ldpc.make_random_ldpc(273, 82, 3, rngmod.stream(20240273, 0))
    assert ldpc.gf2_rank(h1.dense()) == 82
    enc1 = ldpc.derive_encoder(h1)
    assert enc1.k == 191, enc1.k
    with open(os.path.join(ASSET_DIR, "c1_273_191.alist"), "w") as fh:
        fh.write(ldpc.write_alist(h1))
    print("c1: n=273 m=82 k=191 edges", h1.num_edges)

    # (648,540): IEEE 802.11n rate-5/6, Z=27
    h2 = ldpc.make_qc_ldpc(ldpc.WIFI_N648_R56_BASE, ldpc.WIFI_N648_R56_Z)
    rank2 = ldpc.gf2_rank(h2.dense())
    assert rank2 == 108, rank2
    enc2 = ldpc.derive_encoder(h2)
    assert enc2.k == 540, enc2.k
    with open(os.path.join(ASSET_DIR, "c2_648_540.alist"), "w") as fh:
        fh.write(ldpc.write_alist(h2))
    print("c2: n=648 m=108 k=540 edges", h2.num_edges)

    ham = ldpc.matrix_from_dense(np.array([
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ], dtype=np.uint8))
    with open(os.path.join(ASSET_DIR, "hamming_7_4.alist"), "w") as fh:
        fh.write(ldpc.write_alist(ham))
    print("hamming74 written")


if __name__ == "__main__":
    main()
