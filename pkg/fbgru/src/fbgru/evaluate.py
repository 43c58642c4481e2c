"""BER evaluation: model LLRs bridged to the detection toolkit's decoder.

The model's per-position LLRs are written as a `frame_index,position,llr`
CSV and handed to `syncdet eval --llr-in`, which owns LDPC decoding and the
shared BER CSV schema.
"""

import subprocess
import sys

import numpy as np
import torch

from .dataio import read_dataset
from .features import build_windows
from .model import Fbgru


def compute_llrs(model: Fbgru, dataset_path: str, batch: int = 64):
    """Per-frame LLR vectors, ln(P(bit 0)/P(bit 1)) per sent position."""
    blocks, records = read_dataset(dataset_path)
    delta = model.config.delta
    out = []
    with torch.no_grad():
        for start in range(0, len(records), batch):
            chunk = records[start:start + batch]
            cs, ds = [], []
            for bi, _, r in chunk:
                c, d = build_windows(r, blocks[bi], delta)
                cs.append(c)
                ds.append(d)
            c = torch.tensor(np.stack(cs), dtype=torch.float32)
            d = torch.tensor(np.stack(ds), dtype=torch.float32)
            o = model(c, d).double().clamp(1e-12, 1.0 - 1e-12).numpy()
            out.extend(np.log(1.0 - o[i]) - np.log(o[i]) for i in range(len(chunk)))
    return out


def write_llr_bridge(llrs, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("frame_index,position,llr\n")
        for fi, vec in enumerate(llrs):
            for pos, v in enumerate(vec):
                fh.write(f"{fi},{pos},{v:.17g}\n")


def decode_with_primary(dataset_path: str, bridge_path: str, out_csv: str,
                        detector_id: str = "fbgru"):
    """Invoke the detection toolkit CLI for LDPC decoding and BER rows."""
    cmd = [sys.executable, "-m", "syncdet.cli", "eval",
           "--dataset", dataset_path, "--llr-in", bridge_path,
           "--detector-id", detector_id, "--out", out_csv]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"primary eval failed: {proc.stderr.strip()}")
    return out_csv


def evaluate(model: Fbgru, dataset_path: str, bridge_path: str, out_csv: str,
             detector_id: str = "fbgru"):
    llrs = compute_llrs(model, dataset_path)
    write_llr_bridge(llrs, bridge_path)
    return decode_with_primary(dataset_path, bridge_path, out_csv, detector_id)
