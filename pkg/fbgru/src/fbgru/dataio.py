"""Reader for SYNCDET-DATASET v1 files (independent implementation).

Format: magic line, then per condition a `BLOCK key=value ...` header
followed by `count` record pairs of `Y <bits>` / `R <tokens>` lines.
"""

import math
from dataclasses import dataclass

import numpy as np

MAGIC = "SYNCDET-DATASET v1"
SOFT_CHANNELS = ("idawgn", "wbidawgn")


@dataclass
class BlockInfo:
    code: str
    n: int
    k: int
    marker: str
    interval: int
    channel: str
    delta: int
    seed: int
    count: int
    extras: dict

    @property
    def soft(self) -> bool:
        return self.channel in SOFT_CHANNELS

    @property
    def sent_length(self) -> int:
        groups = math.ceil(self.n / self.interval)
        return self.n + len(self.marker) * (groups - 1)


def _parse_block(line: str) -> BlockInfo:
    kv = dict(tok.split("=", 1) for tok in line.split()[1:])
    extras = {k: v for k, v in kv.items()
              if k not in ("code", "n", "k", "marker", "interval", "channel",
                           "delta", "seed", "count")}
    return BlockInfo(code=kv["code"], n=int(kv["n"]), k=int(kv["k"]),
                     marker=kv["marker"], interval=int(kv["interval"]),
                     channel=kv["channel"], delta=int(kv["delta"]),
                     seed=int(kv["seed"]), count=int(kv["count"]), extras=extras)


def read_dataset(path: str):
    """Returns (blocks, records); records are (block_idx, Y bits, R array)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError(f"{path}: not a {MAGIC} file")
    blocks = []
    records = []
    i = 1
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        if not lines[i].startswith("BLOCK "):
            raise ValueError(f"{path}:{i + 1}: expected BLOCK header")
        info = _parse_block(lines[i])
        bi = len(blocks)
        blocks.append(info)
        i += 1
        for _ in range(info.count):
            ystr = lines[i][2:]
            y_bits = np.frombuffer(ystr.encode(), dtype=np.uint8) - ord("0")
            toks = lines[i + 1][2:].split()
            if info.soft:
                r = np.array([float(t) for t in toks])
            else:
                r = np.array([int(t) for t in toks], dtype=np.uint8)
            records.append((bi, y_bits, r))
            i += 2
    return blocks, records


def marker_layout(info: BlockInfo):
    """(is_marker mask, marker bit values) over the sent sequence."""
    y = info.sent_length
    pattern = np.array([int(c) for c in info.marker], dtype=np.uint8)
    is_marker = np.zeros(y, dtype=bool)
    bits = np.zeros(y, dtype=np.uint8)
    groups = math.ceil(info.n / info.interval)
    pos = 0
    remaining = info.n
    for g in range(groups):
        take = min(info.interval, remaining)
        pos += take
        remaining -= take
        if g < groups - 1:
            is_marker[pos:pos + len(pattern)] = True
            bits[pos:pos + len(pattern)] = pattern
            pos += len(pattern)
    return is_marker, bits
