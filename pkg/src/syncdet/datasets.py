"""SYNCDET-DATASET v1: text serialization of (Y, R) sample pairs.

One file holds one block per channel condition, each with a self-describing
header line; consumers shuffle across blocks themselves.  Floats are printed
with 17 significant digits so a write/read round trip is value-exact.
"""

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .channels import (BURST_KINDS, HARD_KINDS, RANDOM_KINDS, BurstChannelParams,
                       ChannelParams, perturb_csi)
from .frames import CodeAssets, simulate_frame
from .markers import MarkerScheme

MAGIC = "SYNCDET-DATASET v1"


class DatasetError(ValueError):
    pass


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class DatasetHeader:
    code: str
    n: int
    k: int
    marker: str
    interval: int
    channel: str
    delta: int
    seed: int
    count: int
    pi: float = None
    pd: float = None
    ps: float = None
    pbi: float = None
    pbd: float = None
    snr_db: float = None
    sigma2: float = None
    csi: str = "perfect"

    @property
    def y(self) -> int:
        return MarkerScheme(self.marker, self.interval).sent_length(self.n)

    @property
    def soft(self) -> bool:
        return self.channel in ("idawgn", "wbidawgn")

    def params(self):
        if self.channel in RANDOM_KINDS:
            return ChannelParams(pi=self.pi, pd=self.pd, ps=self.ps or 0.0,
                                 sigma2=self.sigma2)
        return BurstChannelParams(pbi=self.pbi, pbd=self.pbd, ps=self.ps or 0.0,
                                  sigma2=self.sigma2)

    def to_line(self) -> str:
        kv = [("code", self.code), ("n", self.n), ("k", self.k),
              ("marker", self.marker), ("interval", self.interval),
              ("channel", self.channel)]
        if self.channel in RANDOM_KINDS:
            kv += [("pi", _fmt(self.pi)), ("pd", _fmt(self.pd)), ("ps", _fmt(self.ps or 0.0))]
        else:
            kv += [("pbi", _fmt(self.pbi)), ("pbd", _fmt(self.pbd)),
                   ("ps", _fmt(self.ps or 0.0))]
        if self.soft:
            kv += [("snr_db", _fmt(self.snr_db)), ("sigma2", _fmt(self.sigma2))]
        kv += [("delta", self.delta), ("seed", self.seed), ("count", self.count)]
        if self.csi != "perfect":
            kv.append(("csi", self.csi))
        return "BLOCK " + " ".join(f"{k}={v}" for k, v in kv)

    @classmethod
    def from_line(cls, line: str, lineno: int) -> "DatasetHeader":
        toks = line.split()
        if toks[0] != "BLOCK":
            raise DatasetError(f"line {lineno}: expected BLOCK header")
        kv = {}
        for t in toks[1:]:
            if "=" not in t:
                raise DatasetError(f"line {lineno}: malformed key=value token {t!r}")
            k, v = t.split("=", 1)
            kv[k] = v
        try:
            hd = cls(code=kv["code"], n=int(kv["n"]), k=int(kv["k"]),
                     marker=kv["marker"], interval=int(kv["interval"]),
                     channel=kv["channel"], delta=int(kv["delta"]),
                     seed=int(kv["seed"]), count=int(kv["count"]),
                     csi=kv.get("csi", "perfect"))
        except KeyError as e:
            raise DatasetError(f"line {lineno}: missing header key {e}") from None
        for fkey in ("pi", "pd", "ps", "pbi", "pbd", "snr_db", "sigma2"):
            if fkey in kv:
                setattr(hd, fkey, float(kv[fkey]))
        return hd


def generate_dataset(assets: CodeAssets, kind: str, conditions, per_condition: int,
                     seed: int, path: str, csi_mode: str = "perfect"):
    """Write one block per channel condition; returns the header list.

    csi_mode 'noisy' transmits every record through an independently
    perturbed copy of its block's nominal parameters (random kinds only).
    """
    if per_condition < 1:
        raise ValueError("per_condition must be >= 1")
    if csi_mode not in ("perfect", "noisy"):
        raise ValueError("csi_mode must be 'perfect' or 'noisy'")
    if csi_mode == "noisy" and kind in BURST_KINDS:
        raise ValueError("noisy CSI generation applies to random channels only")
    headers = []
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(MAGIC + "\n")
            for bi, cond in enumerate(conditions):
                hd = _header_for(assets, kind, cond, per_condition, seed, csi_mode)
                headers.append(hd)
                fh.write(hd.to_line() + "\n")
                for ri in range(per_condition):
                    rng = rngmod.stream(seed, bi, ri)
                    params = cond
                    if csi_mode == "noisy":
                        params = perturb_csi(cond, rng)
                    frame = simulate_frame(assets, params, kind, rng)
                    fh.write("Y " + "".join(str(int(b)) for b in frame.y_bits) + "\n")
                    if hd.soft:
                        fh.write("R " + " ".join(_fmt(v) for v in frame.r) + "\n")
                    else:
                        fh.write("R " + " ".join(str(int(v)) for v in frame.r) + "\n")
    except OSError as e:
        raise DatasetError(f"cannot write dataset {path}: {e}") from e
    return headers


def _header_for(assets, kind, cond, count, seed, csi_mode) -> DatasetHeader:
    hd = DatasetHeader(code=assets.name, n=assets.n, k=assets.k,
                       marker=assets.scheme.pattern, interval=assets.scheme.interval,
                       channel=kind, delta=17, seed=seed, count=count, csi=csi_mode)
    if isinstance(cond, BurstChannelParams):
        hd.pbi, hd.pbd, hd.ps = cond.pbi, cond.pbd, cond.ps
    else:
        hd.pi, hd.pd, hd.ps = cond.pi, cond.pd, cond.ps
    if cond.sigma2 is not None:
        hd.sigma2 = cond.sigma2
        hd.snr_db = -10.0 * np.log10(cond.sigma2)
    return hd


def read_dataset(path: str):
    """Parse headers eagerly, records lazily.

    Returns (headers, iterator of (block index, record index, Y bits, R)).
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise DatasetError(f"{path}: missing '{MAGIC}' magic line")
    headers = []
    layout = []  # (header, first record line index)
    i = 1
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        hd = DatasetHeader.from_line(lines[i], i + 1)
        headers.append(hd)
        layout.append((hd, i + 1))
        i += 1 + 2 * hd.count
        if i > len(lines):
            raise DatasetError(f"{path}: block of {hd.count} records truncated")

    def records():
        for bi, (hd, start) in enumerate(layout):
            y_expect = hd.y
            for ri in range(hd.count):
                yl = lines[start + 2 * ri]
                rl = lines[start + 2 * ri + 1]
                if not yl.startswith("Y "):
                    raise DatasetError(f"block {bi} record {ri}: expected 'Y ' line")
                if not rl.startswith("R") or (len(rl) > 1 and rl[1] != " "):
                    raise DatasetError(f"block {bi} record {ri}: expected 'R ' line")
                ystr = yl[2:].strip()
                if len(ystr) != y_expect or any(ch not in "01" for ch in ystr):
                    raise DatasetError(f"block {bi} record {ri}: bad Y bit string")
                y_bits = np.frombuffer(ystr.encode(), dtype=np.uint8) - ord("0")
                toks = rl[2:].split()
                try:
                    if hd.soft:
                        r = np.array([float(t) for t in toks])
                    else:
                        r = np.array([int(t) for t in toks], dtype=np.uint8)
                        if len(r) and not np.isin(r, (0, 1)).all():
                            raise ValueError
                except ValueError:
                    raise DatasetError(
                        f"block {bi} record {ri}: malformed R token") from None
                yield bi, ri, y_bits, r

    return headers, records()
