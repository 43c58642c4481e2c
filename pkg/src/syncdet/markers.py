"""Periodic marker insertion around a codeword and position bookkeeping.

The sent sequence interleaves the codeword with a fixed marker pattern after
every `interval` information bits; the final (possibly short) group gets no
trailing marker, so y = x + |M| * (ceil(x / l) - 1).
"""

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MarkerScheme:
    pattern: str = "001"
    interval: int = 9

    def __post_init__(self):
        if len(self.pattern) < 1 or any(ch not in "01" for ch in self.pattern):
            raise ValueError("marker pattern must be a nonempty bit string")
        if self.interval < 1:
            raise ValueError("marker interval must be >= 1")

    @property
    def pattern_bits(self) -> np.ndarray:
        return np.array([int(c) for c in self.pattern], dtype=np.uint8)

    def sent_length(self, x: int) -> int:
        return x + len(self.pattern) * (math.ceil(x / self.interval) - 1)


@dataclass(frozen=True)
class PositionMap:
    """Per-sent-position classification for one (codeword length, scheme)."""

    x: int
    y: int
    is_marker: np.ndarray    # bool (y,)
    marker_bits: np.ndarray  # uint8 (y,), only valid where is_marker
    info_index: np.ndarray   # int64 (y,), codeword index or -1 at markers
    info_positions: np.ndarray = field(default=None)  # int64 (x,), sent position of bit i

    def prior_one(self) -> np.ndarray:
        """Pr(Y_j = 1) track: 0.5 at info positions, the fixed bit at markers."""
        p = np.full(self.y, 0.5)
        p[self.is_marker] = self.marker_bits[self.is_marker].astype(np.float64)
        return p


def build_position_map(x: int, scheme: MarkerScheme) -> PositionMap:
    if x < 1:
        raise ValueError("codeword length must be >= 1")
    mbits = scheme.pattern_bits
    l = scheme.interval
    groups = math.ceil(x / l)
    y = x + len(mbits) * (groups - 1)
    is_marker = np.zeros(y, dtype=bool)
    marker_bits = np.zeros(y, dtype=np.uint8)
    info_index = np.full(y, -1, dtype=np.int64)
    pos = 0
    ci = 0
    for g in range(groups):
        take = min(l, x - ci)
        info_index[pos:pos + take] = np.arange(ci, ci + take)
        ci += take
        pos += take
        if g < groups - 1:
            is_marker[pos:pos + len(mbits)] = True
            marker_bits[pos:pos + len(mbits)] = mbits
            pos += len(mbits)
    info_positions = np.nonzero(~is_marker)[0]
    return PositionMap(x=x, y=y, is_marker=is_marker, marker_bits=marker_bits,
                       info_index=info_index, info_positions=info_positions)


def insert_markers(x_bits: np.ndarray, scheme: MarkerScheme):
    """Return (sent bits, position map) for one codeword."""
    x_bits = np.asarray(x_bits, dtype=np.uint8)
    pmap = build_position_map(len(x_bits), scheme)
    y_bits = pmap.marker_bits.copy()
    y_bits[~pmap.is_marker] = x_bits
    return y_bits, pmap


def strip_markers(y_bits: np.ndarray, pmap: PositionMap) -> np.ndarray:
    """Drop marker positions; inverse of insert_markers on the codeword."""
    y_bits = np.asarray(y_bits)
    if len(y_bits) != pmap.y:
        raise ValueError(f"sent length {len(y_bits)}, expected {pmap.y}")
    return np.asarray(y_bits[pmap.info_positions], dtype=np.uint8)


def extract_info_llrs(llr_y: np.ndarray, pmap: PositionMap) -> np.ndarray:
    """Select the LLRs of the codeword positions, in codeword order."""
    llr_y = np.asarray(llr_y, dtype=np.float64)
    if llr_y.shape[-1] != pmap.y:
        raise ValueError(f"LLR length {llr_y.shape[-1]}, expected {pmap.y}")
    return llr_y[..., pmap.info_positions]
