"""Per-step input windows shared with the unfolded detector (independent
implementation, cross-validated on fixtures).

D_j is the received window (R_{j-delta} .. R_{j+delta}) with zero padding;
C_j equals +D_j at marker-one positions, -D_j at marker-zero positions and
the zero vector at information positions.  Hard-channel symbols are mapped
0 -> +1, 1 -> -1 first.
"""

import numpy as np

from .dataio import BlockInfo, marker_layout


def map_symbols(r: np.ndarray, channel: str) -> np.ndarray:
    if channel in ("ids", "wbids"):
        return 1.0 - 2.0 * np.asarray(r, dtype=np.float64)
    return np.asarray(r, dtype=np.float64)


def build_windows(r: np.ndarray, info: BlockInfo, delta: int = None):
    """(C, D) arrays of shape (sent length, 2*delta + 1)."""
    delta = info.delta if delta is None else delta
    y = info.sent_length
    theta = map_symbols(r, info.channel)
    w = 2 * delta + 1
    d = np.zeros((y, w))
    for j in range(y):
        lo = j - delta
        for m in range(w):
            p = lo + m
            if 0 <= p < len(theta):
                d[j, m] = theta[p]
    is_marker, bits = marker_layout(info)
    sign = np.zeros(y)
    sign[is_marker & (bits == 1)] = 1.0
    sign[is_marker & (bits == 0)] = -1.0
    c = sign[:, None] * d
    return c, d


def backward_init_index(r_len: int, y: int, delta: int) -> int:
    return int(np.clip(r_len - y + delta, 0, 2 * delta))


def bce_loss(y_bits: np.ndarray, o: np.ndarray) -> float:
    """Mean binary cross entropy with the shared 1e-12 clamp."""
    y_bits = np.asarray(y_bits, dtype=np.float64)
    oc = np.clip(np.asarray(o, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y_bits * np.log(oc) + (1.0 - y_bits) * np.log(1.0 - oc)))
