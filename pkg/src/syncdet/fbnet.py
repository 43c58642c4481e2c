"""CSI-agnostic unfolded detector: 13 trainable scalars over the drift band.

Per time step a forward cell, a backward cell and an APP unit update
length-(2*delta+1) state vectors (ReLU + sum-normalization keeps them on the
simplex).  The symbol metric is replaced by sigmoids of weighted input
windows, so no channel probabilities enter the computation.  Gradients of
the batch-mean BCE loss are reverse-mode, hand-rolled through the unrolled
graph; clamp and fallback saturation regions pass zero gradient.
"""

from dataclasses import dataclass

import numpy as np

from .markers import PositionMap

P_CLIP_LO = 1e-12
P_CLIP_HI = 1.0
NORM_EPS = 1e-30
O_EPS = 1e-12

# init anchors: 0.2 for shift weights, 0.6 for stay weights, -6.0 for the
# three metric weights
INIT_WEIGHTS = np.array([0.2, 0.6, 0.2, -6.0,
                         0.2, 0.6, 0.2, -6.0,
                         0.2, 0.2, 0.6, 0.6, -6.0])


@dataclass
class FbnetWeights:
    values: np.ndarray  # (13,) ordered w1..w13
    delta: int
    channel: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (13,):
            raise ValueError("expected exactly 13 weights")
        if not np.isfinite(self.values).all():
            raise ValueError("weights must be finite")


def initial_weights(delta: int, channel: str) -> FbnetWeights:
    return FbnetWeights(values=INIT_WEIGHTS.copy(), delta=delta, channel=channel)


def save_weights(w: FbnetWeights, path: str):
    lines = [f"FBNET-WEIGHTS v1 delta={w.delta} channel={w.channel}"]
    for i, v in enumerate(w.values, start=1):
        lines.append(f"w{i} {v:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_weights(path: str) -> FbnetWeights:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    head = lines[0].split()
    if len(head) != 4 or head[0] != "FBNET-WEIGHTS" or head[1] != "v1":
        raise ValueError(f"{path}: not a FBNET-WEIGHTS v1 file")
    fields = dict(kv.split("=", 1) for kv in head[2:])
    vals = np.full(13, np.nan)
    for ln in lines[1:]:
        name, sval = ln.split()
        idx = int(name[1:]) - 1
        vals[idx] = float(sval)
    if np.isnan(vals).any():
        raise ValueError(f"{path}: missing weight lines")
    return FbnetWeights(values=vals, delta=int(fields["delta"]), channel=fields["channel"])


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def rshift(a: np.ndarray) -> np.ndarray:
    """Prepend a zero, drop the last entry (along the band axis)."""
    out = np.zeros_like(a)
    out[..., 1:] = a[..., :-1]
    return out


def lshift(a: np.ndarray) -> np.ndarray:
    """Drop the first entry, append a zero."""
    out = np.zeros_like(a)
    out[..., :-1] = a[..., 1:]
    return out


def map_received(r: np.ndarray, kind: str) -> np.ndarray:
    """Hard symbols map 0 -> +1, 1 -> -1; soft symbols pass through."""
    if kind in ("ids", "wbids"):
        return 1.0 - 2.0 * np.asarray(r, dtype=np.float64)
    if kind in ("idawgn", "wbidawgn"):
        return np.asarray(r, dtype=np.float64)
    raise ValueError(f"unknown channel kind {kind!r}")


def build_inputs(r: np.ndarray, pmap: PositionMap, delta: int, kind: str):
    """Input windows (C, D), each (y, 2*delta+1); out-of-range entries 0.

    D is the raw received window; C is +window at marker-1 positions,
    -window at marker-0 positions and all-zero at information positions.
    """
    theta = map_received(r, kind)
    y = pmap.y
    w = 2 * delta + 1
    padded = np.zeros(y + 2 * delta)
    upto = min(len(theta), y + delta)
    padded[delta:delta + upto] = theta[:upto]
    d = np.lib.stride_tricks.sliding_window_view(padded, w).copy()
    sign = np.zeros(y)
    sign[pmap.is_marker & (pmap.marker_bits == 1)] = 1.0
    sign[pmap.is_marker & (pmap.marker_bits == 0)] = -1.0
    c = sign[:, None] * d
    return c, d


def clamp_binit(r_len: int, y: int, delta: int):
    """Backward init index r - y + delta (0-based), clamped to the band."""
    idx = r_len - y + delta
    overflow = idx < 0 or idx > 2 * delta
    return int(np.clip(idx, 0, 2 * delta)), overflow


def _normalize_rows(pre: np.ndarray):
    """ReLU then divide by the row sum; degenerate rows reset to uniform."""
    relu = np.maximum(pre, 0.0)
    s = relu.sum(axis=-1)
    fallback = s < NORM_EPS
    w = pre.shape[-1]
    out = np.where(fallback[..., None], 1.0 / w, relu / np.where(fallback, 1.0, s)[..., None])
    return out, relu, s, fallback


class FbnetTape:
    """Forward activations for one batch, kept for the backward pass."""


def forward_batch(c: np.ndarray, d: np.ndarray, binit: np.ndarray, w: np.ndarray,
                  keep_tape: bool = False):
    """Run the three unit types over a batch; returns (O, tape or None).

    c, d: (F, y, W) input windows; binit: (F,) backward init indices.
    """
    w = np.asarray(w, dtype=np.float64)
    nf, y, wd = c.shape
    gam_f = sigmoid(w[3] * c)
    gam_b = sigmoid(w[7] * c)
    eps = sigmoid(w[12] * d)

    a = np.empty((nf, y + 1, wd))
    a[:, 0] = 0.0
    a[:, 0, (wd - 1) // 2] = 1.0
    relu_a = np.empty((nf, y, wd))
    s_a = np.empty((nf, y))
    fb_a = np.zeros((nf, y), dtype=bool)
    for t in range(y):
        pre = (w[0] * rshift(a[:, t]) * rshift(gam_f[:, t])
               + w[1] * a[:, t] * gam_f[:, t]
               + w[2] * lshift(a[:, t]))
        a[:, t + 1], relu_a[:, t], s_a[:, t], fb_a[:, t] = _normalize_rows(pre)

    b = np.empty((nf, y + 1, wd))
    b[:, y] = 0.0
    b[np.arange(nf), y, binit] = 1.0
    relu_b = np.empty((nf, y, wd))
    s_b = np.empty((nf, y))
    fb_b = np.zeros((nf, y), dtype=bool)
    for t in range(y - 1, 0, -1):  # B_0 is never consumed, skip it
        pre = (w[4] * lshift(b[:, t + 1]) * lshift(gam_b[:, t])
               + w[5] * b[:, t + 1] * gam_b[:, t]
               + w[6] * rshift(b[:, t + 1]))
        b[:, t], relu_b[:, t], s_b[:, t], fb_b[:, t] = _normalize_rows(pre)

    a_cur = a[:, 1:]
    a_prev = a[:, :-1]
    b_cur = b[:, 1:]
    t9 = (rshift(a_cur) * b_cur).sum(axis=2)
    t10 = (lshift(a_prev) * b_cur).sum(axis=2)
    t11 = (a_prev * b_cur * eps).sum(axis=2)
    t12 = (a_prev * b_cur * (1.0 - eps)).sum(axis=2)
    p1_raw = w[8] * t9 + w[9] * t10 + w[10] * t11
    p0_raw = w[8] * t9 + w[9] * t10 + w[11] * t12
    p1 = np.clip(p1_raw, P_CLIP_LO, P_CLIP_HI)
    p0 = np.clip(p0_raw, P_CLIP_LO, P_CLIP_HI)
    z = np.log(p1) - np.log(p0)
    o = sigmoid(z)

    if not keep_tape:
        return o, None
    tape = FbnetTape()
    tape.w = w
    tape.c, tape.d = c, d
    tape.gam_f, tape.gam_b, tape.eps = gam_f, gam_b, eps
    tape.a, tape.b = a, b
    tape.relu_a, tape.s_a, tape.fb_a = relu_a, s_a, fb_a
    tape.relu_b, tape.s_b, tape.fb_b = relu_b, s_b, fb_b
    tape.t9, tape.t10, tape.t11, tape.t12 = t9, t10, t11, t12
    tape.p1_raw, tape.p0_raw = p1_raw, p0_raw
    tape.p1, tape.p0, tape.o = p1, p0, o
    return o, tape


def bce_loss(y_bits: np.ndarray, o: np.ndarray) -> float:
    """Mean binary cross entropy over all positions (and frames, if batched)."""
    y_bits = np.asarray(y_bits, dtype=np.float64)
    oc = np.clip(o, O_EPS, 1.0 - O_EPS)
    return float(-np.mean(y_bits * np.log(oc) + (1.0 - y_bits) * np.log(1.0 - oc)))


def _norm_backward(d_out: np.ndarray, out_rows: np.ndarray, relu: np.ndarray,
                   s: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Gradient through ReLU + sum-normalization; fallback rows pass zero."""
    live = ~fallback
    ssafe = np.where(live, s, 1.0)
    inner = (d_out * out_rows).sum(axis=-1)
    d_relu = (d_out - inner[..., None]) / ssafe[..., None]
    d_relu = np.where(live[..., None], d_relu, 0.0)
    return d_relu * (relu > 0.0)


def loss_and_grads(c, d, binit, y_bits, w):
    """Batch-mean BCE and its 13 partial derivatives.

    y_bits: (F, y) labels covering every sent position (markers included).
    """
    o, tp = forward_batch(c, d, binit, w, keep_tape=True)
    nf, y, wd = c.shape
    loss = bce_loss(y_bits, o)

    g = np.zeros(13)
    dz = (o - np.asarray(y_bits, dtype=np.float64)) / (nf * y)
    live1 = (tp.p1_raw > P_CLIP_LO) & (tp.p1_raw < P_CLIP_HI)
    live0 = (tp.p0_raw > P_CLIP_LO) & (tp.p0_raw < P_CLIP_HI)
    dp1 = np.where(live1, dz / tp.p1, 0.0)
    dp0 = np.where(live0, -dz / tp.p0, 0.0)
    dsum = dp1 + dp0

    g[8] = (dsum * tp.t9).sum()
    g[9] = (dsum * tp.t10).sum()
    g[10] = (dp1 * tp.t11).sum()
    g[11] = (dp0 * tp.t12).sum()

    a_cur = tp.a[:, 1:]
    a_prev = tp.a[:, :-1]
    b_cur = tp.b[:, 1:]
    dt9 = (dsum * w[8])[..., None]
    dt10 = (dsum * w[9])[..., None]
    dt11 = (dp1 * w[10])[..., None]
    dt12 = (dp0 * w[11])[..., None]

    d_a = np.zeros_like(tp.a)   # accumulated per row
    d_b = np.zeros_like(tp.b)
    d_a[:, 1:] += dt9 * lshift(b_cur)
    d_a[:, :-1] += dt10 * rshift(b_cur) + dt11 * (b_cur * tp.eps) \
        + dt12 * (b_cur * (1.0 - tp.eps))
    d_b[:, 1:] += dt9 * rshift(a_cur) + dt10 * lshift(a_prev) \
        + dt11 * (a_prev * tp.eps) + dt12 * (a_prev * (1.0 - tp.eps))
    d_eps = (dt11 - dt12) * (a_prev * b_cur)
    g[12] = (d_eps * tp.eps * (1.0 - tp.eps) * tp.d).sum()

    # forward chain, deepest row first
    for t in range(y - 1, -1, -1):
        d_pre = _norm_backward(d_a[:, t + 1], tp.a[:, t + 1], tp.relu_a[:, t],
                               tp.s_a[:, t], tp.fb_a[:, t])
        ra = rshift(tp.a[:, t])
        rg = rshift(tp.gam_f[:, t])
        g[0] += (d_pre * ra * rg).sum()
        g[1] += (d_pre * tp.a[:, t] * tp.gam_f[:, t]).sum()
        g[2] += (d_pre * lshift(tp.a[:, t])).sum()
        d_gam = w[0] * tp.a[:, t] * lshift(d_pre) + w[1] * tp.a[:, t] * d_pre
        g[3] += (d_gam * tp.gam_f[:, t] * (1.0 - tp.gam_f[:, t]) * tp.c[:, t]).sum()
        d_a[:, t] += (w[0] * tp.gam_f[:, t] * lshift(d_pre)
                      + w[1] * tp.gam_f[:, t] * d_pre
                      + w[2] * rshift(d_pre))

    # backward chain: B_t was produced from B_{t+1}, reverse in increasing t
    for t in range(1, y):
        d_pre = _norm_backward(d_b[:, t], tp.b[:, t], tp.relu_b[:, t],
                               tp.s_b[:, t], tp.fb_b[:, t])
        lb = lshift(tp.b[:, t + 1])
        lg = lshift(tp.gam_b[:, t])
        g[4] += (d_pre * lb * lg).sum()
        g[5] += (d_pre * tp.b[:, t + 1] * tp.gam_b[:, t]).sum()
        g[6] += (d_pre * rshift(tp.b[:, t + 1])).sum()
        d_gam = w[4] * tp.b[:, t + 1] * rshift(d_pre) + w[5] * tp.b[:, t + 1] * d_pre
        g[7] += (d_gam * tp.gam_b[:, t] * (1.0 - tp.gam_b[:, t]) * tp.c[:, t]).sum()
        d_b[:, t + 1] += (w[4] * tp.gam_b[:, t] * rshift(d_pre)
                          + w[5] * tp.gam_b[:, t] * d_pre
                          + w[6] * lshift(d_pre))

    return loss, g, o


def infer_batch(rs, pmap: PositionMap, weights: FbnetWeights, kind: str):
    """Posterior O and LLRs for a batch of frames sharing one position map.

    Returns (O (F, y), llrs (F, y), overflow flags (F,)).
    """
    delta = weights.delta
    y = pmap.y
    nf = len(rs)
    c = np.empty((nf, y, 2 * delta + 1))
    d = np.empty_like(c)
    binit = np.empty(nf, dtype=np.int64)
    overflow = np.zeros(nf, dtype=bool)
    for f, r in enumerate(rs):
        c[f], d[f] = build_inputs(r, pmap, delta, kind)
        binit[f], overflow[f] = clamp_binit(len(r), y, delta)
    o, _ = forward_batch(c, d, binit, weights.values)
    p1c = np.clip(o, O_EPS, 1.0 - O_EPS)
    llrs = np.log(1.0 - p1c) - np.log(p1c)
    return o, llrs, overflow


def fbnet_infer(r, pmap: PositionMap, weights: FbnetWeights, kind: str):
    """Single-frame inference: (O (y,), llrs (y,), overflow flag)."""
    o, llrs, overflow = infer_batch([np.asarray(r)], pmap, weights, kind)
    return o[0], llrs[0], bool(overflow[0])
