"""Adamax training loop for the unfolded detector's 13 weights."""

from dataclasses import dataclass, field

import numpy as np

from . import fbnet, rng as rngmod
from .markers import PositionMap


@dataclass
class TrainerState:
    """Adamax accumulators: bias-corrected first moment, infinity-norm second."""

    lr: float = 0.005
    batch_size: int = 20
    epochs: int = 300
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default_factory=lambda: np.zeros(13))
    u: np.ndarray = field(default_factory=lambda: np.zeros(13))

    def update(self, w: np.ndarray, g: np.ndarray) -> np.ndarray:
        self.step += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.u = np.maximum(self.beta2 * self.u, np.abs(g))
        lr_t = self.lr / (1.0 - self.beta1 ** self.step)
        return w - lr_t * self.m / (self.u + self.eps)


@dataclass
class TrainingSet:
    """Dense batchable training arrays for one code/marker geometry."""

    c: np.ndarray       # (N, y, 2*delta+1)
    d: np.ndarray
    binit: np.ndarray   # (N,)
    labels: np.ndarray  # (N, y)


def pack_training_set(records, pmap: PositionMap, delta: int, kind: str) -> TrainingSet:
    """records: iterable of (y_bits, r) pairs."""
    recs = list(records)
    n = len(recs)
    if n == 0:
        raise ValueError("empty training set")
    y = pmap.y
    w = 2 * delta + 1
    c = np.empty((n, y, w))
    d = np.empty((n, y, w))
    binit = np.empty(n, dtype=np.int64)
    labels = np.empty((n, y))
    for i, (y_bits, r) in enumerate(recs):
        if len(y_bits) != y:
            raise ValueError(f"record {i}: sent length {len(y_bits)}, expected {y}")
        c[i], d[i] = fbnet.build_inputs(r, pmap, delta, kind)
        binit[i], _ = fbnet.clamp_binit(len(r), y, delta)
        labels[i] = np.asarray(y_bits, dtype=np.float64)
    return TrainingSet(c=c, d=d, binit=binit, labels=labels)


def train_fbnet(ts: TrainingSet, delta: int, kind: str, state: TrainerState = None,
                init: fbnet.FbnetWeights = None, seed: int = 0,
                mask_markers_map: PositionMap = None, verbose: bool = False):
    """Minibatch Adamax on the batch-mean BCE; returns (weights, loss trace).

    The loss covers every sent position, markers included, unless
    mask_markers_map is given (then marker positions are dropped from the
    mean by zero-weighting both label terms).
    """
    state = state or TrainerState()
    w = (init.values if init is not None else fbnet.INIT_WEIGHTS).copy()
    n = ts.c.shape[0]
    labels = ts.labels
    weight_mask = None
    if mask_markers_map is not None:
        weight_mask = (~mask_markers_map.is_marker).astype(np.float64)

    trace = []
    for epoch in range(state.epochs):
        order = rngmod.stream(seed, epoch).permutation(n)
        epoch_loss = 0.0
        nb = 0
        for start in range(0, n, state.batch_size):
            idx = order[start:start + state.batch_size]
            if weight_mask is None:
                loss, g, _ = fbnet.loss_and_grads(ts.c[idx], ts.d[idx], ts.binit[idx],
                                                  labels[idx], w)
            else:
                loss, g = _masked_loss_and_grads(ts, idx, labels, weight_mask, w)
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"non-finite loss at epoch {epoch} step {nb}: {loss!r}, weights {w}")
            w = state.update(w, g)
            epoch_loss += loss
            nb += 1
        trace.append(epoch_loss / nb)
        if verbose and (epoch % 25 == 0 or epoch == state.epochs - 1):
            print(f"epoch {epoch:4d}  loss {trace[-1]:.6f}")
    return fbnet.FbnetWeights(values=w, delta=delta, channel=kind), np.array(trace)


def _masked_loss_and_grads(ts, idx, labels, weight_mask, w):
    # marker positions dropped from the mean: soft labels equal to the current
    # output give an exactly-zero per-position gradient there; rescale so loss
    # and gradient are means over the unmasked positions
    o, _ = fbnet.forward_batch(ts.c[idx], ts.d[idx], ts.binit[idx], w)
    lab = labels[idx] * weight_mask[None, :] + o * (1.0 - weight_mask)[None, :]
    _, g, _ = fbnet.loss_and_grads(ts.c[idx], ts.d[idx], ts.binit[idx], lab, w)
    scale = weight_mask.size / weight_mask.sum()
    oc = np.clip(o, fbnet.O_EPS, 1.0 - fbnet.O_EPS)
    per_pos = -(labels[idx] * np.log(oc) + (1.0 - labels[idx]) * np.log(1.0 - oc))
    loss = float((per_pos * weight_mask[None, :]).sum() / (weight_mask.sum() * len(idx)))
    return loss, g * scale
