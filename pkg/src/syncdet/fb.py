"""Exact forward-backward MAP symbol detection on the banded drift lattice.

The hidden state at sent position j is the drift k = (#insertions - #deletions)
so far, confined to [-delta, +delta].  Forward rows follow the three-term
recursion (insertion P_i/2 within the row, deletion P_d and transmission
P_t * sum_Y Pr(Y) F(Y, R) from the previous row); every row is rescaled to
sum 1 with the log-scale accumulated, so likelihood ratios are exact for any
sequence length.

Per-symbol metrics F(Y, R) are the normalized forms (F(0, s) + F(1, s) = 1):
substitution table for hard channels, sigmoid(2R/sigma2) for soft ones.  The
common per-symbol normalizer cancels in every posterior ratio.

Symbol posteriors decompose over the transition that consumes Y_j (deletion
or transmission); insertion runs are already folded into the neighbouring
lattice rows, so the decomposition is exact.  Posteriors are validated
against exhaustive event-sequence enumeration (see oracle.py).
"""

from dataclasses import dataclass

import numpy as np

from .channels import ChannelParams
from .markers import PositionMap

LLR_MAX = float(np.log(1e12))


class DetectionFailure(RuntimeError):
    """A lattice row lost all probability mass (no surviving path)."""


@dataclass
class DriftLattice:
    """Banded forward/backward arrays for one frame (rows sum to 1)."""

    delta: int
    alpha: np.ndarray        # (y+1, 2*delta+1)
    beta: np.ndarray         # (y+1, 2*delta+1)
    alpha_logscale: np.ndarray  # cumulative log of row scales, (y+1,)
    beta_logscale: np.ndarray


@dataclass
class DetectResult:
    llrs: np.ndarray          # per sent position, ln(P0/P1), clamped
    drift_overflow: bool
    neutral_positions: int    # positions where both hypotheses had zero mass
    evidence_profile: np.ndarray  # log Pr(R)-style constant per position (sanity)


def symbol_metrics(r: np.ndarray, kind: str, csi: ChannelParams):
    """Per received symbol: (F(Y=1, s), F(Y=0, s)), normalized to sum 1."""
    r = np.asarray(r)
    if kind in ("ids", "wbids"):
        f1 = np.where(r.astype(np.uint8) == 1, 1.0 - csi.ps, csi.ps).astype(np.float64)
    elif kind in ("idawgn", "wbidawgn"):
        if csi.sigma2 is None:
            raise ValueError("soft detection needs sigma2 in the CSI")
        x = 2.0 * r.astype(np.float64) / csi.sigma2
        f0 = np.empty_like(x)
        pos = x >= 0
        f0[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        f0[~pos] = ex / (1.0 + ex)
        return 1.0 - f0, f0
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    return f1, 1.0 - f1


def _metric_windows(f1: np.ndarray, y: int, delta: int) -> np.ndarray:
    """(y, 2*delta+1) windows of a per-received-symbol array; rows t cover
    received indices t-delta .. t+delta, out-of-range entries neutral 0.5."""
    w = 2 * delta + 1
    padded = np.full(y + 2 * delta, 0.5)
    upto = min(len(f1), y + delta)
    padded[delta:delta + upto] = f1[:upto]
    return np.lib.stride_tricks.sliding_window_view(padded, w).copy()


def _rshift(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[..., 1:] = a[..., :-1]
    return out


def _lshift(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[..., :-1] = a[..., 1:]
    return out


def _run_kernels(q: np.ndarray, w: int):
    """Lower-triangular geometric kernels for the in-row insertion closure:
    K[f, i, m] = q_f^(m-i) for m >= i, so closed = base @ K."""
    steps = np.arange(w)
    expo = steps[None, :] - steps[:, None]
    with np.errstate(invalid="ignore"):
        k = np.where(expo >= 0, q[:, None, None] ** np.maximum(expo, 0), 0.0)
    return k


class _BatchLattice:
    """Forward/backward rows for a batch of frames sharing one position map."""

    def __init__(self, rs, pmap: PositionMap, csis, kind: str, delta: int):
        self.y = pmap.y
        self.w = 2 * delta + 1
        self.delta = delta
        self.nf = len(rs)
        p1 = pmap.prior_one()
        self.pi = np.array([c.pi for c in csis])
        self.pd = np.array([c.pd for c in csis])
        self.pt = np.array([c.pt for c in csis])
        self.e1 = np.empty((self.nf, self.y, self.w))
        self.e0 = np.empty_like(self.e1)
        for f, r in enumerate(rs):
            f1, f0 = symbol_metrics(r, kind, csis[f])
            self.e1[f] = _metric_windows(f1, self.y, delta)
            self.e0[f] = _metric_windows(f0, self.y, delta)
        self.g = p1[None, :, None] * self.e1 + (1.0 - p1)[None, :, None] * self.e0
        self.p1 = p1
        self.kern = _run_kernels(self.pi / 2.0, self.w)
        self.kern_t = np.ascontiguousarray(self.kern.transpose(0, 2, 1))
        self.r_lens = np.array([len(r) for r in rs], dtype=np.int64)
        self.failed = np.zeros(self.nf, dtype=bool)

    def _normalize(self, rows: np.ndarray, logscale: np.ndarray):
        s = rows.sum(axis=1)
        bad = ~(s > 0.0)
        if bad.any():
            self.failed |= bad
            rows[bad] = 1.0 / self.w
            s[bad] = 1.0
        logscale += np.log(s)
        rows /= s[:, None]

    def forward(self) -> np.ndarray:
        a = np.zeros((self.nf, self.y + 1, self.w))
        self.alpha_logscale = np.zeros((self.nf, self.y + 1))
        # init: certainty at drift 0, then the same insertion-run closure as
        # every other row (runs pending the first slot live in row 0)
        init = np.zeros((self.nf, self.w))
        init[:, self.delta] = 1.0
        row0 = (init[:, None, :] @ self.kern)[:, 0, :]
        self._normalize(row0, self.alpha_logscale[:, 0])
        a[:, 0] = row0
        for t in range(self.y):
            base = (self.pd[:, None] * _lshift(a[:, t])
                    + self.pt[:, None] * a[:, t] * self.g[:, t])
            closed = (base[:, None, :] @ self.kern)[:, 0, :]
            self.alpha_logscale[:, t + 1] = self.alpha_logscale[:, t]
            self._normalize(closed, self.alpha_logscale[:, t + 1])
            a[:, t + 1] = closed
        self.alpha = a
        return a

    def backward(self) -> np.ndarray:
        b = np.zeros((self.nf, self.y + 1, self.w))
        init = self.r_lens - self.y + self.delta
        self.overflow = (init < 0) | (init > self.w - 1)
        init = np.clip(init, 0, self.w - 1)
        b[np.arange(self.nf), self.y, init] = 1.0
        self.beta_logscale = np.zeros((self.nf, self.y + 1))
        for t in range(self.y - 1, -1, -1):
            base = (self.pd[:, None] * _rshift(b[:, t + 1])
                    + self.pt[:, None] * b[:, t + 1] * self.g[:, t])
            closed = (base[:, None, :] @ self.kern_t)[:, 0, :]
            self.beta_logscale[:, t] = self.beta_logscale[:, t + 1]
            self._normalize(closed, self.beta_logscale[:, t])
            b[:, t] = closed
        self.beta = b
        return b

    def posteriors(self):
        """Per-position P(Y=0|R), P(Y=1|R) and the evidence profile."""
        a_prev = self.alpha[:, :-1]   # rows 0..y-1
        b_cur = self.beta[:, 1:]      # rows 1..y
        del_term = (_lshift(a_prev) * b_cur).sum(axis=2)
        t1 = (a_prev * self.e1 * b_cur).sum(axis=2)
        t0 = (a_prev * self.e0 * b_cur).sum(axis=2)
        pd = self.pd[:, None]
        pt = self.pt[:, None]
        p1u = self.p1[None, :] * (pd * del_term + pt * t1)
        p0u = (1.0 - self.p1)[None, :] * (pd * del_term + pt * t0)
        z = p0u + p1u
        # scale-invariant sanity profile: constant over positions per frame
        with np.errstate(divide="ignore"):
            evidence = (np.log(pd * del_term + pt * (self.p1[None, :] * t1
                                                     + (1.0 - self.p1)[None, :] * t0))
                        + self.alpha_logscale[:, :-1] + self.beta_logscale[:, 1:])
        return p0u, p1u, z, evidence


def _llrs_from_unnormalized(p0u: np.ndarray, p1u: np.ndarray):
    both_zero = (p0u == 0.0) & (p1u == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(p0u) - np.log(p1u)
    llr = np.clip(llr, -LLR_MAX, LLR_MAX)
    llr = np.where(p0u == 0.0, -LLR_MAX, llr)
    llr = np.where(p1u == 0.0, LLR_MAX, llr)
    llr = np.where(both_zero, 0.0, llr)
    return llr, both_zero.sum(axis=-1)


def detect_batch(rs, pmap: PositionMap, csis, kind: str, delta: int):
    """Detect a batch of frames sharing one position map.

    csis: one ChannelParams per frame (receiver-assumed CSI).
    Returns (llrs (F, y), overflow flags (F,), failed flags (F,),
    neutral counts (F,)).  Failed frames carry all-zero LLRs.
    """
    lat = _BatchLattice(rs, pmap, csis, kind, delta)
    lat.forward()
    lat.backward()
    p0u, p1u, _, _ = lat.posteriors()
    llrs, neutral = _llrs_from_unnormalized(p0u, p1u)
    if lat.failed.any():
        llrs[lat.failed] = 0.0
    return llrs, lat.overflow, lat.failed, neutral


def detect(r, pmap: PositionMap, csi: ChannelParams, kind: str, delta: int) -> DetectResult:
    """Single-frame detection; raises DetectionFailure on a dead lattice."""
    lat = _BatchLattice([np.asarray(r)], pmap, [csi], kind, delta)
    lat.forward()
    if lat.failed[0]:
        raise DetectionFailure("all-zero forward row")
    lat.backward()
    if lat.failed[0]:
        raise DetectionFailure("all-zero backward row")
    p0u, p1u, _, evidence = lat.posteriors()
    llrs, neutral = _llrs_from_unnormalized(p0u, p1u)
    return DetectResult(llrs=llrs[0], drift_overflow=bool(lat.overflow[0]),
                        neutral_positions=int(neutral[0]), evidence_profile=evidence[0])


def compute_lattice(r, pmap: PositionMap, csi: ChannelParams, kind: str,
                    delta: int) -> DriftLattice:
    """Forward and backward rows for one frame (test/inspection hook)."""
    lat = _BatchLattice([np.asarray(r)], pmap, [csi], kind, delta)
    lat.forward()
    lat.backward()
    return DriftLattice(delta=delta, alpha=lat.alpha[0], beta=lat.beta[0],
                        alpha_logscale=lat.alpha_logscale[0],
                        beta_logscale=lat.beta_logscale[0])


def posterior_probs(r, pmap: PositionMap, csi: ChannelParams, kind: str, delta: int):
    """Normalized per-position (P(Y=0|R), P(Y=1|R)) for one frame."""
    lat = _BatchLattice([np.asarray(r)], pmap, [csi], kind, delta)
    lat.forward()
    lat.backward()
    if lat.failed[0]:
        raise DetectionFailure("all-zero lattice row")
    p0u, p1u, z, _ = lat.posteriors()
    zsafe = np.where(z[0] > 0.0, z[0], 1.0)
    return p0u[0] / zsafe, p1u[0] / zsafe
