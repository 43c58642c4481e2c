"""Exhaustive event-sequence enumeration: the independent reference for the
lattice detector.

For small frames (y <= 8, delta <= 4) every channel event sequence is listed
explicitly: a deletion subset of the sent slots plus a composition assigning
each slot its run of pending insertions.  Sequences whose drift leaves the
[-delta, delta] band at any instant are excluded, mirroring the banded
lattice.  Posteriors are computed from raw channel probabilities (Gaussian
densities for the soft channel), so the enumeration shares nothing with the
lattice recursion or its normalized symbol metrics.
"""

import itertools
import time
from functools import lru_cache

import numpy as np

from . import fb, rng as rngmod
from .channels import ChannelParams, ids_transmit, id_awgn_transmit
from .markers import PositionMap


@lru_cache(maxsize=256)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All ways to split `total` insertions over `parts` slots, shape (#, parts)."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(total + parts - 1), parts - 1)),
                    dtype=np.int64)
    out = np.empty((len(bars), parts), dtype=np.int64)
    out[:, 0] = bars[:, 0]
    out[:, 1:-1] = np.diff(bars, axis=1) - 1
    out[:, -1] = total + parts - 2 - bars[:, -1]
    return out


def _raw_tables(r: np.ndarray, prior_one: np.ndarray, kind: str, csi: ChannelParams):
    """Per (slot, received position) raw emission terms.

    Returns (phi, f1t, f0t, log_m, log_m_total): phi folds the slot prior over
    both bit values; f1t/f0t are the prior-weighted single-hypothesis terms;
    log_m is the inserted-symbol log density per received position.
    """
    r = np.asarray(r)
    y = len(prior_one)
    if kind == "ids":
        lik1 = np.where(r.astype(np.uint8) == 1, 1.0 - csi.ps, csi.ps).astype(np.float64)
        lik0 = 1.0 - lik1
        log_m = np.full(len(r), np.log(0.5))
    elif kind == "idawgn":
        s2 = csi.sigma2
        norm = 1.0 / np.sqrt(2.0 * np.pi * s2)
        rr = r.astype(np.float64)
        gp = norm * np.exp(-((rr - 1.0) ** 2) / (2.0 * s2))   # density given bit 0
        gm = norm * np.exp(-((rr + 1.0) ** 2) / (2.0 * s2))   # density given bit 1
        lik0, lik1 = gp, gm
        log_m = np.log(0.5 * (gp + gm)) if len(r) else np.empty(0)
    else:
        raise ValueError(f"oracle supports ids/idawgn, not {kind!r}")
    p1 = prior_one[:, None]
    f1t = p1 * lik1[None, :]
    f0t = (1.0 - p1) * lik0[None, :]
    phi = f1t + f0t
    return phi, f1t, f0t, log_m, float(log_m.sum())


def enumerate_posteriors(r, prior_one, csi: ChannelParams, kind: str, delta: int):
    """True per-slot posteriors (P(Y=0|R), P(Y=1|R)) by full enumeration."""
    r = np.asarray(r)
    y = len(prior_one)
    rl = len(r)
    if abs(rl - y) > delta:
        raise ValueError("final drift outside the band; no path survives")
    phi, f1t, f0t, log_m, log_m_total = _raw_tables(r, prior_one, kind, csi)
    num = np.zeros((y, 2))
    slots = np.arange(1, y + 1)

    for mask in range(1 << y):
        deleted = np.array([(mask >> i) & 1 for i in range(y)], dtype=bool)
        dn = int(deleted.sum())
        n_ins = rl - y + dn
        if n_ins < 0:
            continue
        comps = _compositions(n_ins, y)
        cpre = np.cumsum(comps, axis=1)
        del_upto = np.cumsum(deleted)
        del_before = del_upto - deleted
        ok = ((cpre - del_before[None, :] <= delta).all(axis=1)
              & (cpre - del_upto[None, :] >= -delta).all(axis=1))
        if not ok.any():
            continue
        cpre = cpre[ok]
        pos = cpre + (slots - del_upto)[None, :]  # 1-based, valid where transmitted
        struct = (csi.pi ** n_ins) * (csi.pd ** dn) * (csi.pt ** (y - dn))

        rows = cpre.shape[0]
        phi_rows = np.ones((rows, y))
        ins_logdens = np.full(rows, log_m_total)
        for j in range(y):
            if deleted[j]:
                continue
            p = pos[:, j] - 1
            phi_rows[:, j] = phi[j, p]
            ins_logdens -= log_m[p]
        pref = np.cumprod(phi_rows, axis=1)
        suff = np.cumprod(phi_rows[:, ::-1], axis=1)[:, ::-1]
        base = struct * np.exp(ins_logdens)
        for j in range(y):
            loo = base.copy()
            if j > 0:
                loo = loo * pref[:, j - 1]
            if j < y - 1:
                loo = loo * suff[:, j + 1]
            if deleted[j]:
                num[j, 0] += float(loo.sum()) * (1.0 - prior_one[j])
                num[j, 1] += float(loo.sum()) * prior_one[j]
            else:
                p = pos[:, j] - 1
                num[j, 0] += float((loo * f0t[j, p]).sum())
                num[j, 1] += float((loo * f1t[j, p]).sum())

    z = num.sum(axis=1)
    if not (z > 0.0).all():
        raise ValueError("no surviving event sequence for some position")
    return num[:, 0] / z, num[:, 1] / z


def enumerate_alpha_row(r, prior_one, csi: ChannelParams, kind: str, delta: int,
                        row: int) -> np.ndarray:
    """Forward row (row >= 1) by literal enumeration, normalized to sum 1.

    Uses the lattice's normalized symbol metrics (insertion weight P_i/2) so
    entries are comparable one by one; a stored row covers every way of
    consuming the first `row` slots plus the pending insertion run that
    follows, with all intermediate drifts inside the band.
    """
    r = np.asarray(r)
    f1, f0 = fb.symbol_metrics(r, kind, csi)
    acc = np.zeros(2 * delta + 1)
    qi = csi.pi / 2.0

    def gamma(slot: int, p: int) -> float:
        if p < 0 or p >= len(r):
            return 0.5  # out-of-range reads are neutral, like the lattice
        return prior_one[slot] * f1[p] + (1.0 - prior_one[slot]) * f0[p]

    def dfs(consumed: int, emitted: int, weight: float):
        if consumed == row:
            k = emitted - consumed
            w = weight
            while k <= delta:
                acc[k + delta] += w
                k += 1
                w *= qi
            return
        e, w = emitted, weight
        while e - consumed <= delta:  # insertion run before consuming the slot
            if e - consumed - 1 >= -delta:
                dfs(consumed + 1, e, w * csi.pd)
            dfs(consumed + 1, e + 1, w * csi.pt * gamma(consumed, e))
            e += 1
            w *= qi

    dfs(0, 0, 1.0)
    s = acc.sum()
    return acc / s if s > 0 else acc


def sample_prior_track(y: int, rng: np.random.Generator):
    """Random marker/info layout: is_marker mask plus fixed marker bits."""
    is_marker = rng.random(y) < 0.35
    if is_marker.all():
        is_marker[int(rng.integers(y))] = False
    marker_bits = rng.integers(0, 2, size=y).astype(np.uint8)
    marker_bits[~is_marker] = 0
    info_index = np.full(y, -1, dtype=np.int64)
    info_positions = np.nonzero(~is_marker)[0]
    info_index[info_positions] = np.arange(len(info_positions))
    return PositionMap(x=len(info_positions), y=y, is_marker=is_marker,
                       marker_bits=marker_bits, info_index=info_index,
                       info_positions=info_positions)


def oracle_check(max_y: int = 8, max_delta: int = 4, trials: int = 200,
                 seed: int = 0):
    """Compare lattice posteriors with enumeration on random small frames.

    Returns (max relative deviation, trials compared, trials skipped for
    drift overflow, elapsed seconds).
    """
    t0 = time.time()
    max_dev = 0.0
    compared = 0
    skipped = 0
    trial = 0
    while compared < trials:
        rng = rngmod.stream(seed, trial)
        trial += 1
        y = int(rng.integers(1, max_y + 1))
        delta = int(rng.integers(1, max_delta + 1))
        kind = "ids" if rng.random() < 0.5 else "idawgn"
        pi = float(rng.uniform(0.02, 0.19))
        pd = float(rng.uniform(0.02, 0.19))
        if kind == "ids":
            csi = ChannelParams(pi=pi, pd=pd, ps=float(rng.uniform(0.01, 0.15)))
        else:
            csi = ChannelParams(pi=pi, pd=pd, ps=0.0,
                                sigma2=float(rng.uniform(0.1, 1.0)))
        pmap = sample_prior_track(y, rng)
        y_bits = pmap.marker_bits.copy()
        y_bits[~pmap.is_marker] = rng.integers(0, 2, size=pmap.x).astype(np.uint8)
        if kind == "ids":
            r, _ = ids_transmit(y_bits, csi, rng)
        else:
            r, _ = id_awgn_transmit(y_bits, csi, rng)
        if abs(len(r) - y) > delta:
            skipped += 1
            continue
        prior_one = pmap.prior_one()
        p0_fb, p1_fb = fb.posterior_probs(r, pmap, csi, kind, delta)
        p0_or, p1_or = enumerate_posteriors(r, prior_one, csi, kind, delta)
        dev = max(
            float(np.max(np.abs(p0_fb - p0_or) / np.maximum(p0_or, 1e-30))),
            float(np.max(np.abs(p1_fb - p1_or) / np.maximum(p1_or, 1e-30))),
        )
        max_dev = max(max_dev, dev)
        compared += 1
    return max_dev, compared, skipped, time.time() - t0
