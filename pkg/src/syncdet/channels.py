"""Insertion/deletion channel simulators and the receiver CSI-noise model.

Four models: hard random (ids), soft random (idawgn), and their weakly-burst
variants (wbids, wbidawgn).  Every transmit call consumes one dedicated
random stream and returns the received symbols together with an event log
that reproduces them exactly.
"""

from dataclasses import dataclass, replace

import numpy as np

# receiver-side CSI estimates never leave this range
CSI_CLIP_LO = 1e-6
CSI_CLIP_HI = 0.3

HARD_KINDS = ("ids", "wbids")
SOFT_KINDS = ("idawgn", "wbidawgn")
RANDOM_KINDS = ("ids", "idawgn")
BURST_KINDS = ("wbids", "wbidawgn")


def snr_to_sigma2(snr_db: float) -> float:
    """Noise variance for unit-energy BPSK at the given symbol SNR."""
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Random-ins/del channel truth: P_i, P_d, P_s and (soft) noise variance."""

    pi: float
    pd: float
    ps: float = 0.0
    sigma2: float = None

    def __post_init__(self):
        for name in ("pi", "pd", "ps"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name}={v} outside [0, 1)")
        if self.pi + self.pd >= 1.0:
            raise ValueError("need pi + pd < 1")
        if self.sigma2 is not None and not self.sigma2 > 0.0:
            raise ValueError("sigma2 must be positive when present")

    @property
    def pt(self) -> float:
        return 1.0 - self.pi - self.pd


@dataclass(frozen=True)
class BurstChannelParams:
    """Weakly-burst channel truth: event probabilities and burst length 2..4."""

    pbi: float
    pbd: float
    ps: float = 0.0
    sigma2: float = None
    kappa_values = (2, 3, 4)  # uniform

    def __post_init__(self):
        for name in ("pbi", "pbd", "ps"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name}={v} outside [0, 1)")
        if self.pbi + self.pbd >= 1.0:
            raise ValueError("need pbi + pbd < 1")
        if self.sigma2 is not None and not self.sigma2 > 0.0:
            raise ValueError("sigma2 must be positive when present")

    def fb_equivalent(self) -> ChannelParams:
        """Random-channel CSI a burst-unaware receiver assumes (mean kappa = 3)."""
        return ChannelParams(pi=3.0 * self.pbi, pd=3.0 * self.pbd, ps=self.ps,
                             sigma2=self.sigma2)


@dataclass
class EventLog:
    """Per-sent-symbol channel events; replay() rebuilds the clean output."""

    n_ins: np.ndarray       # insertions emitted while the symbol was pending
    deleted: np.ndarray     # bool
    substituted: np.ndarray  # bool, hard channels only
    ins_values: np.ndarray  # inserted symbols, flattened in emission order
    noise: np.ndarray = None  # per emitted symbol, soft channels only
    ins_bursts: list = None  # per insertion event: burst length (burst kinds)
    del_bursts: list = None

    def insertions(self) -> int:
        return int(self.n_ins.sum())

    def deletions(self) -> int:
        return int(self.deleted.sum())

    def replay(self, y_bits: np.ndarray, soft: bool) -> np.ndarray:
        """Reference reconstruction of the clean emitted stream."""
        y_bits = np.asarray(y_bits)
        out = []
        k = 0
        for i in range(len(y_bits)):
            for _ in range(int(self.n_ins[i])):
                out.append(self.ins_values[k])
                k += 1
            if not self.deleted[i]:
                if soft:
                    out.append(1.0 - 2.0 * float(y_bits[i]))
                else:
                    out.append(int(y_bits[i]) ^ int(self.substituted[i]))
        dtype = np.float64 if soft else np.uint8
        return np.array(out, dtype=dtype)


@dataclass
class Frame:
    """One end-to-end transmission record."""

    u: np.ndarray       # message bits
    x: np.ndarray       # codeword bits
    y_bits: np.ndarray  # sent bits (markers inserted)
    r: np.ndarray       # received symbols (bits or reals)
    log: EventLog


def _assemble(trans_values: np.ndarray, n_ins: np.ndarray, ins_values: np.ndarray,
              deleted: np.ndarray) -> np.ndarray:
    """Interleave per-position insertion runs with surviving symbols."""
    counts = n_ins + (~deleted).astype(np.int64)
    total = int(counts.sum())
    out = np.empty(total, dtype=trans_values.dtype)
    if total == 0:
        return out
    ends = np.cumsum(counts)
    is_trans = np.zeros(total, dtype=bool)
    is_trans[ends[~deleted] - 1] = True
    out[is_trans] = trans_values[~deleted]
    out[~is_trans] = ins_values
    return out


def _draw_random_events(y: int, params: ChannelParams, rng: np.random.Generator):
    pi, pd = params.pi, params.pd
    n_ins = rng.geometric(1.0 - pi, size=y).astype(np.int64) - 1
    # conditioned on the pending run ending, the symbol dies with pd / (1 - pi)
    deleted = rng.random(y) < (pd / (1.0 - pi) if pd > 0 else 0.0)
    return n_ins, deleted


def ids_transmit(y_bits: np.ndarray, params: ChannelParams, rng: np.random.Generator):
    """Hard channel: delete / insert a uniform bit (symbol stays pending) /
    transmit with substitution probability ps."""
    y_bits = np.asarray(y_bits, dtype=np.uint8)
    y = len(y_bits)
    n_ins, deleted = _draw_random_events(y, params, rng)
    substituted = (rng.random(y) < params.ps) & ~deleted
    ins_values = rng.integers(0, 2, size=int(n_ins.sum()), dtype=np.uint8)
    r = _assemble(y_bits ^ substituted.astype(np.uint8), n_ins, ins_values, deleted)
    return r, EventLog(n_ins=n_ins, deleted=deleted, substituted=substituted,
                       ins_values=ins_values)


def id_awgn_transmit(y_bits: np.ndarray, params: ChannelParams, rng: np.random.Generator):
    """Soft channel: BPSK-map, apply the ins/del structure to the +/-1 stream
    (inserted symbols uniform over +/-1), then add N(0, sigma2) per symbol."""
    if params.ps != 0.0:
        raise ValueError("the soft channel model has no substitutions (ps must be 0)")
    if params.sigma2 is None:
        raise ValueError("sigma2 required for the soft channel")
    y_bits = np.asarray(y_bits, dtype=np.uint8)
    y = len(y_bits)
    z = 1.0 - 2.0 * y_bits.astype(np.float64)
    n_ins, deleted = _draw_random_events(y, params, rng)
    substituted = np.zeros(y, dtype=bool)
    ins_values = 1.0 - 2.0 * rng.integers(0, 2, size=int(n_ins.sum())).astype(np.float64)
    clean = _assemble(z, n_ins, ins_values, deleted)
    noise = rng.normal(0.0, np.sqrt(params.sigma2), size=len(clean))
    return clean + noise, EventLog(n_ins=n_ins, deleted=deleted, substituted=substituted,
                                   ins_values=ins_values, noise=noise)


def wb_transmit(y_bits: np.ndarray, params: BurstChannelParams, rng: np.random.Generator,
                soft: bool):
    """Weakly-burst channel: events insert or delete kappa ~ U{2,3,4}
    consecutive symbols; tail deletions truncate."""
    if soft:
        if params.ps != 0.0:
            raise ValueError("the soft channel model has no substitutions (ps must be 0)")
        if params.sigma2 is None:
            raise ValueError("sigma2 required for the soft channel")
    y_bits = np.asarray(y_bits, dtype=np.uint8)
    y = len(y_bits)
    n_ins = np.zeros(y, dtype=np.int64)
    deleted = np.zeros(y, dtype=bool)
    substituted = np.zeros(y, dtype=bool)
    ins_chunks = []
    ins_bursts = []
    del_bursts = []
    i = 0
    while i < y:
        u = rng.random()
        if u < params.pbi:
            kappa = int(rng.integers(2, 5))
            if soft:
                vals = 1.0 - 2.0 * rng.integers(0, 2, size=kappa).astype(np.float64)
            else:
                vals = rng.integers(0, 2, size=kappa, dtype=np.uint8)
            ins_chunks.append(vals)
            ins_bursts.append(kappa)
            n_ins[i] += kappa
            continue  # symbol i still pending
        if u < params.pbi + params.pbd:
            kappa = int(rng.integers(2, 5))
            del_bursts.append(kappa)
            stop = min(i + kappa, y)
            deleted[i:stop] = True
            i = stop
            continue
        if not soft and params.ps > 0.0 and rng.random() < params.ps:
            substituted[i] = True
        i += 1
    if ins_chunks:
        ins_values = np.concatenate(ins_chunks)
    else:
        ins_values = np.empty(0, dtype=np.float64 if soft else np.uint8)
    if soft:
        z = 1.0 - 2.0 * y_bits.astype(np.float64)
        clean = _assemble(z, n_ins, ins_values, deleted)
        noise = rng.normal(0.0, np.sqrt(params.sigma2), size=len(clean))
        log = EventLog(n_ins=n_ins, deleted=deleted, substituted=substituted,
                       ins_values=ins_values, noise=noise,
                       ins_bursts=ins_bursts, del_bursts=del_bursts)
        return clean + noise, log
    r = _assemble(y_bits ^ substituted.astype(np.uint8), n_ins, ins_values, deleted)
    return r, EventLog(n_ins=n_ins, deleted=deleted, substituted=substituted,
                       ins_values=ins_values,
                       ins_bursts=ins_bursts, del_bursts=del_bursts)


def transmit(y_bits, params, rng, kind: str):
    """Dispatch on the channel kind string."""
    if kind == "ids":
        return ids_transmit(y_bits, params, rng)
    if kind == "idawgn":
        return id_awgn_transmit(y_bits, params, rng)
    if kind == "wbids":
        return wb_transmit(y_bits, params, rng, soft=False)
    if kind == "wbidawgn":
        return wb_transmit(y_bits, params, rng, soft=True)
    raise ValueError(f"unknown channel kind {kind!r}")


def perturb_csi(params: ChannelParams, rng: np.random.Generator,
                delta_e: float = None) -> ChannelParams:
    """Receiver-side noisy CSI: jitter P_i and P_d independently by
    N(0, delta_e^2), default delta_e = 0.4 P_d, then clamp."""
    if delta_e is None:
        delta_e = 0.4 * params.pd
    if delta_e == 0.0:
        return params
    pi = float(np.clip(params.pi + rng.normal(0.0, delta_e), CSI_CLIP_LO, CSI_CLIP_HI))
    pd = float(np.clip(params.pd + rng.normal(0.0, delta_e), CSI_CLIP_LO, CSI_CLIP_HI))
    return replace(params, pi=pi, pd=pd)
