"""Monte-Carlo BER evaluation of the detectors through the LDPC pipeline.

Frames are simulated (or read from a dataset), detected to per-position
LLRs, the marker positions dropped, sum-product decoded, and the decoded
codeword compared with the transmitted one.  All randomness is drawn from
per-frame counter-based streams, so reports are independent of chunking and
thread count.
"""

import concurrent.futures
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import datasets, fb, fbnet, ldpc, rng as rngmod
from .channels import (BURST_KINDS, BurstChannelParams, ChannelParams, perturb_csi,
                       snr_to_sigma2)
from .frames import CodeAssets, load_code, simulate_frame
from .markers import MarkerScheme, extract_info_llrs

CSV_HEADER = ("detector,code,channel,pi,pd,ps,pbi,pbd,snr_db,csi_mode,"
              "frames,bit_errors,bits,ber,frame_errors,fer,drift_overflows")
CHUNK = 128
DETECTORS = ("fb-perfect", "fb-noisy", "fbnet")


@dataclass
class BerReport:
    detector: str
    code: str
    channel: str
    csi_mode: str
    pi: float = None
    pd: float = None
    ps: float = None
    pbi: float = None
    pbd: float = None
    snr_db: float = None
    frames: int = 0
    bit_errors: int = 0
    bits: int = 0
    frame_errors: int = 0
    drift_overflows: int = 0
    decode_failures: int = 0
    detect_failures: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    def merge(self, other: "BerReport") -> "BerReport":
        out = replace(self)
        for f in ("frames", "bit_errors", "bits", "frame_errors", "drift_overflows",
                  "decode_failures", "detect_failures"):
            setattr(out, f, getattr(self, f) + getattr(other, f))
        return out

    def csv_row(self) -> str:
        def num(v):
            return "" if v is None else repr(float(v))

        return ",".join([
            self.detector, self.code, self.channel,
            num(self.pi), num(self.pd), num(self.ps), num(self.pbi), num(self.pbd),
            num(self.snr_db), self.csi_mode,
            str(self.frames), str(self.bit_errors), str(self.bits),
            format(self.ber, ".6e"), str(self.frame_errors), format(self.fer, ".6e"),
            str(self.drift_overflows),
        ])


def write_csv(reports, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in reports:
            fh.write(r.csv_row() + "\n")


@dataclass
class ExperimentPlan:
    code: str
    channel: str
    grid: list                      # true channel params, one entry per condition
    detectors: tuple = ("fb-perfect",)
    snr_db: float = None
    csi_mode: str = "perfect"       # labels the fbnet rows; fb-noisy is always noisy
    frames: int = 2000
    seed: int = 0
    delta: int = 17
    ber_over: str = "codeword"      # or "message"
    csi_draw: str = "per-frame"     # or "per-experiment"
    marker: str = "001"
    interval: int = 9
    weights_path: str = None

    def __post_init__(self):
        if not self.grid:
            raise ValueError("empty condition grid")
        for d in self.detectors:
            if d not in DETECTORS:
                raise ValueError(f"unknown detector {d!r}")
        if self.ber_over not in ("codeword", "message"):
            raise ValueError("ber_over must be 'codeword' or 'message'")
        if self.csi_draw not in ("per-frame", "per-experiment"):
            raise ValueError("csi_draw must be 'per-frame' or 'per-experiment'")


def _report_for(plan: ExperimentPlan, detector: str, cond) -> BerReport:
    rep = BerReport(detector=detector, code=plan.code, channel=plan.channel,
                    csi_mode="noisy" if detector == "fb-noisy"
                    else (plan.csi_mode if detector == "fbnet" else "perfect"),
                    snr_db=plan.snr_db)
    if isinstance(cond, BurstChannelParams):
        rep.pbi, rep.pbd, rep.ps = cond.pbi, cond.pbd, cond.ps
    else:
        rep.pi, rep.pd, rep.ps = cond.pi, cond.pd, cond.ps
    return rep


def _detector_csis(detector: str, base: ChannelParams, plan: ExperimentPlan,
                   cond_idx: int, frame_indices) -> list:
    if detector == "fb-perfect":
        return [base] * len(frame_indices)
    if detector == "fb-noisy":
        if plan.csi_draw == "per-experiment":
            one = perturb_csi(base, rngmod.stream(plan.seed, cond_idx, 0, 2))
            return [one] * len(frame_indices)
        return [perturb_csi(base, rngmod.stream(plan.seed, cond_idx, int(fi), 1))
                for fi in frame_indices]
    raise ValueError(detector)


def _eval_frames(plan: ExperimentPlan, assets: CodeAssets, weights, cond_idx: int,
                 cond, frames_data, frame_indices):
    """Evaluate every detector on one chunk of frames.

    frames_data: list of (x codeword bits, r received, u message or None).
    Returns {detector: BerReport} partial counts.
    """
    base = cond.fb_equivalent() if isinstance(cond, BurstChannelParams) else cond
    rs = [f[1] for f in frames_data]
    xs = np.stack([f[0] for f in frames_data])
    out = {}
    for det in plan.detectors:
        rep = _report_for(plan, det, cond)
        if det == "fbnet":
            if weights is None:
                raise ValueError("fbnet detector requires a weights file")
            _, llrs, overflow = fbnet.infer_batch(rs, assets.pmap, weights, plan.channel)
            failed = np.zeros(len(rs), dtype=bool)
        else:
            csis = _detector_csis(det, base, plan, cond_idx, frame_indices)
            llrs, overflow, failed, _ = fb.detect_batch(rs, assets.pmap, csis,
                                                        plan.channel, plan.delta)
        info_llrs = extract_info_llrs(llrs, assets.pmap)
        bits_hat, _, flags = ldpc.decode_sum_product_batch(assets.h, info_llrs, 30)
        if plan.ber_over == "message":
            ref = assets.encoder.message_bits(xs)
            got = assets.encoder.message_bits(bits_hat)
        else:
            ref, got = xs, bits_hat
        errs = (ref != got).sum(axis=1)
        rep.frames = len(rs)
        rep.bits = ref.size
        rep.bit_errors = int(errs.sum())
        rep.frame_errors = int((errs > 0).sum())
        rep.drift_overflows = int(np.asarray(overflow).sum())
        rep.decode_failures = int((~flags).sum())
        rep.detect_failures = int(np.asarray(failed).sum())
        out[det] = rep
    return out


def _chunk_worker(args):
    (plan, cond_idx, start, stop) = args
    assets = _assets_cached(plan)
    weights = _weights_cached(plan)
    cond = plan.grid[cond_idx]
    frames_data = []
    idxs = range(start, stop)
    for fi in idxs:
        frame = simulate_frame(assets, cond, plan.channel,
                               rngmod.stream(plan.seed, cond_idx, fi, 0))
        frames_data.append((frame.x, frame.r, frame.u))
    return cond_idx, _eval_frames(plan, assets, weights, cond_idx, cond,
                                  frames_data, list(idxs))


_cache = {}


def _assets_cached(plan: ExperimentPlan) -> CodeAssets:
    key = (plan.code, plan.marker, plan.interval)
    if key not in _cache:
        _cache[key] = load_code(plan.code, MarkerScheme(plan.marker, plan.interval))
    return _cache[key]


def _weights_cached(plan: ExperimentPlan):
    if plan.weights_path is None:
        return None
    key = ("w", plan.weights_path, os.path.getmtime(plan.weights_path))
    if key not in _cache:
        _cache[key] = fbnet.load_weights(plan.weights_path)
    return _cache[key]


def frame_error_counts(plan: ExperimentPlan, cond_idx: int, weights=None):
    """Per-frame bit-error counts for every detector on shared frames.

    Returns {detector: int array (frames,)}; the independent unit for
    Monte-Carlo standard errors is the frame, not the bit.
    """
    assets = _assets_cached(plan)
    weights = weights if weights is not None else _weights_cached(plan)
    cond = plan.grid[cond_idx]
    out = {det: [] for det in plan.detectors}
    base = cond.fb_equivalent() if isinstance(cond, BurstChannelParams) else cond
    for start in range(0, plan.frames, CHUNK):
        idxs = list(range(start, min(start + CHUNK, plan.frames)))
        frames_data = []
        for fi in idxs:
            frame = simulate_frame(assets, cond, plan.channel,
                                   rngmod.stream(plan.seed, cond_idx, fi, 0))
            frames_data.append((frame.x, frame.r))
        rs = [f[1] for f in frames_data]
        xs = np.stack([f[0] for f in frames_data])
        for det in plan.detectors:
            if det == "fbnet":
                _, llrs, _ = fbnet.infer_batch(rs, assets.pmap, weights, plan.channel)
            else:
                csis = _detector_csis(det, base, plan, cond_idx, idxs)
                llrs, _, _, _ = fb.detect_batch(rs, assets.pmap, csis,
                                                plan.channel, plan.delta)
            info_llrs = extract_info_llrs(llrs, assets.pmap)
            bits_hat, _, _ = ldpc.decode_sum_product_batch(assets.h, info_llrs, 30)
            out[det].extend(((bits_hat != xs).sum(axis=1)).tolist())
    return {det: np.array(v, dtype=np.int64) for det, v in out.items()}


def run_ber(plan: ExperimentPlan, threads: int = 1, frame_range=None):
    """Run the plan; returns reports ordered grid-major then detector."""
    start, stop = frame_range if frame_range else (0, plan.frames)
    tasks = []
    for ci in range(len(plan.grid)):
        for cs in range(start, stop, CHUNK):
            tasks.append((plan, ci, cs, min(cs + CHUNK, stop)))
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_chunk_worker, tasks))
    else:
        results = [_chunk_worker(t) for t in tasks]
    return _merge_results(plan, results)


def _merge_results(plan, results):
    merged = {}
    for ci in range(len(plan.grid)):
        for det in plan.detectors:
            merged[(ci, det)] = _report_for(plan, det, plan.grid[ci])
    for ci, partial in results:
        for det, rep in partial.items():
            merged[(ci, det)] = merged[(ci, det)].merge(rep)
    return [merged[(ci, det)] for ci in range(len(plan.grid)) for det in plan.detectors]


def eval_dataset(plan: ExperimentPlan, dataset_path: str, threads: int = 1):
    """Evaluate detectors on a stored test set (one grid entry per block)."""
    headers, records = datasets.read_dataset(dataset_path)
    assets = _assets_cached(replace(plan, code=headers[0].code,
                                    marker=headers[0].marker,
                                    interval=headers[0].interval))
    weights = _weights_cached(plan)
    by_block = {bi: [] for bi in range(len(headers))}
    for bi, ri, y_bits, r in records:
        x = y_bits[~assets.pmap.is_marker]
        by_block[bi].append((x, r, None))
    grid = [hd.params() for hd in headers]
    plan = replace(plan, grid=grid, channel=headers[0].channel,
                   code=headers[0].code, snr_db=headers[0].snr_db)
    results = []
    for bi, frames_data in by_block.items():
        for cs in range(0, len(frames_data), CHUNK):
            chunk = frames_data[cs:cs + CHUNK]
            results.append((bi, _eval_frames(plan, assets, weights, bi, grid[bi],
                                             chunk, list(range(cs, cs + len(chunk))))))
    reports = _merge_results(plan, results)
    nd = len(plan.detectors)
    for i, rep in enumerate(reports):
        rep.snr_db = headers[i // nd].snr_db
    return reports


def eval_llr_bridge(plan: ExperimentPlan, dataset_path: str, llr_path: str,
                    detector_id: str):
    """Decode externally-supplied per-sent-position LLRs against a test set.

    Bridge CSV columns: frame_index,position,llr (frame_index counts records
    across the whole dataset file in order).
    """
    headers, records = datasets.read_dataset(dataset_path)
    assets = _assets_cached(replace(plan, code=headers[0].code,
                                    marker=headers[0].marker,
                                    interval=headers[0].interval))
    y = assets.pmap.y
    llr_by_frame = {}
    with open(llr_path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "frame_index,position,llr":
            raise ValueError(f"{llr_path}: expected header 'frame_index,position,llr'")
        for ln in fh:
            if not ln.strip():
                continue
            fi, pos, val = ln.split(",")
            arr = llr_by_frame.setdefault(int(fi), np.zeros(y))
            arr[int(pos)] = float(val)
    grid = [hd.params() for hd in headers]
    plan = replace(plan, grid=grid, channel=headers[0].channel,
                   code=headers[0].code, snr_db=headers[0].snr_db,
                   detectors=("fb-perfect",))
    reports = [_report_for(replace(plan, detectors=("fb-perfect",)), "fb-perfect", g)
               for g in grid]
    for rep, hd in zip(reports, headers):
        rep.detector = detector_id
        rep.csi_mode = plan.csi_mode
    fi = 0
    by_block = {}
    for bi, ri, y_bits, r in records:
        if fi in llr_by_frame:
            x = y_bits[~assets.pmap.is_marker]
            by_block.setdefault(bi, []).append((x, llr_by_frame[fi]))
        fi += 1
    for bi, items in by_block.items():
        xs = np.stack([it[0] for it in items])
        llrs = np.stack([it[1] for it in items])
        info_llrs = extract_info_llrs(llrs, assets.pmap)
        bits_hat, _, flags = ldpc.decode_sum_product_batch(assets.h, info_llrs, 30)
        errs = (bits_hat != xs).sum(axis=1)
        rep = reports[bi]
        rep.frames += len(items)
        rep.bits += xs.size
        rep.bit_errors += int(errs.sum())
        rep.frame_errors += int((errs > 0).sum())
        rep.decode_failures += int((~flags).sum())
    return reports


def grid_from_spec(spec: str) -> list:
    """Parse 'start:step:stop' (inclusive) into a float list."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    vals = []
    v = start
    while v <= stop + 1e-12:
        vals.append(round(v, 12))
        v += step
    return vals


def make_random_grid(pd_values, pi_offset: float = 0.0, ps: float = 0.0,
                     snr_db: float = None) -> list:
    sigma2 = snr_to_sigma2(snr_db) if snr_db is not None else None
    return [ChannelParams(pi=max(pdv + pi_offset, 0.0), pd=pdv, ps=ps, sigma2=sigma2)
            for pdv in pd_values]


def make_burst_grid(pb_values, ps: float = 0.0, snr_db: float = None) -> list:
    sigma2 = snr_to_sigma2(snr_db) if snr_db is not None else None
    return [BurstChannelParams(pbi=pb, pbd=pb, ps=ps, sigma2=sigma2)
            for pb in pb_values]


C1_GRID = [0.004, 0.008, 0.012, 0.016, 0.02]
C2_GRID = [0.002, 0.004, 0.006, 0.008, 0.01]
WB_GRID = [0.002, 0.003, 0.004, 0.005, 0.006]


def preset_plan(name: str, frames: int = 2000, seed: int = 0,
                detectors=("fb-perfect", "fb-noisy"), weights_path=None,
                csi_mode="perfect") -> ExperimentPlan:
    """Named experiment grids mirroring the evaluation campaigns."""
    presets = {
        "exp1-c1": ("c1", "idawgn", make_random_grid(C1_GRID, snr_db=7.0), 7.0),
        "exp1-c2": ("c2", "idawgn", make_random_grid(C2_GRID, snr_db=7.0), 7.0),
        "exp2-c1": ("c1", "ids", make_random_grid(C1_GRID, ps=0.004), None),
        "exp2-c2": ("c2", "ids", make_random_grid(C2_GRID, ps=0.004), None),
        "exp4-ps0": ("c1", "ids", make_random_grid(C1_GRID, ps=0.0), None),
        "exp4-ps4": ("c1", "ids", make_random_grid(C1_GRID, ps=0.004), None),
        "exp4-ps8": ("c1", "ids", make_random_grid(C1_GRID, ps=0.008), None),
        "exp4-pilo": ("c1", "ids", make_random_grid(C1_GRID, pi_offset=-0.004,
                                                    ps=0.004), None),
        "exp4-pihi": ("c1", "ids", make_random_grid(C1_GRID, pi_offset=0.008,
                                                    ps=0.004), None),
        "exp5": ("c1", "wbidawgn", make_burst_grid(WB_GRID, snr_db=7.0), 7.0),
        "exp6": ("c1", "wbids", make_burst_grid(WB_GRID, ps=0.004), None),
    }
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    code, channel, grid, snr = presets[name]
    return ExperimentPlan(code=code, channel=channel, grid=grid, snr_db=snr,
                          detectors=tuple(detectors), frames=frames, seed=seed,
                          weights_path=weights_path, csi_mode=csi_mode)
