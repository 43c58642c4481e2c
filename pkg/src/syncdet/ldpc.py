"""Binary LDPC codec: alist I/O, systematic encoding, sum-product decoding.

Conventions: GF(2) arithmetic on uint8 arrays; LLR > 0 means bit 0 is more
likely.  Messages in the decoder are clipped to +/-25 so that the tanh-domain
update never overflows or produces NaN.
"""

from dataclasses import dataclass

import numpy as np

MSG_CLIP = 25.0
_TANH_EPS = 1e-15


class AlistError(ValueError):
    """Malformed alist document (message names the offending line)."""


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Sparse parity-check matrix with both adjacency directions."""

    n: int
    m: int
    var_to_checks: tuple  # per variable: np.ndarray of check indices
    check_to_vars: tuple  # per check: np.ndarray of variable indices

    def dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for c, vs in enumerate(self.check_to_vars):
            h[c, vs] = 1
        return h

    @property
    def num_edges(self) -> int:
        return sum(len(v) for v in self.check_to_vars)


def matrix_from_dense(h: np.ndarray) -> ParityCheckMatrix:
    h = np.asarray(h, dtype=np.uint8) % 2
    m, n = h.shape
    v2c = tuple(np.nonzero(h[:, v])[0].astype(np.int64) for v in range(n))
    c2v = tuple(np.nonzero(h[c, :])[0].astype(np.int64) for c in range(m))
    return ParityCheckMatrix(n=n, m=m, var_to_checks=v2c, check_to_vars=c2v)


def parse_alist(text: str) -> ParityCheckMatrix:
    """Parse a MacKay-convention alist document.

    Layout: line 1 "n m"; line 2 max column/row degree; lines 3-4 the
    per-column and per-row degrees; then n per-column and m per-row 1-based
    adjacency lists.  Zero entries (padding) are ignored.
    """
    lines = text.splitlines()

    def ints(idx: int, what: str) -> list:
        if idx >= len(lines):
            raise AlistError(f"line {idx + 1}: unexpected end of file ({what})")
        try:
            return [int(t) for t in lines[idx].split()]
        except ValueError:
            raise AlistError(f"line {idx + 1}: non-integer token in {what}") from None

    head = ints(0, "header")
    if len(head) != 2 or head[0] < 1 or head[1] < 1:
        raise AlistError("line 1: header must be 'n m' with n, m >= 1")
    n, m = head
    if n < m:
        raise AlistError("line 1: expected n >= m")
    maxdeg = ints(1, "max degrees")
    if len(maxdeg) != 2:
        raise AlistError("line 2: expected max column and row degree")
    col_deg = ints(2, "column degrees")
    row_deg = ints(3, "row degrees")
    if len(col_deg) != n:
        raise AlistError(f"line 3: expected {n} column degrees, got {len(col_deg)}")
    if len(row_deg) != m:
        raise AlistError(f"line 4: expected {m} row degrees, got {len(row_deg)}")

    v2c = []
    for v in range(n):
        entries = [e for e in ints(4 + v, f"column {v + 1} list") if e != 0]
        if len(entries) != col_deg[v]:
            raise AlistError(f"line {5 + v}: column {v + 1} lists {len(entries)} edges, "
                             f"degree says {col_deg[v]}")
        for e in entries:
            if not 1 <= e <= m:
                raise AlistError(f"line {5 + v}: check index {e} out of range 1..{m}")
        if len(set(entries)) != len(entries):
            raise AlistError(f"line {5 + v}: duplicate edge in column {v + 1}")
        v2c.append(np.array(sorted(e - 1 for e in entries), dtype=np.int64))

    c2v = []
    for c in range(m):
        entries = [e for e in ints(4 + n + c, f"row {c + 1} list") if e != 0]
        if len(entries) != row_deg[c]:
            raise AlistError(f"line {5 + n + c}: row {c + 1} lists {len(entries)} edges, "
                             f"degree says {row_deg[c]}")
        for e in entries:
            if not 1 <= e <= n:
                raise AlistError(f"line {5 + n + c}: variable index {e} out of range 1..{n}")
        if len(set(entries)) != len(entries):
            raise AlistError(f"line {5 + n + c}: duplicate edge in row {c + 1}")
        c2v.append(np.array(sorted(e - 1 for e in entries), dtype=np.int64))

    # cross-check the two directions
    seen = set()
    for c, vs in enumerate(c2v):
        for v in vs:
            seen.add((c, int(v)))
    for v, cs in enumerate(v2c):
        for c in cs:
            if (int(c), v) not in seen:
                raise AlistError(f"edge (check {int(c) + 1}, var {v + 1}) present in column "
                                 "list but missing from row list")
            seen.discard((int(c), v))
    if seen:
        c, v = next(iter(seen))
        raise AlistError(f"edge (check {c + 1}, var {v + 1}) present in row list "
                         "but missing from column list")

    return ParityCheckMatrix(n=n, m=m, var_to_checks=tuple(v2c), check_to_vars=tuple(c2v))


def write_alist(h: ParityCheckMatrix) -> str:
    max_col = max(len(cs) for cs in h.var_to_checks)
    max_row = max(len(vs) for vs in h.check_to_vars)
    out = [f"{h.n} {h.m}", f"{max_col} {max_row}"]
    out.append(" ".join(str(len(cs)) for cs in h.var_to_checks))
    out.append(" ".join(str(len(vs)) for vs in h.check_to_vars))
    for cs in h.var_to_checks:
        pad = [0] * (max_col - len(cs))
        out.append(" ".join(str(int(c) + 1) for c in cs) + "".join(f" {p}" for p in pad))
    for vs in h.check_to_vars:
        pad = [0] * (max_row - len(vs))
        out.append(" ".join(str(int(v) + 1) for v in vs) + "".join(f" {p}" for p in pad))
    return "\n".join(out) + "\n"


def gf2_row_reduce(a: np.ndarray):
    """In-place Gauss-Jordan over GF(2); returns (pivot column list)."""
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return pivots


def gf2_rank(h: np.ndarray) -> int:
    return len(gf2_row_reduce(np.array(h, dtype=np.uint8) % 2))


@dataclass(frozen=True)
class Encoder:
    """Systematic encoder: message bits on free columns, parity on pivots."""

    n: int
    k: int
    pivot_cols: np.ndarray  # rank entries
    free_cols: np.ndarray   # k entries, strictly increasing
    parity_map: np.ndarray  # (rank, k) GF(2): x[pivot] = parity_map @ u

    def encode(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=np.uint8)
        if u.shape[-1] != self.k:
            raise ValueError(f"message length {u.shape[-1]}, expected {self.k}")
        x = np.zeros(u.shape[:-1] + (self.n,), dtype=np.uint8)
        x[..., self.free_cols] = u
        x[..., self.pivot_cols] = (u @ self.parity_map.T) % 2
        return x

    def message_bits(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[..., self.free_cols]


def derive_encoder(h: ParityCheckMatrix) -> Encoder:
    """Reduce H to systematic form once; K = n - rank(H)."""
    a = h.dense()
    pivots = gf2_row_reduce(a)
    rank = len(pivots)
    pivot_cols = np.array(pivots, dtype=np.int64)
    free_mask = np.ones(h.n, dtype=bool)
    free_mask[pivot_cols] = False
    free_cols = np.nonzero(free_mask)[0]
    # reduced row i has single 1 at pivot_cols[i] plus support on free columns;
    # H x = 0  =>  x[pivot_i] = sum_j a[i, free_j] x[free_j]
    parity_map = a[:rank][:, free_cols].astype(np.uint8)
    return Encoder(n=h.n, k=h.n - rank, pivot_cols=pivot_cols, free_cols=free_cols,
                   parity_map=parity_map)


class _DecoderArrays:
    """Edge-major scratch layout for a parity-check matrix (cached)."""

    def __init__(self, h: ParityCheckMatrix):
        evar, echk, ptr = [], [], [0]
        for c, vs in enumerate(h.check_to_vars):
            evar.extend(int(v) for v in vs)
            echk.extend([c] * len(vs))
            ptr.append(len(evar))
        self.n = h.n
        self.m = h.m
        self.edge_var = np.array(evar, dtype=np.int64)
        self.check_ptr = np.array(ptr[:-1], dtype=np.int64)
        self.check_sizes = np.diff(np.array(ptr, dtype=np.int64))
        # var-major permutation for per-variable sums
        order = np.argsort(self.edge_var, kind="stable")
        self.var_order = order
        counts = np.bincount(self.edge_var, minlength=h.n)
        self.var_ptr = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
        self.var_counts = counts


def _arrays_for(h: ParityCheckMatrix) -> _DecoderArrays:
    arr = getattr(h, "_decoder_arrays", None)
    if arr is None:
        arr = _DecoderArrays(h)
        object.__setattr__(h, "_decoder_arrays", arr)
    return arr


def syndrome_ok(h: ParityCheckMatrix, bits: np.ndarray) -> np.ndarray:
    """Per-frame flag for H x^T = 0; bits may be (n,) or (F, n)."""
    arr = _arrays_for(h)
    b = np.atleast_2d(np.asarray(bits, dtype=np.int64))
    par = np.add.reduceat(b[:, arr.edge_var], arr.check_ptr, axis=1) % 2
    return (par == 0).all(axis=1)


def decode_sum_product_batch(h: ParityCheckMatrix, llrs: np.ndarray, max_iters: int = 30):
    """Sum-product decoding of a batch of LLR vectors (F, n).

    Returns (hard bits (F, n), iterations used (F,), syndrome flag (F,)).
    Converged frames keep the decision from their first zero-syndrome
    iteration.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    arr = _arrays_for(h)
    llrs = np.asarray(llrs, dtype=np.float64)
    squeeze = llrs.ndim == 1
    if squeeze:
        llrs = llrs[None, :]
    nf = llrs.shape[0]
    if llrs.shape[1] != h.n:
        raise ValueError(f"LLR length {llrs.shape[1]}, expected {h.n}")

    v2c = np.clip(llrs[:, arr.edge_var], -MSG_CLIP, MSG_CLIP)
    out_bits = np.zeros((nf, h.n), dtype=np.uint8)
    iters_used = np.full(nf, max_iters, dtype=np.int64)
    done = np.zeros(nf, dtype=bool)

    rep = np.repeat(np.arange(arr.check_ptr.size), arr.check_sizes)
    for it in range(1, max_iters + 1):
        t = np.tanh(0.5 * v2c)
        sign = np.where(t < 0, -1.0, 1.0)
        mag = np.maximum(np.abs(t), 1e-300)
        logmag = np.log(mag)
        neg = (t < 0).astype(np.int64)
        chk_neg = np.add.reduceat(neg, arr.check_ptr, axis=1)
        chk_log = np.add.reduceat(logmag, arr.check_ptr, axis=1)
        ext_sign = np.where((chk_neg[:, rep] - neg) % 2 == 1, -1.0, 1.0)
        ext_mag = np.exp(chk_log[:, rep] - logmag)
        prod = np.clip(ext_sign * ext_mag, -1.0 + _TANH_EPS, 1.0 - _TANH_EPS)
        c2v = np.clip(2.0 * np.arctanh(prod), -MSG_CLIP, MSG_CLIP)

        vsum = np.add.reduceat(c2v[:, arr.var_order], arr.var_ptr, axis=1)
        post = llrs + vsum
        v2c = np.clip(post[:, arr.edge_var] - c2v, -MSG_CLIP, MSG_CLIP)

        hard = (post < 0).astype(np.uint8)
        ok = syndrome_ok(h, hard)
        newly = ok & ~done
        if newly.any():
            out_bits[newly] = hard[newly]
            iters_used[newly] = it
            done |= newly
        if done.all():
            break
    out_bits[~done] = hard[~done]
    flags = done.copy()
    if squeeze:
        return out_bits[0], int(iters_used[0]), bool(flags[0])
    return out_bits, iters_used, flags


def decode_sum_product(h: ParityCheckMatrix, llr: np.ndarray, max_iters: int = 30):
    """Decode one LLR vector; see decode_sum_product_batch."""
    return decode_sum_product_batch(h, np.asarray(llr, dtype=np.float64), max_iters)


def make_random_ldpc(n: int, m: int, col_weight: int, rng: np.random.Generator,
                     max_tries: int = 200) -> ParityCheckMatrix:
    """Pseudo-random regular-column-weight code with full-rank H.

    Row degrees are balanced to within one; columns never carry duplicate
    edges and a swap pass thins out 4-cycles.
    """
    total = n * col_weight
    base = total // m
    row_slots = np.full(m, base, dtype=np.int64)
    row_slots[: total - base * m] += 1
    for _ in range(max_tries):
        pool = np.repeat(np.arange(m), row_slots)
        rng.shuffle(pool)
        cols = pool.reshape(n, col_weight)
        # repair duplicate rows within a column by swapping with another column
        for _ in range(50):
            bad = [i for i in range(n) if len(set(cols[i])) < col_weight]
            if not bad:
                break
            for i in bad:
                j = int(rng.integers(n))
                a = int(rng.integers(col_weight))
                b = int(rng.integers(col_weight))
                cols[i, a], cols[j, b] = cols[j, b], cols[i, a]
        if any(len(set(c)) < col_weight for c in cols):
            continue
        # thin 4-cycles: columns sharing two checks
        for _ in range(20):
            membership = {}
            conflict = None
            for i in range(n):
                for pair in {(a, b) for a in cols[i] for b in cols[i] if a < b}:
                    if pair in membership:
                        conflict = (membership[pair], i)
                        break
                    membership[pair] = i
                if conflict:
                    break
            if conflict is None:
                break
            i = conflict[1]
            j = int(rng.integers(n))
            a = int(rng.integers(col_weight))
            b = int(rng.integers(col_weight))
            cols[i, a], cols[j, b] = cols[j, b], cols[i, a]
        if any(len(set(c)) < col_weight for c in cols):
            continue
        hdense = np.zeros((m, n), dtype=np.uint8)
        for i in range(n):
            hdense[cols[i], i] = 1
        if gf2_rank(hdense) == m:
            return matrix_from_dense(hdense)
    raise RuntimeError("failed to draw a full-rank matrix; widen max_tries")


# IEEE 802.11n rate-5/6 prototype, Z = 27 (n = 648, K = 540); -1 marks a
# zero block, other entries are cyclic-shift amounts of the ZxZ identity.
WIFI_N648_R56_Z = 27
WIFI_N648_R56_BASE = [
    [17, 13, 8, 21, 9, 3, 18, 12, 10, 0, 4, 15, 19, 2, 5, 10, 26, 19, 13, 13, 1, 0, -1, -1],
    [3, 12, 11, 14, 11, 25, 5, 18, 0, 9, 2, 26, 26, 10, 24, 7, 14, 20, 4, 2, -1, 0, 0, -1],
    [22, 16, 4, 3, 10, 21, 12, 5, 21, 14, 19, 5, -1, 8, 5, 18, 11, 5, 5, 15, 0, -1, 0, 0],
    [7, 7, 14, 14, 4, 16, 16, 24, 24, 10, 1, 7, 15, 6, 10, 26, 8, 18, 21, 14, 1, -1, -1, 0],
]


def make_qc_ldpc(base, z: int) -> ParityCheckMatrix:
    """Expand a quasi-cyclic prototype matrix of shift values."""
    base = np.asarray(base, dtype=np.int64)
    mb, nb = base.shape
    h = np.zeros((mb * z, nb * z), dtype=np.uint8)
    eye = np.eye(z, dtype=np.uint8)
    for i in range(mb):
        for j in range(nb):
            s = base[i, j]
            if s >= 0:
                h[i * z:(i + 1) * z, j * z:(j + 1) * z] = np.roll(eye, s % z, axis=1)
    return matrix_from_dense(h)
