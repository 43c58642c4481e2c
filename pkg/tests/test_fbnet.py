import numpy as np
import pytest

from syncdet import fb, fbnet, oracle, rng as rngmod
from syncdet.channels import ChannelParams, id_awgn_transmit, ids_transmit
from syncdet.markers import MarkerScheme, build_position_map


def random_instance(trial, y_lo=4, y_hi=11, delta_hi=4, batch_hi=4):
    """Random small frames packed into batch arrays (C, D, binit, labels)."""
    rng = rngmod.stream(777, trial)
    y = int(rng.integers(y_lo, y_hi))
    delta = int(rng.integers(1, delta_hi))
    kind = "ids" if rng.random() < 0.5 else "idawgn"
    pmap = oracle.sample_prior_track(y, rng)
    y_bits = pmap.marker_bits.copy()
    y_bits[~pmap.is_marker] = rng.integers(0, 2, size=pmap.x).astype(np.uint8)
    csi = ChannelParams(pi=0.08, pd=0.08, ps=0.05 if kind == "ids" else 0.0,
                        sigma2=0.3 if kind == "idawgn" else None)
    nf = int(rng.integers(1, batch_hi))
    c = np.empty((nf, y, 2 * delta + 1))
    d = np.empty_like(c)
    binit = np.empty(nf, dtype=np.int64)
    labels = np.empty((nf, y))
    for f in range(nf):
        tx = ids_transmit if kind == "ids" else id_awgn_transmit
        r, _ = tx(y_bits, csi, rngmod.stream(777, trial, f))
        c[f], d[f] = fbnet.build_inputs(r, pmap, delta, kind)
        binit[f], _ = fbnet.clamp_binit(len(r), y, delta)
        labels[f] = y_bits
    w = fbnet.INIT_WEIGHTS + rng.normal(0, 0.05, 13)
    return c, d, binit, labels, w


def test_shift_operators():
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert (fbnet.rshift(v) == [0, 1, 2, 3]).all()
    assert (fbnet.lshift(v) == [2, 3, 4, 0]).all()
    assert (fbnet.lshift(fbnet.rshift(v)) == [1, 2, 3, 0]).all()
    assert (fbnet.rshift(fbnet.lshift(v)) == [0, 2, 3, 4]).all()


def test_build_inputs_cases():
    pmap = build_position_map(6, MarkerScheme("001", 3))
    r = np.array([0.5, -1.2, 0.8, 1.1, -0.9, 0.7, 1.3, -1.0, 0.6])
    c, d = fbnet.build_inputs(r, pmap, 2, "idawgn")
    info = ~pmap.is_marker
    assert (c[info] == 0.0).all()
    m0 = pmap.is_marker & (pmap.marker_bits == 0)
    m1 = pmap.is_marker & (pmap.marker_bits == 1)
    assert np.allclose(c[m0], -d[m0]) and np.allclose(c[m1], d[m1])
    # j=1 (t=0), delta=2: first two window entries are padding
    assert d[0, 0] == 0.0 and d[0, 1] == 0.0 and d[0, 2] == r[0]


def test_build_inputs_hard_mapping():
    pmap = build_position_map(4, MarkerScheme("1", 4))
    r = np.array([0, 1, 1, 0], dtype=np.uint8)
    _, d = fbnet.build_inputs(r, pmap, 1, "ids")
    assert (d[:, 1] == [1.0, -1.0, -1.0, 1.0]).all()


def test_info_position_gamma_is_half():
    c = np.zeros((1, 1, 3))
    gam = fbnet.sigmoid(-6.0 * c)
    assert (gam == 0.5).all()


def test_forward_cell_hand_example():
    """delta=1, A0=(0,1,0), gamma=0.5: pre (0.2,0.3,0.1) -> (1/3, 1/2, 1/6)."""
    w = fbnet.INIT_WEIGHTS.copy()  # w1=0.2 w2=0.6 w3=0.2
    c = np.zeros((1, 1, 3))        # info position: gamma = 0.5 everywhere
    d = np.zeros((1, 1, 3))
    o, tape = fbnet.forward_batch(c, d, np.array([1]), w, keep_tape=True)
    assert np.allclose(tape.a[0, 1], [1 / 3, 1 / 2, 1 / 6])


def test_backward_cell_mirror_example():
    w = fbnet.INIT_WEIGHTS.copy()
    c = np.zeros((1, 2, 3))
    d = np.zeros((1, 2, 3))
    o, tape = fbnet.forward_batch(c, d, np.array([1]), w, keep_tape=True)
    # B_2 = (0,1,0); pre B_1 = w5*lsh(B)·lsh(gam) + w6*B*gam + w7*rsh(B)
    #              = (0.2*1*0.5, 0.6*1*0.5, 0.2*1) = (0.1, 0.3, 0.2)
    assert np.allclose(tape.b[0, 1], [1 / 6, 1 / 2, 1 / 3])


def test_cell_outputs_on_simplex():
    c, d, binit, labels, w = random_instance(3)
    o, tape = fbnet.forward_batch(c, d, binit, w, keep_tape=True)
    for rows in (tape.a, tape.b[:, 1:]):
        assert (rows >= 0).all() and (rows <= 1).all()
        sums = rows.sum(axis=-1)
        assert np.allclose(sums[sums > 0], 1.0)
    assert ((o > 0) & (o < 1)).all()
    # initial forward state is certainty at the band center
    center = (c.shape[2] - 1) // 2
    assert (tape.a[:, 0, center] == 1.0).all()
    assert tape.a[:, 0].sum() == tape.a.shape[0]


def test_app_unit_direct_arithmetic():
    """O recomputed from the stored states by the written mixing equations."""
    c, d, binit, labels, w = random_instance(7)
    o, tape = fbnet.forward_batch(c, d, binit, w, keep_tape=True)
    a_prev, a_cur, b_cur = tape.a[:, :-1], tape.a[:, 1:], tape.b[:, 1:]
    eps = 1.0 / (1.0 + np.exp(-w[12] * d))
    t9 = np.einsum("fty,fty->ft", fbnet.rshift(a_cur), b_cur)
    t10 = np.einsum("fty,fty->ft", fbnet.lshift(a_prev), b_cur)
    t11 = np.einsum("fty,fty->ft", a_prev, b_cur * eps)
    t12 = np.einsum("fty,fty->ft", a_prev, b_cur * (1.0 - eps))
    p1 = np.clip(w[8] * t9 + w[9] * t10 + w[10] * t11, 1e-12, 1.0)
    p0 = np.clip(w[8] * t9 + w[9] * t10 + w[11] * t12, 1e-12, 1.0)
    expect = 1.0 / (1.0 + np.exp(-(np.log(p1) - np.log(p0))))
    assert np.allclose(o, expect, atol=1e-12)


def test_zero_weights_trigger_uniform_fallback():
    c = np.zeros((1, 2, 3))
    d = np.zeros((1, 2, 3))
    w = np.zeros(13)
    o, tape = fbnet.forward_batch(c, d, np.array([1]), w, keep_tape=True)
    assert tape.fb_a.all()
    assert np.allclose(tape.a[0, 1:], 1 / 3)
    assert np.allclose(o, 0.5)


def test_app_balanced_gives_half():
    """eps = 0.5 with w11 = w12 makes both hypotheses identical."""
    c, d = np.zeros((1, 3, 5)), np.zeros((1, 3, 5))
    w = fbnet.INIT_WEIGHTS.copy()
    o, _ = fbnet.forward_batch(c, d, np.array([2]), w)
    assert np.allclose(o, 0.5)


def test_app_clamp_extremes():
    w = np.zeros(13)
    w[10] = 1e6   # P1 huge -> clipped at 1
    w[11] = 0.0   # P0 zero -> clipped at 1e-12
    c, d = np.zeros((1, 1, 3)), np.zeros((1, 1, 3))
    o, _ = fbnet.forward_batch(c, d, np.array([1]), w)
    # fallback rows are uniform, eps=0.5 -> t11 > 0
    assert o[0, 0] == pytest.approx(1.0 / (1.0 + 1e-12))


def test_posterior_output_range_and_llr():
    c, d, binit, labels, w = random_instance(5)
    o, llrs, _ = fbnet.infer_batch(
        [np.zeros(3)], build_position_map(3, MarkerScheme("1", 5)),
        fbnet.FbnetWeights(values=w, delta=1, channel="idawgn"), "idawgn")
    lo = 1.0 / (1.0 + 1e12)
    assert ((o >= lo) & (o <= 1 - lo)).all()
    assert np.isfinite(llrs).all()


def test_bce_loss_values():
    assert fbnet.bce_loss(np.array([0, 1]), np.array([0.5, 0.5])) == \
        pytest.approx(np.log(2.0))
    y = np.array([0.0, 1.0, 1.0, 0.0])
    assert fbnet.bce_loss(y, np.abs(y - 1e-15)) < 1e-12
    rng = rngmod.stream(778, 0)
    o = rng.uniform(0.05, 0.95, size=4)
    direct = -np.mean(y * np.log(o) + (1 - y) * np.log(1 - o))
    assert fbnet.bce_loss(y, o) == pytest.approx(direct, rel=1e-12)


def test_gradients_match_finite_differences():
    """Central differences at 1e-5; <= 1e-4 relative on every live weight."""
    worst = 0.0
    for trial in range(12):
        c, d, binit, labels, w = random_instance(trial)
        loss, g, _ = fbnet.loss_and_grads(c, d, binit, labels, w)
        h = 1e-5
        for i in range(13):
            wp, wm = w.copy(), w.copy()
            wp[i] += h
            wm[i] -= h
            lp = fbnet.loss_and_grads(c, d, binit, labels, wp)[0]
            lm = fbnet.loss_and_grads(c, d, binit, labels, wm)[0]
            fd = (lp - lm) / (2 * h)
            rel = abs(g[i] - fd) / max(abs(g[i]), abs(fd), 1e-6)
            worst = max(worst, rel)
    assert worst <= 1e-4


def test_gradient_batch_linearity():
    """A batch of identical frames gives the single-frame gradient."""
    c, d, binit, labels, w = random_instance(21, batch_hi=2)
    c4 = np.repeat(c[:1], 4, axis=0)
    d4 = np.repeat(d[:1], 4, axis=0)
    b4 = np.repeat(binit[:1], 4)
    l4 = np.repeat(labels[:1], 4, axis=0)
    loss1, g1, _ = fbnet.loss_and_grads(c[:1], d[:1], binit[:1], labels[:1], w)
    loss4, g4, _ = fbnet.loss_and_grads(c4, d4, b4, l4, w)
    assert loss4 == pytest.approx(loss1, rel=1e-12)
    assert np.allclose(g4, g1, rtol=1e-10)


def test_saturated_instance_has_zero_gradients():
    w = np.zeros(13)
    w[10] = 1e6
    w[11] = 1e6
    c, d = np.zeros((2, 3, 5)), np.zeros((2, 3, 5))
    labels = np.zeros((2, 3))
    loss, g, o = fbnet.loss_and_grads(c, d, np.array([2, 2]), labels, w)
    assert np.allclose(g, 0.0)


def test_weight_serialization_roundtrip(tmp_path):
    w = fbnet.FbnetWeights(values=fbnet.INIT_WEIGHTS + 0.123456789012345,
                           delta=17, channel="idawgn")
    path = tmp_path / "w.txt"
    fbnet.save_weights(w, str(path))
    text = path.read_text()
    assert text.splitlines()[0] == "FBNET-WEIGHTS v1 delta=17 channel=idawgn"
    assert text.splitlines()[1].startswith("w1 ")
    w2 = fbnet.load_weights(str(path))
    assert (w2.values == w.values).all()
    assert w2.delta == 17 and w2.channel == "idawgn"


def test_default_init_vector():
    w = fbnet.initial_weights(17, "ids")
    vals = w.values
    assert all(vals[i] == 0.2 for i in (0, 2, 4, 6, 8, 9))
    assert all(vals[i] == 0.6 for i in (1, 5, 10, 11))
    assert all(vals[i] == -6.0 for i in (3, 7, 12))


def test_golden_vector_full_pipeline(c1):
    """Frozen outputs of one fixed-seed frame at the init weights."""
    from syncdet.frames import simulate_frame
    true = ChannelParams(pi=0.012, pd=0.012, ps=0.0, sigma2=10 ** -0.7)
    frame = simulate_frame(c1, true, "idawgn", rngmod.stream(424242, 0))
    assert len(frame.r) == 368
    w = fbnet.initial_weights(17, "idawgn")
    o, llrs, overflow = fbnet.fbnet_infer(frame.r, c1.pmap, w, "idawgn")
    assert not overflow
    golden_head = [0.29019958, 0.2914358, 0.29290128, 0.34086685, 0.47302492]
    assert np.allclose(o[:5], golden_head, atol=1e-8)
    assert np.allclose(o[180:183], [0.44836422, 0.47624514, 0.46282234], atol=1e-8)
    assert float(o.mean()) == pytest.approx(0.486131743127218, abs=1e-10)
    assert float(llrs[0]) == pytest.approx(0.8944149605030383, abs=1e-10)


def test_csi_mapped_weights_agree_with_exact_fb():
    """Weights set from true CSI: LLR signs agree with the lattice >= 95%."""
    scheme = MarkerScheme("001", 9)
    pmap = build_position_map(90, scheme)
    s2 = 0.1
    pi = pd = 0.01
    pt = 1 - pi - pd
    wm = -2.0 / s2
    vals = np.array([pi / 2 * pt, pt, pd, wm, pi / 2 * pt, pt, pd, wm,
                     pi / 2, pd, pt, pt, wm])
    weights = fbnet.FbnetWeights(values=vals, delta=6, channel="idawgn")
    csi = ChannelParams(pi=pi, pd=pd, ps=0.0, sigma2=s2)
    agree = total = 0
    for t in range(30):
        y_bits = pmap.marker_bits.copy()
        y_bits[~pmap.is_marker] = rngmod.stream(779, t, 0).integers(
            0, 2, size=pmap.x).astype(np.uint8)
        r, _ = id_awgn_transmit(y_bits, csi, rngmod.stream(779, t, 1))
        if abs(len(r) - pmap.y) > 6:
            continue
        res = fb.detect(r, pmap, csi, "idawgn", 6)
        _, llrs, _ = fbnet.fbnet_infer(r, pmap, weights, "idawgn")
        info = ~pmap.is_marker
        agree += int((np.sign(llrs[info]) == np.sign(res.llrs[info])).sum())
        total += int(info.sum())
    assert agree >= 0.95 * total
