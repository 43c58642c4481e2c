import numpy as np
import pytest

from syncdet import datasets, rng as rngmod
from syncdet.ber import make_burst_grid, make_random_grid
from syncdet.channels import ChannelParams
from syncdet.markers import strip_markers


def test_roundtrip_and_determinism(c1, tmp_path):
    grid = make_random_grid([0.004, 0.008], snr_db=7.0)
    p1, p2 = tmp_path / "a.ds", tmp_path / "b.ds"
    datasets.generate_dataset(c1, "idawgn", grid, 5, 7, str(p1))
    datasets.generate_dataset(c1, "idawgn", grid, 5, 7, str(p2))
    assert p1.read_bytes() == p2.read_bytes()

    headers, recs = datasets.read_dataset(str(p1))
    assert [h.count for h in headers] == [5, 5]
    assert headers[0].n == 273 and headers[0].k == 191
    assert headers[0].snr_db == pytest.approx(7.0)
    rows = list(recs)
    assert len(rows) == 10
    for _, _, y_bits, r in rows:
        assert len(y_bits) == 363
        assert np.isfinite(r).all()


def test_hard_dataset_round_trip_values(c1, tmp_path):
    grid = make_random_grid([0.01], ps=0.02)
    path = tmp_path / "h.ds"
    datasets.generate_dataset(c1, "ids", grid, 4, 3, str(path))
    headers, recs = datasets.read_dataset(str(path))
    assert not headers[0].soft
    for _, _, y_bits, r in recs:
        assert r.dtype == np.uint8
        assert np.isin(r, (0, 1)).all()


def test_clean_condition_reproduces_bpsk(c1, tmp_path):
    grid = [ChannelParams(pi=0.0, pd=0.0, ps=0.0, sigma2=1e-12)]
    path = tmp_path / "clean.ds"
    datasets.generate_dataset(c1, "idawgn", grid, 3, 9, str(path))
    _, recs = datasets.read_dataset(str(path))
    for _, _, y_bits, r in recs:
        assert (np.sign(r) == 1.0 - 2.0 * y_bits).all()


def test_y_strips_to_valid_codeword(c1, tmp_path):
    from syncdet import ldpc
    grid = make_random_grid([0.02], snr_db=7.0)
    path = tmp_path / "cw.ds"
    datasets.generate_dataset(c1, "idawgn", grid, 3, 4, str(path))
    _, recs = datasets.read_dataset(str(path))
    for _, _, y_bits, _ in recs:
        x = strip_markers(y_bits, c1.pmap)
        assert ldpc.syndrome_ok(c1.h, x).all()


def test_burst_dataset(c1, tmp_path):
    grid = make_burst_grid([0.004], snr_db=7.0)
    path = tmp_path / "wb.ds"
    hds = datasets.generate_dataset(c1, "wbidawgn", grid, 3, 5, str(path))
    assert hds[0].pbi == 0.004 and hds[0].pbd == 0.004
    headers, recs = datasets.read_dataset(str(path))
    assert len(list(recs)) == 3


def test_noisy_csi_generation_differs_and_is_deterministic(c1, tmp_path):
    grid = make_random_grid([0.02], snr_db=7.0)
    pa, pb, pc = (tmp_path / n for n in ("n1.ds", "n2.ds", "p.ds"))
    datasets.generate_dataset(c1, "idawgn", grid, 4, 7, str(pa), csi_mode="noisy")
    datasets.generate_dataset(c1, "idawgn", grid, 4, 7, str(pb), csi_mode="noisy")
    datasets.generate_dataset(c1, "idawgn", grid, 4, 7, str(pc), csi_mode="perfect")
    assert pa.read_bytes() == pb.read_bytes()
    assert pa.read_bytes() != pc.read_bytes()
    headers, _ = datasets.read_dataset(str(pa))
    assert headers[0].csi == "noisy"
    with pytest.raises(ValueError):
        datasets.generate_dataset(c1, "wbidawgn", make_burst_grid([0.004], snr_db=7),
                                  2, 1, str(tmp_path / "x.ds"), csi_mode="noisy")


def test_read_errors(tmp_path):
    bad_magic = tmp_path / "m.ds"
    bad_magic.write_text("NOPE v1\n")
    with pytest.raises(datasets.DatasetError, match="magic"):
        datasets.read_dataset(str(bad_magic))

    bad_bits = tmp_path / "bits.ds"
    bad_bits.write_text(
        "SYNCDET-DATASET v1\n"
        "BLOCK code=c1 n=2 k=1 marker=001 interval=9 channel=ids pi=0.1 pd=0.1 "
        "ps=0 delta=4 seed=0 count=1\n"
        "Y 0Z\nR 0 1\n")
    headers, recs = datasets.read_dataset(str(bad_bits))
    with pytest.raises(datasets.DatasetError, match="record 0"):
        list(recs)

    bad_tok = tmp_path / "tok.ds"
    bad_tok.write_text(
        "SYNCDET-DATASET v1\n"
        "BLOCK code=c1 n=2 k=1 marker=001 interval=9 channel=ids pi=0.1 pd=0.1 "
        "ps=0 delta=4 seed=0 count=1\n"
        "Y 01\nR 0 2\n")
    headers, recs = datasets.read_dataset(str(bad_tok))
    with pytest.raises(datasets.DatasetError, match="malformed R token"):
        list(recs)

    truncated = tmp_path / "t.ds"
    truncated.write_text(
        "SYNCDET-DATASET v1\n"
        "BLOCK code=c1 n=2 k=1 marker=001 interval=9 channel=ids pi=0.1 pd=0.1 "
        "ps=0 delta=4 seed=0 count=3\n"
        "Y 01\nR 0 1\n")
    with pytest.raises(datasets.DatasetError, match="truncated"):
        datasets.read_dataset(str(truncated))
