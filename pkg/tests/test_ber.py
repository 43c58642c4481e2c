import numpy as np
import pytest

from syncdet import ber, datasets
from syncdet.channels import ChannelParams


def clean_plan(frames=64, detectors=("fb-perfect",)):
    return ber.ExperimentPlan(
        code="c1", channel="idawgn",
        grid=[ChannelParams(pi=0.0, pd=0.0, ps=0.0, sigma2=1e-6)],
        detectors=detectors, snr_db=60.0, frames=frames, seed=5)


def test_csv_header_pinned():
    assert ber.CSV_HEADER == ("detector,code,channel,pi,pd,ps,pbi,pbd,snr_db,"
                              "csi_mode,frames,bit_errors,bits,ber,frame_errors,"
                              "fer,drift_overflows")


def test_clean_plan_zero_errors():
    reports = ber.run_ber(clean_plan())
    assert len(reports) == 1
    rep = reports[0]
    assert rep.frames == 64 and rep.bit_errors == 0 and rep.ber == 0.0
    assert rep.fer == 0.0 and rep.decode_failures == 0


def test_accumulation_linearity():
    plan = clean_plan(frames=40)
    plan = ber.ExperimentPlan(code="c1", channel="idawgn",
                              grid=[ChannelParams(pi=0.01, pd=0.01, ps=0,
                                                  sigma2=10 ** -0.7)],
                              detectors=("fb-perfect",), snr_db=7.0,
                              frames=40, seed=5)
    full = ber.run_ber(plan)[0]
    h1 = ber.run_ber(plan, frame_range=(0, 20))[0]
    h2 = ber.run_ber(plan, frame_range=(20, 40))[0]
    merged = h1.merge(h2)
    for f in ("frames", "bit_errors", "bits", "frame_errors", "drift_overflows"):
        assert getattr(merged, f) == getattr(full, f)


def test_thread_count_invariance(tmp_path):
    plan = ber.ExperimentPlan(code="c1", channel="ids",
                              grid=[ChannelParams(pi=0.01, pd=0.01, ps=0.004)],
                              detectors=("fb-perfect", "fb-noisy"),
                              frames=150, seed=9)
    r1 = ber.run_ber(plan, threads=1)
    r2 = ber.run_ber(plan, threads=2)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    ber.write_csv(r1, str(p1))
    ber.write_csv(r2, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_eval_dataset_matches_frame_count(c1, tmp_path):
    grid = ber.make_random_grid([0.01, 0.02], snr_db=7.0)
    path = tmp_path / "test.ds"
    datasets.generate_dataset(c1, "idawgn", grid, 30, 31, str(path))
    plan = ber.ExperimentPlan(code="c1", channel="idawgn", grid=grid,
                              detectors=("fb-perfect",), frames=30, seed=31)
    reports = ber.eval_dataset(plan, str(path))
    assert len(reports) == 2
    assert all(r.frames == 30 for r in reports)
    assert reports[0].pd == 0.01 and reports[1].pd == 0.02
    assert all(r.snr_db == pytest.approx(7.0) for r in reports)


def test_llr_bridge_perfect_confidence(c1, tmp_path):
    grid = ber.make_random_grid([0.01], snr_db=7.0)
    ds = tmp_path / "t.ds"
    datasets.generate_dataset(c1, "idawgn", grid, 8, 13, str(ds))
    _, recs = datasets.read_dataset(str(ds))
    bridge = tmp_path / "llr.csv"
    with open(bridge, "w") as fh:
        fh.write("frame_index,position,llr\n")
        for fi, (_, _, y_bits, _) in enumerate(recs):
            for pos, b in enumerate(y_bits):
                fh.write(f"{fi},{pos},{20.0 * (1 - 2 * int(b))}\n")
    plan = ber.ExperimentPlan(code="c1", channel="idawgn", grid=grid,
                              detectors=("fb-perfect",), frames=8, seed=13)
    reports = ber.eval_llr_bridge(plan, str(ds), str(bridge), "external")
    assert len(reports) == 1
    assert reports[0].detector == "external"
    assert reports[0].frames == 8 and reports[0].bit_errors == 0


def test_grid_from_spec():
    assert ber.grid_from_spec("0.004:0.004:0.02") == [0.004, 0.008, 0.012,
                                                      0.016, 0.02]
    with pytest.raises(ValueError):
        ber.grid_from_spec("1:2")


def test_presets():
    plan = ber.preset_plan("exp1-c1", frames=10, detectors=("fb-perfect",))
    assert plan.code == "c1" and plan.channel == "idawgn"
    assert [round(g.pd, 4) for g in plan.grid] == [0.004, 0.008, 0.012, 0.016, 0.02]
    assert plan.grid[0].sigma2 == pytest.approx(10 ** -0.7)
    plan5 = ber.preset_plan("exp5", frames=10)
    assert plan5.channel == "wbidawgn"
    assert plan5.grid[0].pbi == 0.002
    with pytest.raises(ValueError):
        ber.preset_plan("nope")


def test_wb_plan_uses_tripled_rates():
    eq = ber.make_burst_grid([0.004], snr_db=7.0)[0].fb_equivalent()
    assert eq.pi == pytest.approx(0.012) and eq.pd == pytest.approx(0.012)


def test_csv_row_formatting():
    rep = ber.BerReport(detector="fb-perfect", code="c1", channel="idawgn",
                        csi_mode="perfect", pi=0.004, pd=0.004, ps=0.0,
                        snr_db=7.0, frames=2, bit_errors=1, bits=546,
                        frame_errors=1, drift_overflows=0)
    row = rep.csv_row()
    cells = row.split(",")
    assert len(cells) == len(ber.CSV_HEADER.split(","))
    assert cells[0] == "fb-perfect" and cells[3] == "0.004"
    assert cells[6] == "" and cells[7] == ""  # pbi/pbd empty on random kinds
