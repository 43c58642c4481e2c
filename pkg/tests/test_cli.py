import os

import numpy as np
import pytest

from syncdet import cli


def run(argv):
    return cli.main(argv)


def test_gen_data_reproducible(tmp_path):
    a, b = tmp_path / "a.ds", tmp_path / "b.ds"
    args = ["gen-data", "--code", "c1", "--channel", "idawgn", "--snr-db", "7",
            "--grid", "0.004:0.004:0.008", "--per-condition", "3", "--seed", "5"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_row_count_and_plots(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = run(["sweep", "--code", "c1", "--channel", "ids",
              "--grid", "0.005:0.005:0.01", "--detectors", "fb-perfect,fb-noisy",
              "--frames", "16", "--seed", "3", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 * 2  # header + grid x detectors
    figdir = tmp_path / "figs"
    rc = run(["emit-plots", "--results", str(out), "--out", str(figdir)])
    assert rc == 0
    assert (figdir / "c1_ids.csv").exists()
    assert (figdir / "c1_ids.png").exists()
    pivot = (figdir / "c1_ids.csv").read_text().splitlines()
    assert pivot[0] == "pd,fb-noisy,fb-perfect"
    assert len(pivot) == 3


def test_oracle_check_cli(tmp_path, capsys):
    out = tmp_path / "oracle.csv"
    rc = run(["oracle-check", "--max-y", "4", "--max-delta", "2",
              "--trials", "10", "--seed", "1", "--out", str(out)])
    assert rc == 0
    assert capsys.readouterr().out.startswith("PASS")
    assert "pass,1" in out.read_text()


def test_train_and_eval_cycle(tmp_path):
    ds = tmp_path / "train.ds"
    run(["gen-data", "--code", "c1", "--channel", "ids", "--grid",
         "0.01:0.01:0.01", "--ps", "0.004", "--per-condition", "6",
         "--seed", "2", "--out", str(ds)])
    wpath = tmp_path / "w.txt"
    rc = run(["train-fbnet", "--data", str(ds), "--epochs", "2", "--quiet",
              "--seed", "1", "--out", str(wpath),
              "--loss-csv", str(tmp_path / "loss.csv")])
    assert rc == 0
    assert wpath.read_text().startswith("FBNET-WEIGHTS v1 delta=17 channel=ids")
    assert (tmp_path / "loss.csv").read_text().startswith("epoch,loss")

    out = tmp_path / "eval.csv"
    rc = run(["eval", "--dataset", str(ds), "--detectors", "fb-perfect,fbnet",
              "--weights", str(wpath), "--seed", "1", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3


def test_usage_error_exit_code(tmp_path, capsys):
    rc = run(["eval", "--dataset", str(tmp_path / "missing.ds"),
              "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_llr_in_requires_detector_id_column(tmp_path, capsys):
    ds = tmp_path / "t.ds"
    run(["gen-data", "--code", "c1", "--channel", "ids", "--grid",
         "0.01:0.01:0.01", "--per-condition", "2", "--seed", "4",
         "--out", str(ds)])
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    rc = run(["eval", "--dataset", str(ds), "--llr-in", str(bad),
              "--out", str(tmp_path / "o.csv")])
    assert rc == 2
