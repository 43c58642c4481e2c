"""CLI: train / eval / the weakly-burst comparison experiment."""

import argparse
import os
import subprocess
import sys

from .evaluate import evaluate
from .model import Fbgru, FbgruConfig, load_checkpoint
from .train import train


def cmd_train(args):
    config = FbgruConfig(epochs=args.epochs, batch_size=args.batch, lr=args.lr,
                         hidden_size=args.hidden)
    model, trace = train(args.data, config, seed=args.seed,
                         checkpoint_path=args.out, loss_csv=args.loss_csv,
                         limit=args.limit, verbose=not args.quiet)
    print(f"final loss {trace[-1]:.6f}; checkpoint -> {args.out}")


def cmd_eval(args):
    model = load_checkpoint(args.model)
    bridge = args.llr_out or (args.out + ".llr.csv")
    evaluate(model, args.dataset, bridge, args.out, detector_id=args.detector_id)
    print(f"wrote {args.out}")


def _primary(argv):
    proc = subprocess.run([sys.executable, "-m", "syncdet.cli", *argv])
    if proc.returncode != 0:
        raise SystemExit(proc.returncode)


def cmd_experiment5(args):
    """Weakly-burst comparison (hours-scale at full size; see --help)."""
    os.makedirs(args.out, exist_ok=True)
    train_ds = os.path.join(args.out, "wb_train.ds")
    test_ds = os.path.join(args.out, "wb_test.ds")
    per_cond = max(args.train_samples // 5, 1)
    _primary(["gen-data", "--channel", "wbidawgn", "--snr-db", "7.0",
              "--grid", "0.002:0.001:0.006", "--per-condition", str(per_cond),
              "--seed", str(args.seed), "--out", train_ds])
    _primary(["gen-data", "--channel", "wbidawgn", "--snr-db", "7.0",
              "--grid", "0.004:0.001:0.004", "--per-condition",
              str(args.test_frames), "--seed", str(args.seed + 1),
              "--out", test_ds])
    config = FbgruConfig(epochs=args.epochs, batch_size=200, lr=0.005)
    ckpt = os.path.join(args.out, "fbgru_wb.pt")
    model, _ = train(train_ds, config, seed=args.seed, checkpoint_path=ckpt,
                     loss_csv=os.path.join(args.out, "loss.csv"))
    fbgru_csv = os.path.join(args.out, "fbgru.csv")
    evaluate(model, test_ds, os.path.join(args.out, "bridge.csv"), fbgru_csv)
    fb_csv = os.path.join(args.out, "fb.csv")
    _primary(["eval", "--dataset", test_ds, "--detectors", "fb-perfect",
              "--out", fb_csv])
    print("rows (burst-unaware lattice detector assumes 3x event rates):")
    for path in (fb_csv, fbgru_csv):
        with open(path, encoding="utf-8") as fh:
            print(fh.read().strip())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fbgru")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=30,
                   help="desk-scale default; full protocol uses 300")
    p.add_argument("--batch", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--hidden", type=int, default=40)
    p.add_argument("--limit", type=int, default=None,
                   help="cap the number of training records")
    p.add_argument("--loss-csv", default=None)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--detector-id", default="fbgru")
    p.add_argument("--llr-out", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment5",
                       help="weakly-burst FBGRU vs lattice detector "
                            "(hours-scale at the full 10k x 300 setting)")
    p.add_argument("--train-samples", type=int, default=10000)
    p.add_argument("--test-frames", type=int, default=2000)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment5)

    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
