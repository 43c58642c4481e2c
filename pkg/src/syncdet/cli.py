"""Command-line front end: data generation, training, evaluation, plots."""

import argparse
import sys

import numpy as np

from . import ber, datasets, fbnet, oracle, plots, training
from .channels import BURST_KINDS, RANDOM_KINDS, snr_to_sigma2
from .frames import load_code
from .markers import MarkerScheme


def _common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out", required=True)


def _grid_args(sub):
    sub.add_argument("--code", default="c1", help="code id or alist path")
    sub.add_argument("--channel", default="idawgn",
                     choices=RANDOM_KINDS + BURST_KINDS)
    sub.add_argument("--grid", default="0.004:0.004:0.02",
                     help="start:step:stop for pd (=pi) or pbi (=pbd)")
    sub.add_argument("--pi-offset", type=float, default=0.0,
                     help="pi = pd + offset (random kinds)")
    sub.add_argument("--ps", type=float, default=0.0)
    sub.add_argument("--snr-db", type=float, default=None,
                     help="required for soft kinds; sigma2 = 10^(-snr/10)")
    sub.add_argument("--marker", default="001")
    sub.add_argument("--interval", type=int, default=9)
    sub.add_argument("--delta", type=int, default=17)


def _build_grid(args):
    vals = ber.grid_from_spec(args.grid)
    if args.channel in ("idawgn", "wbidawgn") and args.snr_db is None:
        raise SystemExit("error: --snr-db is required for soft channel kinds")
    if args.channel in RANDOM_KINDS:
        return ber.make_random_grid(vals, pi_offset=args.pi_offset, ps=args.ps,
                                    snr_db=args.snr_db)
    return ber.make_burst_grid(vals, ps=args.ps, snr_db=args.snr_db)


def cmd_gen_data(args):
    assets = load_code(args.code, MarkerScheme(args.marker, args.interval))
    grid = _build_grid(args)
    headers = datasets.generate_dataset(assets, args.channel, grid,
                                        args.per_condition, args.seed, args.out,
                                        csi_mode=args.csi)
    print(f"wrote {args.out}: {len(headers)} blocks x {args.per_condition} records")


def cmd_train_fbnet(args):
    headers, recs = datasets.read_dataset(args.data)
    hd = headers[0]
    assets = load_code(hd.code, MarkerScheme(hd.marker, hd.interval))
    pairs = [(y, r) for _, _, y, r in recs]
    ts = training.pack_training_set(pairs, assets.pmap, hd.delta, hd.channel)
    state = training.TrainerState(lr=args.lr, batch_size=args.batch,
                                  epochs=args.epochs)
    mask = assets.pmap if args.mask_markers else None
    weights, trace = training.train_fbnet(
        ts, hd.delta, hd.channel, state=state, seed=args.seed,
        mask_markers_map=mask, verbose=not args.quiet)
    fbnet.save_weights(weights, args.out)
    if args.loss_csv:
        with open(args.loss_csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,loss\n")
            for i, v in enumerate(trace):
                fh.write(f"{i},{v:.17g}\n")
    print(f"trained on {len(pairs)} samples, final loss {trace[-1]:.6f}; "
          f"weights -> {args.out}")


def _plan_from_args(args, grid=None):
    detectors = tuple(args.detectors.split(","))
    return ber.ExperimentPlan(
        code=args.code, channel=args.channel, grid=grid or _build_grid(args),
        detectors=detectors, snr_db=args.snr_db, csi_mode=args.csi,
        frames=args.frames, seed=args.seed, delta=args.delta,
        ber_over=args.ber_over, csi_draw=args.csi_draw, marker=args.marker,
        interval=args.interval, weights_path=args.weights)


def cmd_sweep(args):
    if args.preset:
        plan = ber.preset_plan(args.preset, frames=args.frames, seed=args.seed,
                               detectors=tuple(args.detectors.split(",")),
                               weights_path=args.weights, csi_mode=args.csi)
    else:
        plan = _plan_from_args(args)
    reports = ber.run_ber(plan, threads=args.threads)
    ber.write_csv(reports, args.out)
    print(f"wrote {args.out}: {len(reports)} rows")


def cmd_eval(args):
    # code/channel/grid placeholders are replaced from the dataset headers
    plan = ber.ExperimentPlan(code="c1", channel="idawgn",
                              grid=[ber.ChannelParams(pi=0.01, pd=0.01)],
                              detectors=tuple(args.detectors.split(",")),
                              csi_mode=args.csi, seed=args.seed,
                              delta=args.delta, ber_over=args.ber_over,
                              csi_draw=args.csi_draw,
                              weights_path=args.weights)
    if args.llr_in:
        reports = ber.eval_llr_bridge(plan, args.dataset, args.llr_in,
                                      args.detector_id)
    else:
        reports = ber.eval_dataset(plan, args.dataset, threads=args.threads)
    ber.write_csv(reports, args.out)
    print(f"wrote {args.out}: {len(reports)} rows")


def cmd_oracle_check(args):
    max_dev, compared, skipped, elapsed = oracle.oracle_check(
        max_y=args.max_y, max_delta=args.max_delta, trials=args.trials,
        seed=args.seed)
    ok = max_dev <= args.tol
    print(f"{'PASS' if ok else 'FAIL'} max_dev={max_dev:.3e} trials={compared} "
          f"skipped={skipped} elapsed={elapsed:.1f}s")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(f"max_dev,{max_dev:.17g}\ntrials,{compared}\n"
                     f"elapsed_s,{elapsed:.3f}\npass,{int(ok)}\n")
    return 0 if ok else 1


def cmd_emit_plots(args):
    written = plots.emit_plots(args.results, args.out)
    for p in written:
        print(p)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="syncdet",
        description="Marker-code detection over insertion/deletion channels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a (Y, R) dataset file")
    _grid_args(p)
    p.add_argument("--per-condition", type=int, default=2000)
    p.add_argument("--csi", choices=("perfect", "noisy"), default="perfect")
    _common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-fbnet", help="train the 13-weight detector")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--mask-markers", action="store_true",
                   help="drop marker positions from the loss")
    p.add_argument("--loss-csv", default=None)
    p.add_argument("--quiet", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_train_fbnet)

    p = sub.add_parser("sweep", help="Monte-Carlo BER over a condition grid")
    _grid_args(p)
    p.add_argument("--preset", default=None,
                   help="named experiment grid (exp1-c1, exp1-c2, exp2-c1, "
                        "exp2-c2, exp4-*, exp5, exp6)")
    p.add_argument("--detectors", default="fb-perfect,fb-noisy")
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--weights", default=None, help="FBNET-WEIGHTS v1 file")
    p.add_argument("--csi", choices=("perfect", "noisy"), default="perfect")
    p.add_argument("--ber-over", choices=("codeword", "message"),
                   default="codeword")
    p.add_argument("--csi-draw", choices=("per-frame", "per-experiment"),
                   default="per-frame")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate detectors on a stored test set")
    p.add_argument("--dataset", required=True)
    p.add_argument("--detectors", default="fb-perfect")
    p.add_argument("--weights", default=None)
    p.add_argument("--csi", choices=("perfect", "noisy"), default="perfect")
    p.add_argument("--ber-over", choices=("codeword", "message"),
                   default="codeword")
    p.add_argument("--csi-draw", choices=("per-frame", "per-experiment"),
                   default="per-frame")
    p.add_argument("--delta", type=int, default=17)
    p.add_argument("--llr-in", default=None,
                   help="decode externally computed LLRs (bridge CSV)")
    p.add_argument("--detector-id", default="external",
                   help="detector column value for --llr-in rows")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle-check",
                       help="lattice posteriors vs exhaustive enumeration")
    p.add_argument("--max-y", type=int, default=8)
    p.add_argument("--max-delta", type=int, default=4)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("emit-plots",
                       help="render BER figures + pivot CSVs from results")
    p.add_argument("--results", required=True)
    _common(p)
    p.set_defaults(func=cmd_emit_plots)

    args = parser.parse_args(argv)
    try:
        rc = args.func(args)
    except (ValueError, OSError, SystemExit) as e:
        if isinstance(e, SystemExit):
            raise
        print(f"error: {e}", file=sys.stderr)
        return 2
    return int(rc) if rc else 0


if __name__ == "__main__":
    sys.exit(main())
