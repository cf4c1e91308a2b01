"""Command-line entry points: cluster, evaluate, sweep, gen-cbf, distmat, serve."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .constraints import Origin
from .data import CbfParams, Dataset, generate_cbf, load_ucr, save_ucr
from .dtw import DistanceMatrix, WarpingWindow, distance_matrix
from .engine import EngineConfig, run
from .evaluation import FoldSplit, ari, evaluate, kshape_baseline, sweep, sweep_to_csv
from .oracle import LabelOracle, ReplayOracle, replay_from_log
from . import constraints as _constraints


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--refiner", choices=["dtw-spectral", "kshape"],
                        default="dtw-spectral")
    parser.add_argument("--window", default="0.1",
                        help="warping window fraction, or 'full'")
    parser.add_argument("--gamma", type=float, default=0.5)
    parser.add_argument("--budget", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-normalize", dest="normalize", action="store_false",
                        help="feed raw series to the DTW side")


def _config_from_args(args) -> EngineConfig:
    return EngineConfig(
        refiner=args.refiner,
        window=WarpingWindow.parse(args.window),
        gamma=args.gamma,
        budget=args.budget,
        rng_seed=args.seed,
        normalize=args.normalize,
    )


def _load_dataset(args) -> Dataset:
    return load_ucr(args.data, delimiter=args.delimiter)


def _cmd_cluster(args) -> int:
    ds = _load_dataset(args)
    config = _config_from_args(args)
    if args.oracle == "labels":
        if ds.labels is None:
            print("error: dataset has no labels for the label oracle", file=sys.stderr)
            return 1
        oracle = LabelOracle(ds.labels)
    else:
        if not args.log:
            print("error: --oracle replay needs --log", file=sys.stderr)
            return 1
        oracle = replay_from_log(_constraints.read_constraint_csv(args.log))

    distances = DistanceMatrix.load(args.distmat) if args.distmat else None
    result = run(ds, config, oracle, distances=distances)

    payload = {
        "dataset": ds.name,
        "n": ds.n,
        "config": config.to_dict(),
        "queries_used": result.queries_used,
        "n_clusters": result.clustering.n_clusters,
        "clusters": [list(c) for c in result.clustering.clusters],
        "aborted": result.aborted,
        "converged": result.converged,
    }
    if ds.labels is not None:
        payload["final_ari"] = ari(result.clustering.assignment, np.asarray(ds.labels))
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.log_out:
        store_like = result.constraint_log
        _write_log_csv(store_like, args.log_out)
    return 0


def _write_log_csv(log, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "kind", "origin", "sequence_number"])
        for c in log:
            writer.writerow([c.i, c.j, c.kind.value, c.origin.value, c.sequence_number])


def _cmd_evaluate(args) -> int:
    ds = _load_dataset(args)
    if ds.labels is None:
        print("error: evaluation requires labels", file=sys.stderr)
        return 1
    config = _config_from_args(args)
    folds = FoldSplit.stratified_folds(ds.labels, n_folds=args.folds, rng_seed=args.seed)
    result = evaluate(ds, config, folds)
    result.to_csv(args.out_csv)
    if args.out_json:
        result.save_summary(args.out_json)
    if args.kshape_baseline_k:
        baseline = kshape_baseline(ds, args.kshape_baseline_k, rng_seed=args.seed)
        print(f"kshape baseline (k={args.kshape_baseline_k}): ARI {baseline:.4f}")
    print(f"final mean ARI over {args.folds} folds: {result.final_mean_ari:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    ds = _load_dataset(args)
    if ds.labels is None:
        print("error: sweep requires labels", file=sys.stderr)
        return 1
    config = _config_from_args(args)
    gammas = [float(g) for g in args.gammas.split(",")]
    windows = [w.strip() for w in args.windows.split(",")]
    folds = FoldSplit.stratified_folds(ds.labels, n_folds=args.folds, rng_seed=args.seed)
    grid, _ = sweep(ds, config, gammas, windows, folds=folds)
    sweep_to_csv(grid, gammas, windows, args.out_csv)
    print(f"wrote {len(gammas)}x{len(windows)} grid to {args.out_csv}")
    return 0


def _cmd_gen_cbf(args) -> int:
    ds = generate_cbf(CbfParams(
        per_class_count=args.per_class,
        length=args.length,
        noise_std=args.noise,
        rng_seed=args.seed,
    ))
    save_ucr(ds, args.out, delimiter=args.delimiter or ",")
    print(f"wrote {ds.n} series of length {ds.m} to {args.out}")
    return 0


def _cmd_distmat(args) -> int:
    ds = _load_dataset(args)
    window = WarpingWindow.parse(args.window)
    basis = ds.z_normalized() if args.normalize else ds
    dm = distance_matrix(basis, window, workers=args.workers)
    dm.save(args.out)
    if args.out_csv:
        dm.save_csv(args.out_csv)
    print(f"wrote {dm.n}x{dm.n} distance matrix to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, session_dir=args.session_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsactive",
        description="Active semi-supervised clustering of time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="one engine run with an automated or replay oracle")
    p.add_argument("--data", required=True)
    p.add_argument("--delimiter", default="auto")
    p.add_argument("--oracle", choices=["labels", "replay"], default="labels")
    p.add_argument("--log", help="constraint CSV for the replay oracle")
    p.add_argument("--distmat", help="precomputed distance matrix file")
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--log-out", help="write the constraint log CSV here")
    _add_engine_flags(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("evaluate", help="cross-validated ARI-vs-query curves")
    p.add_argument("--data", required=True)
    p.add_argument("--delimiter", default="auto")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out-csv", default="evaluation.csv")
    p.add_argument("--out-json")
    p.add_argument("--kshape-baseline-k", type=int)
    _add_engine_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="grid of final ARIs over gamma and window")
    p.add_argument("--data", required=True)
    p.add_argument("--delimiter", default="auto")
    p.add_argument("--gammas", default="0.1,0.5,1.0")
    p.add_argument("--windows", default="0.05,0.1,full")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out-csv", default="sweep.csv")
    _add_engine_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gen-cbf", help="write a synthetic cylinder/bell/funnel dataset")
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--length", type=int, default=128)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_cbf)

    p = sub.add_parser("distmat", help="precompute and store a DTW distance matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--delimiter", default="auto")
    p.add_argument("--window", default="0.1")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--out", required=True)
    p.add_argument("--out-csv")
    p.set_defaults(func=_cmd_distmat)

    p = sub.add_parser("serve", help="start the HTTP query-session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=".")
    p.add_argument("--session-dir", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and args.port is None:
        import os

        args.port = int(os.environ.get("TSACTIVE_PORT", "8787"))
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
