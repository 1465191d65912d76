"""Command-line front end covering the full workflow.

Subcommands: sample-ph, gen-dataset, solve, simulate, draw-sample, train,
predict, evaluate, moment-sweep, case-study. Every subcommand is
deterministic given its flags and seed; the default seed is 42 and can be
overridden with the MG1_SEED environment variable. Failures print one
machine-parseable line ``error: <Category>: <detail>`` and exit nonzero.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import dataset, metrics, mlp, phtype, qbd, sampler, simulate
from .errors import Mg1Error, NonPositiveSample
from .qbd import QueueInstance

DEFAULT_SEED = 42

_SPLIT_KEYS = {"train": 0, "val": 1, "test": 2}


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("MG1_SEED", DEFAULT_SEED))


def _read_ph(path) -> phtype.PhaseType:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                return phtype.from_json(line)
    raise ValueError(f"{path}: no PH record found")


def _print_distribution(dist, out=sys.stdout) -> None:
    for p in dist.probs:
        print(repr(float(p)), file=out)
    print(f"tail_mass {dist.tail_mass!r}", file=out)


def _events(text: str) -> int:
    return int(float(text))


def cmd_sample_ph(args) -> int:
    config = sampler.SamplerConfig(
        max_ph=args.max_ph,
        rate_lo=args.rate_lo,
        rate_hi=args.rate_hi,
        seed=_seed(args),
    )
    rng = np.random.default_rng(config.seed)
    lines = [
        phtype.to_json(sampler.sample_ph(config, rng)) for _ in range(args.count)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen_dataset(args) -> int:
    config = sampler.SamplerConfig(
        max_ph=args.max_ph, rho_max=args.rho_max, seed=_seed(args)
    )
    ds = dataset.generate(
        count=args.count,
        n_moments=args.n_moments,
        config=config,
        l=args.l,
        epsilon=args.eps,
        workers=args.workers,
        base_key=(_SPLIT_KEYS[args.split],),
    )
    dataset.save(ds, args.out)
    logging.info("wrote %d samples to %s", len(ds), args.out)
    return 0


def cmd_solve(args) -> int:
    ph = _read_ph(args.ph)
    dist = qbd.solve(QueueInstance(args.lam, ph), l=args.l, epsilon=args.eps)
    _print_distribution(dist)
    return 0


def cmd_simulate(args) -> int:
    ph = _read_ph(args.ph)
    cfg = simulate.SimConfig(
        warmup_events=args.warmup, horizon_events=args.events, seed=_seed(args)
    )
    dist = simulate.simulate_queue(QueueInstance(args.lam, ph), cfg, l=args.l)
    _print_distribution(dist)
    return 0


def cmd_draw_sample(args) -> int:
    ph = _read_ph(args.ph)
    rng = np.random.default_rng(_seed(args))
    values = simulate.draw_service_sample(ph, args.count, rng)
    text = "".join(repr(float(v)) + "\n" for v in values)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_train(args) -> int:
    train_ds = dataset.load(args.train)
    val_ds = dataset.load(args.val)
    cfg = mlp.TrainConfig(
        batch_size=args.batch,
        epochs=args.epochs,
        lr0=args.lr,
        lr_decay=args.decay,
        weight_decay=args.wd,
        seed=_seed(args),
        patience=args.patience,
        min_delta=args.min_delta,
    )
    model, log = mlp.train(train_ds, val_ds, cfg)
    mlp.save_model(model, args.out)
    best = min(rec.val_metric1 for rec in log) if log else float("nan")
    print(f"epochs_run {len(log)}")
    print(f"best_val_metric1 {best!r}")
    return 0


def cmd_predict(args) -> int:
    model = mlp.load_model(args.model)
    moments = np.array([float(v) for v in args.moments.split(",")])
    pred = mlp.predict_from_moments(model, args.lam, moments)
    for p in pred:
        print(repr(float(p)))
    return 0


def cmd_evaluate(args) -> int:
    model = mlp.load_model(args.model)
    test_ds = dataset.load(args.test)
    X = dataset.apply_standardizer(model.feature_stats, test_ds.features)
    pred = mlp.forward(model, X)
    report = metrics.evaluate(test_ds.targets, pred)
    text = metrics.format_report(report) + "\n"
    per_sample = metrics.metric1_per_sample(test_ds.targets, pred)
    csv_path = args.hist or (os.path.splitext(args.out)[0] + ".hist.csv")
    with open(args.out, "w") as fh:
        fh.write(text)
    with open(csv_path, "w") as fh:
        fh.write(metrics.histogram_csv(per_sample))
    sys.stdout.write(text)
    return 0


def cmd_moment_sweep(args) -> int:
    ns = sorted({int(v) for v in args.n.split(",")})
    config = sampler.SamplerConfig(
        max_ph=args.max_ph, rho_max=args.rho_max, seed=_seed(args)
    )
    n_max = max(ns)
    train_full = dataset.generate(
        args.train_count, n_max, config, base_key=(_SPLIT_KEYS["train"],),
        workers=args.workers,
    )
    val_full = dataset.generate(
        args.val_count, n_max, config, base_key=(_SPLIT_KEYS["val"],),
        workers=args.workers,
    )
    cfg = mlp.TrainConfig(
        batch_size=args.batch,
        epochs=args.epochs,
        lr0=args.lr,
        lr_decay=args.decay,
        weight_decay=args.wd,
        seed=_seed(args),
        patience=args.patience,
        min_delta=args.min_delta,
    )
    pairs = {
        n: (train_full.with_n_moments(n), val_full.with_n_moments(n)) for n in ns
    }
    results = mlp.moment_sweep(pairs, cfg)
    lines = ["n_moments val_metric1"]
    lines += [f"{r.n_moments} {r.val_metric1!r}" for r in results]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_case_study(args) -> int:
    with open(args.sample) as fh:
        values = [float(line) for line in fh if line.strip()]
    xs = np.array(values)
    if xs.size == 0 or np.any(xs <= 0.0) or not np.all(np.isfinite(xs)):
        raise NonPositiveSample(f"{args.sample}: service times must be positive reals")
    model = mlp.load_model(args.model)
    n = model.n_moments
    powers = np.arange(1, n + 1)
    est = np.array([float(np.mean(xs**k)) for k in powers])
    mu = est[0]
    # the model assumes unit-mean service: rescale time by the estimated mean
    lam_scaled = args.lam * mu
    norm_moments = est / mu**powers
    pred = mlp.predict_from_moments(model, lam_scaled, norm_moments[1:])

    lines = [f"estimated_moment_{k} {est[k - 1]!r}" for k in powers]
    lines.append(f"lambda_rescaled {lam_scaled!r}")
    if args.truth:
        ph = _read_ph(args.truth)
        exact = qbd.solve(QueueInstance(args.lam, ph), l=pred.shape[0], epsilon=1.0)
        m1 = metrics.metric1(exact.probs, pred)
        lines.append(f"metric1 {m1!r}")
        for p in metrics.PERCENTILES:
            m2 = metrics.metric2(
                exact.probs[None, :], pred[None, :], p
            )
            lines.append(f"metric2_{p} {m2!r}")
    lines.append("predicted_distribution")
    lines += [repr(float(v)) for v in pred]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _add_seed(p) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default MG1_SEED or 42)")


def _add_train_flags(p) -> None:
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--decay", type=float, default=0.97, help="per-epoch lr multiplier")
    p.add_argument("--wd", type=float, default=1e-5, help="weight decay")
    p.add_argument("--patience", type=int, default=None, help="early plateau stop")
    p.add_argument("--min-delta", type=float, default=0.0)
    _add_seed(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mg1learn",
        description="M/G/1 queue-length distributions: exact solvers, sampling, and a learned surrogate",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-ph", help="sample PH service distributions as JSON lines")
    p.add_argument("--max-ph", type=int, default=20)
    p.add_argument("--rate-lo", type=float, default=1.0)
    p.add_argument("--rate-hi", type=float, default=1000.0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_sample_ph)

    p = sub.add_parser("gen-dataset", help="generate a training/val/test dataset file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--n-moments", type=int, default=5)
    p.add_argument("--split", choices=sorted(_SPLIT_KEYS), default="train")
    p.add_argument("--out", required=True)
    p.add_argument("--max-ph", type=int, default=20)
    p.add_argument("--rho-max", type=float, default=0.95)
    p.add_argument("--l", type=int, default=qbd.DEFAULT_L)
    p.add_argument("--eps", type=float, default=qbd.DEFAULT_EPSILON)
    p.add_argument("--workers", type=int, default=1)
    _add_seed(p)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("solve", help="exact stationary queue-length distribution")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--ph", required=True)
    p.add_argument("--l", type=int, default=qbd.DEFAULT_L)
    p.add_argument("--eps", type=float, default=qbd.DEFAULT_EPSILON)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="empirical distribution by discrete-event simulation")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--ph", required=True)
    p.add_argument("--events", type=_events, default=1_000_000)
    p.add_argument("--warmup", type=_events, default=10_000)
    p.add_argument("--l", type=int, default=qbd.DEFAULT_L)
    _add_seed(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("draw-sample", help="write service-time draws, one per line")
    p.add_argument("--ph", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_draw_sample)

    p = sub.add_parser("train", help="train the surrogate model")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict from raw service moments m2..mn")
    p.add_argument("--model", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--moments", required=True, help="comma-separated m2,m3,...")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metric report plus error histogram CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hist", default=None, help="histogram CSV path (default <out>.hist.csv)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("moment-sweep", help="validation metric1 per moment count")
    p.add_argument("--train-count", type=int, required=True)
    p.add_argument("--val-count", type=int, required=True)
    p.add_argument("--n", default="2,5,8", help="comma-separated moment counts")
    p.add_argument("--max-ph", type=int, default=20)
    p.add_argument("--rho-max", type=float, default=0.95)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    _add_train_flags(p)
    p.set_defaults(func=cmd_moment_sweep)

    p = sub.add_parser("case-study", help="predict from raw service data and compare to truth")
    p.add_argument("--sample", required=True, help="file of service times, one per line")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--truth", default=None, help="ground-truth PH JSON file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_case_study)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Mg1Error as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
