"""Command-line harness.

Subcommands: ``train`` (one run -> summary.json/trace.csv/events.csv),
``sweep`` (parameter grid -> sweep.csv, resumable per cell), ``compare``
(method comparison table -> comparison.csv), ``trace`` (per-increment
averages across trials -> trace_summary.csv), ``cost-bound`` and
``pivotal-bound`` (analysis grids as CSV), ``datasets`` (registry listing).

Exit codes: 0 success, 1 runtime failure, 2 configuration error. All outputs
are UTF-8 with LF line endings, and every command is deterministic given its
configuration and master seed (worker count never changes results).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import analysis, data
from .baselines import train_adaboost
from .classifier import SgdHyperparams
from .data import DataError, SchemaError, load_dataset, shuffle_split
from .mechanisms import Mechanism
from .trainer import TrainConfig, _child_seq, _run_one_trial, run_trials


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# key=value config files

def parse_kv_file(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _parse_bool(value: str) -> bool:
    if value.lower() in ("1", "true", "yes"):
        return True
    if value.lower() in ("0", "false", "no"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _parse_mechanism(value: str) -> Mechanism:
    try:
        return Mechanism(value.strip().lower())
    except ValueError:
        raise ConfigError(
            f"unknown mechanism {value!r} "
            f"(choose from {', '.join(m.value for m in Mechanism)})") from None


def _parse_list(value: str, cast):
    try:
        return [cast(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad list {value!r}: {exc}") from None


def train_config_from(kv: dict[str, str], seed_override: int | None = None) -> TrainConfig:
    try:
        cfg = TrainConfig(
            n=int(kv.get("n", 350)),
            n_final=int(kv.get("n_final", 10)),
            r=float(kv.get("r", 0.8)),
            u=int(kv.get("u", 25)),
            mechanism=_parse_mechanism(kv.get("mechanism", "prop_weighted")),
            final_full_fit=_parse_bool(kv.get("final_full_fit", "true")),
            seed=seed_override if seed_override is not None else int(kv.get("seed", 0)),
            dataset=kv.get("dataset", ""),
            test_fraction=float(kv.get("test_fraction", "0.2")),
            hyper=SgdHyperparams(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not cfg.dataset:
        raise ConfigError("config must name a dataset")
    return cfg


def _seed_for(master: int, *key: int) -> int:
    seq = np.random.SeedSequence(master)
    for k in key:
        seq = _child_seq(seq, k)
    return int(seq.generate_state(1)[0])


# --------------------------------------------------------------------------
# subcommands

def cmd_train(args) -> int:
    kv = parse_kv_file(args.config)
    config = train_config_from(kv, args.seed)
    dataset = load_dataset(config.dataset, args.data_dir)
    result = _run_one_trial(dataset, config,
                            np.random.SeedSequence(config.seed),
                            with_reference=args.with_reference)
    os.makedirs(args.out_dir, exist_ok=True)
    result.report.write_summary(os.path.join(args.out_dir, "summary.json"))
    result.report.write_trace_csv(os.path.join(args.out_dir, "trace.csv"))
    result.report.write_events_csv(os.path.join(args.out_dir, "events.csv"))
    summary = result.report.summary_dict()
    print(f"{config.dataset}: accuracy={summary['final_accuracy']:.4f} "
          f"f1={summary['final_f1']:.4f} cost={summary['total_cost']}")
    return 0


SWEEP_HEADER = "u,delegation_rate,n,mechanism,trials,accuracy_mean,accuracy_std\n"


def cmd_sweep(args) -> int:
    kv = parse_kv_file(args.grid) if args.grid else {}
    us = _parse_list(kv.get("increment_sizes", "25,45,65,85"), int)
    rates = _parse_list(kv.get("delegation_rates", "0.05,0.2,0.5,0.85"), float)
    ns = _parse_list(kv.get("ensemble_sizes", "50,200,350"), int)
    mechs = [_parse_mechanism(m) for m in
             kv.get("mechanisms", "prop_weighted").split(",")]
    trials = args.trials or int(kv.get("trials", 50))
    n_final = int(kv.get("n_final", 10))
    dataset = load_dataset(args.dataset, args.data_dir)

    out_path = os.path.join(args.out_dir, "sweep.csv")
    done: set[tuple] = set()
    lines: list[str] = []
    if os.path.exists(out_path):
        with open(out_path, encoding="utf-8") as fh:
            for line in fh.readlines()[1:]:
                cells = line.strip().split(",")
                if len(cells) >= 4:
                    done.add((cells[0], cells[1], cells[2], cells[3]))
                    lines.append(line.rstrip("\n"))

    cell_index = 0
    for u in us:
        for rate in rates:
            for n in ns:
                for mech in mechs:
                    cell_index += 1
                    key = (str(u), f"{rate:g}", str(n), mech.value)
                    if key in done:
                        continue
                    config = TrainConfig(
                        n=n, n_final=min(n_final, n), r=1.0 - rate, u=u,
                        mechanism=mech, dataset=args.dataset,
                        seed=_seed_for(args.seed, cell_index),
                        test_fraction=args.test_fraction)
                    summary = run_trials(dataset, config, trials,
                                         jobs=args.jobs, with_reference=False)
                    mean, std = summary.accuracy
                    lines.append(f"{u},{rate:g},{n},{mech.value},{trials},"
                                 f"{mean:.6f},{std:.6f}")
                    _write_csv(out_path, SWEEP_HEADER, lines)
                    print(f"cell u={u} rate={rate:g} n={n} {mech.value}: "
                          f"acc={mean:.4f}±{std:.4f}")
    _write_csv(out_path, SWEEP_HEADER, lines)
    return 0


def _write_csv(path: str, header: str, lines: list[str]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header)
        for line in lines:
            fh.write(line + "\n")


def _binary_f1(pred: np.ndarray, y: np.ndarray) -> float:
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    return 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0


COMPARE_METHODS = ("direct", "prop_weighted_acc", "prop_weighted_cost",
                   "adaboost_full", "adaboost_small")
COMPARE_HEADER = ("dataset,method,trials,accuracy_mean,accuracy_std,"
                  "f1_mean,f1_std,relative_cost_mean,relative_cost_std\n")


def _compare_config(method: str, dataset: str, seed: int,
                    test_fraction: float) -> TrainConfig:
    base = TrainConfig(n=350, n_final=10, u=65, r=0.95,
                       mechanism=Mechanism.PROP_WEIGHTED, dataset=dataset,
                       seed=seed, test_fraction=test_fraction)
    if method == "direct":
        return replace(base, mechanism=Mechanism.DIRECT)
    if method == "prop_weighted_acc":
        return base  # accuracy params: u=65, delegation rate 0.05
    if method == "prop_weighted_cost":
        return replace(base, u=25, r=0.15)  # cost params: u=25, rate 0.85
    raise ConfigError(f"unknown method {method!r}")


def cmd_compare(args) -> int:
    methods = args.methods.split(",") if args.methods else list(COMPARE_METHODS)
    for m in methods:
        if m not in COMPARE_METHODS:
            raise ConfigError(f"unknown method {m!r} "
                              f"(choose from {', '.join(COMPARE_METHODS)})")
    lines = []
    for d_idx, name in enumerate(args.datasets.split(",")):
        dataset = load_dataset(name, args.data_dir)
        direct_costs: list[int] = []
        for m_idx, method in enumerate(methods):
            seed = _seed_for(args.seed, d_idx, m_idx)
            if method.startswith("adaboost"):
                M = 350 if method == "adaboost_full" else 10
                accs, f1s, rels = [], [], []
                for trial in range(args.trials):
                    train, test = shuffle_split(dataset, args.test_fraction,
                                                _seed_for(seed, trial))
                    booster = train_adaboost(train.X, train.y, M)
                    pred = booster.predict(test.X)
                    accs.append(float(np.mean(pred == test.y)))
                    f1s.append(_binary_f1(pred, test.y))
                    if direct_costs:
                        rels.append(booster.cost_examples
                                    / float(np.mean(direct_costs)))
                row = (f"{name},{method},{args.trials},"
                       f"{np.mean(accs):.6f},{np.std(accs):.6f},"
                       f"{np.mean(f1s):.6f},{np.std(f1s):.6f},")
                row += (f"{np.mean(rels):.6f},{np.std(rels):.6f}"
                        if rels else ",")
            else:
                config = _compare_config(method, name, seed, args.test_fraction)
                summary = run_trials(dataset, config, args.trials,
                                     jobs=args.jobs)
                acc_m, acc_s = summary.accuracy
                f1_m, f1_s = summary.f1
                if method == "direct":
                    direct_costs = [t.report.ledger.total_cost
                                    for t in summary.trials]
                    rel_m, rel_s = 1.0, 0.0  # reference by construction
                else:
                    rel_m, rel_s = summary.relative_cost
                row = (f"{name},{method},{args.trials},"
                       f"{acc_m:.6f},{acc_s:.6f},{f1_m:.6f},{f1_s:.6f},"
                       f"{rel_m:.6f},{rel_s:.6f}")
            lines.append(row)
            print(row)
    _write_csv(os.path.join(args.out_dir, "comparison.csv"),
               COMPARE_HEADER, lines)
    return 0


TRACE_HEADER = ("mechanism,t,trials,active_mean,test_accuracy_mean,"
                "min_majority_size_mean\n")


def cmd_trace(args) -> int:
    mechs = ([_parse_mechanism(m) for m in args.mechanisms.split(",")]
             if args.mechanisms else list(Mechanism))
    dataset = load_dataset(args.dataset, args.data_dir)
    lines = []
    for m_idx, mech in enumerate(mechs):
        config = TrainConfig(n=args.n, n_final=10, u=25, r=0.8, mechanism=mech,
                             dataset=args.dataset,
                             seed=_seed_for(args.seed, m_idx),
                             test_fraction=args.test_fraction)
        summary = run_trials(dataset, config, args.trials, jobs=args.jobs,
                             with_reference=False)
        for row in summary.mean_trace():
            lines.append(f"{mech.value},{row['t']},{row['trials']},"
                         f"{row['active_mean']:.4f},"
                         f"{row['test_accuracy_mean']:.6f},"
                         f"{row['min_majority_size_mean']:.4f}")
        print(f"{mech.value}: {summary.trials[0].report.increments_run} increments, "
              f"final acc {summary.accuracy[0]:.4f}")
    _write_csv(os.path.join(args.out_dir, "trace_summary.csv"),
               TRACE_HEADER, lines)
    return 0


def cmd_cost_bound(args) -> int:
    ns = _parse_list(args.n, int)
    n_finals = _parse_list(args.n_final, int)
    rs = _parse_list(args.r, float)
    lines = [f"{p.n},{p.n_final},{p.r:g},{p.z:.6f},{p.bound:.6f}"
             for p in analysis.cost_bound_grid(ns, n_finals, rs)]
    _write_csv(os.path.join(args.out_dir, "cost_bound.csv"),
               "n,n_final,r,z,bound\n", lines)
    print("\n".join(lines))
    return 0


def cmd_pivotal_bound(args) -> int:
    ns = _parse_list(args.n, int)
    ms = _parse_list(args.m, int)
    lines = []
    for n in ns:
        for m in ms:
            ratio, approx = analysis.pivotal_fraction(n, m)
            lines.append(f"{n},{m},{len(str(ratio.numerator))},{approx:.6e}")
    _write_csv(os.path.join(args.out_dir, "pivotal_bound.csv"),
               "n,m,numerator_digits,approx\n", lines)
    print("\n".join(lines))
    return 0


def cmd_datasets(args) -> int:
    directory = data.resolve_data_dir(args.data_dir)
    print(f"data directory: {directory} "
          f"(override with --data-dir or ${data.DATA_DIR_ENV})")
    for name, desc in data.KNOWN_DATASETS.items():
        csv_there = os.path.exists(os.path.join(directory, f"{name}.csv"))
        schema = data.find_schema(name, directory)
        status = "ready" if (csv_there and schema) else \
            ("missing schema" if csv_there else "csv not present")
        print(f"  {name:<22} {desc:<55} [{status}]")
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delens",
        description="Delegative ensemble pruning: train, sweep, compare, analyze.")
    parser.add_argument("--data-dir", default=None,
                        help=f"dataset directory (default $"
                             f"{data.DATA_DIR_ENV} or ./data)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=True):
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out-dir", default="out", help="output directory")
        if jobs:
            p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                           help="worker processes for trials")

    p = sub.add_parser("train", help="single training run from a config file")
    p.add_argument("--config", required=True, help="key=value run configuration")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--with-reference", action="store_true",
                   help="also run the Direct baseline for relative cost")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="accuracy over a parameter grid")
    p.add_argument("--dataset", required=True)
    p.add_argument("--grid", default=None, help="key=value grid file")
    p.add_argument("--trials", type=int, default=None,
                   help="trials per cell (default: grid file or 50)")
    p.add_argument("--test-fraction", type=float, default=0.2)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="method comparison table")
    p.add_argument("--datasets", required=True, help="comma-separated names")
    p.add_argument("--methods", default=None,
                   help=f"subset of {','.join(COMPARE_METHODS)}")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--test-fraction", type=float, default=0.2)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trace", help="per-increment averages during delegation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mechanisms", default=None, help="comma-separated subset")
    p.add_argument("--n", type=int, default=350)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--test-fraction", type=float, default=0.2)
    common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("cost-bound", help="analytic delegation-cost grid")
    p.add_argument("--n", default="50,100,200,350")
    p.add_argument("--n-final", default="10,25,50")
    p.add_argument("--r", default="0.5,0.6,0.7,0.8,0.9,0.95")
    common(p, jobs=False)
    p.set_defaults(func=cmd_cost_bound)

    p = sub.add_parser("pivotal-bound", help="exact pivotal-state fraction grid")
    p.add_argument("--n", default="11,21,31,41,51")
    p.add_argument("--m", default="11,21,31,41,51")
    common(p, jobs=False)
    p.set_defaults(func=cmd_pivotal_bound)

    p = sub.add_parser("datasets", help="list known datasets and local status")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_datasets)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
