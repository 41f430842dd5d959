"""Experiment runner: single runs, parameter sweeps, and particle dumps.

Every run writes a long-format CSV trace (``iteration,metric,value``) plus a
JSON sidecar holding the resolved config, derived seeds, wall-clock time, and
final parameter. Sweeps run one grid point per worker (worker count from the
``PARTICLE_EM_WORKERS`` env var) and assemble a ``<name>_sweep.csv`` summary;
a diverged grid point is recorded as ``inf`` rather than failing the sweep.

Seed derivation: from a master seed S, the dataset stream uses
SeedSequence([S, 0]) and run k uses SeedSequence([S, 1, k]), so any sweep
point can be reproduced individually via ``run --seed S --run-index k``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace

import numpy as np

from . import metrics
from .algorithms import RunConfig, Trace, run
from .config import ExperimentConfig, parse_config
from .data import generate_toy_data, load_csv, load_edgelist, train_test_split
from .exceptions import ConfigError, DivergedError, ParseError
from .models import BayesianLogisticRegression, GaussianHierarchicalModel, LatentSpaceNetworkModel

logger = logging.getLogger(__name__)

WORKERS_ENV = "PARTICLE_EM_WORKERS"

_SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, *stream: int) -> int:
    """Deterministic 64-bit seed for one stream of a master seed."""
    ss = np.random.SeedSequence([master_seed & _SEED_MASK, *stream])
    return int(ss.generate_state(1, np.uint64)[0])


def _build_model(config: ExperimentConfig, data_seed: int):
    """Instantiate the configured model; returns (model, extras)."""
    if config.model == "toy":
        x, _ = generate_toy_data(config.toy_dim, config.theta_true, data_seed)
        return GaussianHierarchicalModel(x), {}
    if config.model == "logreg":
        dataset = load_csv(config.data_path, config.label_column, config.positive_label)
        train, test = train_test_split(dataset, config.test_fraction, data_seed)
        model = BayesianLogisticRegression(train.X, train.y, prior_var=config.prior_var)
        return model, {"test": (test.X, test.y)}
    if config.model == "network":
        net = load_edgelist(config.edgelist_path, config.labels_path)
        sign = -1.0 if config.link_sign == "minus" else 1.0
        model = LatentSpaceNetworkModel(
            net.to_adjacency(),
            embed_dim=config.embed_dim,
            prior_var_z=config.prior_var_z,
            link_sign=sign,
        )
        return model, {"node_labels": net.node_labels}
    raise ConfigError([f"unknown model {config.model!r}"])


def _metric_hooks(config: ExperimentConfig, model, extras):
    hooks = {"theta": lambda th, Z: float(th[0])}
    if config.model == "toy":
        theta_star = model.theta_star()
        post_mean, _ = model.posterior_moments(theta_star)
        hooks["theta_mse"] = lambda th, Z: float((th[0] - theta_star) ** 2)
        hooks["post_mean_mse"] = lambda th, Z: metrics.mse(Z.mean(axis=0), post_mean)
        if config.particles >= 2:
            hooks["posterior_var"] = lambda th, Z: float(Z.var(axis=0, ddof=1).mean())
    elif config.model == "logreg":
        X_test, y_test = extras["test"]
        if len(y_test):
            hooks["test_error"] = lambda th, Z: metrics.test_error(model.predict(Z, X_test), y_test)
    elif config.model == "network":
        hooks["mean_log_joint"] = lambda th, Z: float(
            np.mean([model.log_joint(th, z) for z in Z])
        )
    hooks["theta_grad_norm"] = lambda th, Z: float(np.linalg.norm(model.mean_grad_theta(th, Z)))
    return hooks


def _summary_metric_name(config: ExperimentConfig, recorded: dict[str, float]) -> str:
    if config.sweep_metric is not None:
        name = config.sweep_metric
    elif config.model == "toy":
        name = "theta_mse"
    elif config.model == "logreg":
        name = "test_error" if "test_error" in recorded else "theta_grad_norm"
    else:
        name = "mean_log_joint"
    if name not in recorded:
        raise ConfigError([f"summary metric {name!r} is not recorded for model {config.model!r}"])
    return name


def _write_trace_csv(path: str, trace: Trace) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "metric", "value"])
        for rec in trace.records:
            for name, value in rec.metrics.items():
                writer.writerow([rec.iteration, name, repr(float(value))])


def _write_sidecar(path: str, config: ExperimentConfig, info: dict) -> None:
    payload = {"config": asdict(config), **info}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def execute_run(config: ExperimentConfig) -> tuple[Trace, dict]:
    """Run one experiment in memory; returns (trace, run info).

    A diverged run returns the partial trace with ``diverged`` set in the
    info dict instead of raising.
    """
    data_seed = derive_seed(config.seed, 0)
    run_seed = derive_seed(config.seed, 1, config.run_index)
    model, extras = _build_model(config, data_seed)
    hooks = _metric_hooks(config, model, extras)
    run_config = RunConfig(
        n_particles=config.particles,
        n_iters=config.iters,
        gamma=config.gamma,
        seed=run_seed,
        record_every=config.record_every,
        metric_hooks=hooks,
        bandwidth=config.bandwidth,
        freeze_bandwidth=config.freeze_bandwidth,
        adaptive_denominator=config.adaptive_denominator,
        particle_grads_use_new_theta=config.particle_grads_use_new_theta,
    )
    info = {
        "master_seed": config.seed,
        "run_seed": run_seed,
        "data_seed": data_seed,
        "diverged": False,
        "diverged_at": None,
    }
    if extras.get("node_labels"):
        info["node_labels"] = extras["node_labels"]
    started = time.perf_counter()
    try:
        trace = run(config.algorithm, model, run_config)
    except DivergedError as err:
        logger.warning("run %s diverged at iteration %s", config.resolved_name(), err.iteration)
        trace = err.trace
        info["diverged"] = True
        info["diverged_at"] = err.iteration
    info["wall_clock_s"] = time.perf_counter() - started
    info["final_theta"] = [float(v) for v in trace.records[-1].theta]
    return trace, info


def _run_single(config: ExperimentConfig) -> tuple[float, bool]:
    """Execute one run and write its trace and sidecar files.

    Returns (final value of the sweep metric, diverged flag); the metric is
    ``inf`` for diverged runs.
    """
    trace, info = execute_run(config)
    os.makedirs(config.output_dir, exist_ok=True)
    base = os.path.join(config.output_dir, config.resolved_name())
    _write_trace_csv(base + ".csv", trace)
    _write_sidecar(base + ".json", config, info)
    if info["diverged"]:
        return float("inf"), True
    final_metrics = trace.records[-1].metrics
    return final_metrics[_summary_metric_name(config, final_metrics)], False


def _sweep_point(config_dict: dict) -> tuple[int, float, float]:
    """Worker entry: run one grid point from its serialized config."""
    config = ExperimentConfig(**config_dict)
    value, _ = _run_single(config)
    return config.run_index, _grid_value(config), value


def _grid_value(config: ExperimentConfig) -> float:
    return float(config.gamma if config.sweep_param == "gamma" else config.particles)


def _point_configs(config: ExperimentConfig) -> list[ExperimentConfig]:
    points = []
    base = config.resolved_name()
    for k, value in enumerate(config.sweep_values):
        override = {"gamma": float(value)} if config.sweep_param == "gamma" else {"particles": int(value)}
        points.append(replace(config, run_index=k, name=f"{base}_{k:03d}", **override))
    return points


def run_sweep(config: ExperimentConfig) -> str:
    """Run every grid point and write the summary CSV; returns its path."""
    points = _point_configs(config)
    workers = int(os.environ.get(WORKERS_ENV, 0)) or min(os.cpu_count() or 1, len(points))
    results: dict[int, tuple[float, float]] = {}
    if workers <= 1:
        for point in points:
            k, grid_value, metric = _sweep_point(asdict(point))
            results[k] = (grid_value, metric)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for k, grid_value, metric in pool.map(_sweep_point, [asdict(p) for p in points]):
                results[k] = (grid_value, metric)

    os.makedirs(config.output_dir, exist_ok=True)
    summary_path = os.path.join(config.output_dir, config.resolved_name() + "_sweep.csv")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sweep_value", "final_metric"])
        for k in range(len(points)):
            grid_value, metric = results[k]
            writer.writerow([repr(grid_value), repr(metric)])
    return summary_path


def dump_particles(config: ExperimentConfig, at: str = "final") -> str:
    """Run the experiment and write a particle snapshot CSV; returns its path.

    ``at`` selects the snapshot: 'init' for iteration 0, 'final' for the last
    iteration reached. Network snapshots get one row per (particle, node) with
    the node label; other models one row per particle.
    """
    if at not in ("init", "final"):
        raise ConfigError([f"snapshot must be 'init' or 'final', got {at!r}"])
    trace, info = execute_run(config)
    if at == "init":
        cloud, iteration = trace.initial_particles, 0
    else:
        cloud, iteration = trace.final_particles, trace.records[-1].iteration

    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, config.resolved_name() + f"_particles_{at}.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if config.model == "network":
            labels = info.get("node_labels", [])
            dim = config.embed_dim
            writer.writerow(["iteration", "particle", "node", "label"] + [f"c{d}" for d in range(dim)])
            for i, flat in enumerate(cloud):
                positions = flat.reshape(-1, dim)
                for node, pos in enumerate(positions):
                    label = labels[node] if node < len(labels) else str(node)
                    writer.writerow([iteration, i, node, label] + [repr(float(v)) for v in pos])
        else:
            writer.writerow(["iteration", "particle"] + [f"z{d}" for d in range(cloud.shape[1])])
            for i, row in enumerate(cloud):
                writer.writerow([iteration, i] + [repr(float(v)) for v in row])
    return path


def run_experiment(config: ExperimentConfig) -> int:
    """Single run or full sweep per the config; returns a process exit code."""
    if config.sweep_param is not None:
        summary = run_sweep(config)
        logger.info("sweep summary written to %s", summary)
    else:
        metric, diverged = _run_single(config)
        status = "diverged" if diverged else f"final metric {metric!r}"
        logger.info("run %s finished: %s", config.resolved_name(), status)
    return 0


# ---------------------------------------------------------------------------
# command line


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--model", help="toy | logreg | network")
    parser.add_argument("--algorithm", help="optimizer name")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--gamma", type=float, help="learning rate (gamma algorithms only)")
    parser.add_argument("--particles", type=int, help="number of particles")
    parser.add_argument("--iters", type=int, help="number of iterations")
    parser.add_argument("--record-every", type=int, dest="record_every")
    parser.add_argument("--run-index", type=int, dest="run_index", help="seed stream index")
    parser.add_argument("--name", help="basename for output files")
    parser.add_argument("--out", dest="output_dir", help="output directory")
    parser.add_argument("--data-path", dest="data_path", help="CSV dataset path (logreg)")
    parser.add_argument("--edgelist-path", dest="edgelist_path", help="edge list path (network)")


def _overrides(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "at"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="particle-em",
        description="Run particle-based maximum-likelihood training experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single experiment run")
    _add_common_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a grid of experiments")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--sweep-param", dest="sweep_param", help="gamma | particles")
    p_sweep.add_argument("--sweep-values", dest="sweep_values", help="comma-separated grid values")
    p_sweep.add_argument("--sweep-metric", dest="sweep_metric", help="summary metric name")

    p_dump = sub.add_parser("dump", help="run and write a particle snapshot")
    _add_common_flags(p_dump)
    p_dump.add_argument("--at", choices=("init", "final"), default="final")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = parse_config(args.config, _overrides(args))
        if args.command == "dump":
            path = dump_particles(config, at=args.at)
            logger.info("particle snapshot written to %s", path)
            return 0
        if args.command == "sweep" and config.sweep_param is None:
            raise ConfigError(["sweep requires sweep_param and sweep_values"])
        return run_experiment(config)
    except ConfigError as err:
        for violation in err.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return 2
    except (ParseError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
