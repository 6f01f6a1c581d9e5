"""Command line interface: solve, verify, oracle, sweep.

Experiments are described by a YAML config with model / run / verify /
output blocks.  Physical parameters (rates, rewards, costs) are always
required; only algorithmic knobs carry defaults.  Exit codes: 0 success,
2 config error, 3 instability, 4 I/O failure, 5 verification target not
met, 6 sweep finished with failed runs.
"""

import copy
import json
import os
import sys
from concurrent import futures

import click
import numpy as np
import yaml

from . import __version__
from . import distributions, engine, kernels, verify as verify_mod
from .errors import ConfigurationError, InstabilityError
from .models import (ObservableQueueModel, ParallelQueuesModel, SensingModel)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSTABILITY = 3
EXIT_IO = 4
EXIT_NOT_CERTIFIED = 5
EXIT_SWEEP_FAILURES = 6

OUT_DIR_ENV = "QNASH_OUT"
MAX_SWEEP_RUNS = 10_000

_EXIT_CODE_HELP = (
    "Exit codes: 0 ok, 2 config error, 3 instability, 4 I/O failure, "
    "5 verification target missed, 6 sweep had failing runs.")


def _require(mapping, key, block):
    if key not in mapping:
        raise ConfigurationError("missing required field %r in %s" % (key, block))
    return mapping[key]


def _no_extras(mapping, allowed, block):
    extras = set(mapping) - set(allowed)
    if extras:
        raise ConfigurationError(
            "unknown fields %s in %s" % (sorted(extras), block))


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError("cannot read config %s: %s" % (path, exc))
    except yaml.YAMLError as exc:
        raise ConfigurationError("config %s is not valid YAML: %s" % (path, exc))
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a mapping")
    return data


def build_model(model_cfg):
    if not isinstance(model_cfg, dict):
        raise ConfigurationError("model block must be a mapping")
    kind = _require(model_cfg, "kind", "model")
    if kind == "parallel_queues":
        _no_extras(model_cfg, {"kind", "interarrival", "stations"}, "model")
        stations = _require(model_cfg, "stations", "model")
        if not isinstance(stations, list) or not stations:
            raise ConfigurationError("model.stations must be a nonempty list")
        services, rewards, costs = [], [], []
        for idx, st in enumerate(stations):
            block = "model.stations[%d]" % idx
            if not isinstance(st, dict):
                raise ConfigurationError("%s must be a mapping" % block)
            _no_extras(st, {"service", "reward", "cost"}, block)
            services.append(
                distributions.from_config(_require(st, "service", block)))
            rewards.append(float(_require(st, "reward", block)))
            costs.append(float(_require(st, "cost", block)))
        inter = distributions.from_config(
            _require(model_cfg, "interarrival", "model"))
        return ParallelQueuesModel(services, inter, rewards, costs)
    if kind == "sensing":
        _no_extras(model_cfg, {"kind", "arrival_rate", "service",
                               "sensing_cost", "waiting_cost"}, "model")
        return SensingModel(
            arrival_rate=float(_require(model_cfg, "arrival_rate", "model")),
            service=distributions.from_config(
                _require(model_cfg, "service", "model")),
            sensing_cost=float(_require(model_cfg, "sensing_cost", "model")),
            waiting_cost=float(_require(model_cfg, "waiting_cost", "model")))
    if kind == "observable_queue":
        _no_extras(model_cfg, {"kind", "interarrival", "service", "reward",
                               "cost"}, "model")
        return ObservableQueueModel(
            interarrival=distributions.from_config(
                _require(model_cfg, "interarrival", "model")),
            service=distributions.from_config(
                _require(model_cfg, "service", "model")),
            reward=float(_require(model_cfg, "reward", "model")),
            cost=float(_require(model_cfg, "cost", "model")))
    raise ConfigurationError(
        "unknown model kind %r (expected parallel_queues, sensing or "
        "observable_queue)" % kind)


def build_run_config(run_cfg, seed_override=None):
    if not isinstance(run_cfg, dict):
        raise ConfigurationError("run block must be a mapping")
    allowed = {"iterations", "seed", "initial", "step", "truncation",
               "control_variates", "log_stride", "batch_cycles"}
    _no_extras(run_cfg, allowed, "run")
    iterations = int(_require(run_cfg, "iterations", "run"))
    if seed_override is not None:
        seed = int(seed_override)
    else:
        seed = int(_require(run_cfg, "seed", "run"))
    step_cfg = run_cfg.get("step") or {}
    if not isinstance(step_cfg, dict):
        raise ConfigurationError("run.step must be a mapping")
    _no_extras(step_cfg, {"gamma0", "dynamic"}, "run.step")
    step = engine.Harmonic(gamma0=float(step_cfg.get("gamma0", 1.0)),
                           dynamic=bool(step_cfg.get("dynamic", False)))
    trunc_cfg = run_cfg.get("truncation")
    truncation = None
    if trunc_cfg is not None:
        if not isinstance(trunc_cfg, dict):
            raise ConfigurationError("run.truncation must be a mapping")
        _no_extras(trunc_cfg, {"kappa"}, "run.truncation")
        truncation = engine.LinearTruncation(
            kappa=float(trunc_cfg.get("kappa", 1.0)))
    log_stride = run_cfg.get("log_stride")
    return engine.RunConfig(
        iterations=iterations,
        seed=seed,
        initial=run_cfg.get("initial"),
        step=step,
        truncation=truncation,
        control_variates=bool(run_cfg.get("control_variates", False)),
        log_stride=None if log_stride is None else int(log_stride),
        batch_cycles=int(run_cfg.get("batch_cycles", 1)))


def resolved_config(config, run_config):
    """Config echo with every default filled in; reproduces the run."""
    out = copy.deepcopy(config)
    run_block = {
        "iterations": run_config.iterations,
        "seed": run_config.seed,
        "step": {"gamma0": run_config.step.gamma0,
                 "dynamic": run_config.step.dynamic},
        "control_variates": run_config.control_variates,
        "log_stride": run_config.log_stride,
        "batch_cycles": run_config.batch_cycles,
    }
    if run_config.initial is not None:
        run_block["initial"] = run_config.initial
    elif "initial" in config.get("run", {}):
        run_block["initial"] = config["run"]["initial"]
    if run_config.truncation is not None:
        run_block["truncation"] = {"kappa": run_config.truncation.kappa}
    out["run"] = run_block
    return out


def output_dir(cli_out, config):
    if cli_out:
        return cli_out
    cfg_dir = (config.get("output") or {}).get("dir")
    if cfg_dir:
        return str(cfg_dir)
    env_dir = os.environ.get(OUT_DIR_ENV)
    if env_dir:
        return env_dir
    return "."


def _summary_dict(config, run_config, traj):
    return {
        "config": resolved_config(config, run_config),
        "signal_count": traj.signal_count,
        "k": traj.k,
        "final_strategy": [[float(v) for v in row] for row in traj.final],
        "totals": {
            "arrivals": traj.total_arrivals,
            "cycles": traj.total_cycles,
            "cap_hits": traj.cap_hits,
            "last_cap_hit": traj.last_cap_hit,
            "wall_clock": traj.wall_clock,
        },
        "kernel": kernels.implementation,
        "version": __version__,
    }


def _parse_inline_strategy(text):
    rows = []
    for part in text.split(";"):
        try:
            row = [float(v) for v in part.split(",") if v.strip() != ""]
        except ValueError:
            raise ConfigurationError("non-numeric strategy entry in %r" % text)
        if not row:
            raise ConfigurationError("empty strategy row in %r" % text)
        rows.append(row)
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ConfigurationError("strategy rows differ in length")
    return np.asarray(rows, dtype=np.float64)


def _verify_budget(verify_cfg):
    if not isinstance(verify_cfg, dict):
        raise ConfigurationError("verify block must be a mapping")
    _no_extras(verify_cfg, {"cycles", "arrivals", "batches", "alpha",
                            "target_eps", "seed"}, "verify")
    cycles = verify_cfg.get("cycles")
    arrivals = verify_cfg.get("arrivals")
    if (cycles is None) == (arrivals is None):
        raise ConfigurationError(
            "verify block needs exactly one of cycles or arrivals")
    return (None if cycles is None else int(cycles),
            None if arrivals is None else int(arrivals),
            int(verify_cfg.get("batches", 30)),
            float(verify_cfg.get("alpha", 0.005)))


@click.group(epilog=_EXIT_CODE_HELP)
@click.version_option(version=__version__)
def main():
    """Simulation-based equilibrium solver for queueing games."""


@main.command(epilog=_EXIT_CODE_HELP)
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="Experiment config (YAML).")
@click.option("--seed", type=int, default=None,
              help="Override the master seed from the config.")
@click.option("--out", type=click.Path(), default=None,
              help="Output directory (default: config, then $%s)." % OUT_DIR_ENV)
def solve(config_path, seed, out):
    """Run the solver and write trajectory.csv plus summary.json."""
    try:
        config = load_config(config_path)
        model = build_model(_require(config, "model", "config"))
        run_config = build_run_config(
            _require(config, "run", "config"), seed_override=seed)
    except ConfigurationError as exc:
        click.echo("config error: %s" % exc, err=True)
        raise SystemExit(EXIT_CONFIG)
    try:
        traj = engine.run(model, run_config)
    except InstabilityError as exc:
        click.echo("instability: %s" % exc, err=True)
        raise SystemExit(EXIT_INSTABILITY)
    except ConfigurationError as exc:
        click.echo("config error: %s" % exc, err=True)
        raise SystemExit(EXIT_CONFIG)
    summary = _summary_dict(config, run_config, traj)
    verify_cfg = config.get("verify")
    if verify_cfg:
        try:
            cycles, arrivals, batches, alpha = _verify_budget(verify_cfg)
            estimate = verify_mod.estimate_values(
                model, traj.final, cycles=cycles, arrivals=arrivals,
                batches=batches, alpha=alpha,
                seed=int(verify_cfg.get("seed", 0)))
            cert = verify_mod.epsilon_gap(estimate)
        except InstabilityError as exc:
            click.echo("instability: %s" % exc, err=True)
            raise SystemExit(EXIT_INSTABILITY)
        except ConfigurationError as exc:
            click.echo("config error: %s" % exc, err=True)
            raise SystemExit(EXIT_CONFIG)
        summary["estimate"] = estimate.to_dict()
        summary["certificate"] = cert.to_dict()
        target = verify_cfg.get("target_eps")
        if target is not None:
            summary["certified"] = bool(cert.eps_hi <= float(target))
    out_dir = output_dir(out, config)
    try:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "trajectory.csv")
        with open(csv_path, "w", encoding="utf-8") as fh:
            traj.write_csv(fh)
        summary_path = os.path.join(out_dir, "summary.json")
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        click.echo("i/o error: %s" % exc, err=True)
        raise SystemExit(EXIT_IO)
    click.echo("wrote %s and %s" % (csv_path, summary_path))
    click.echo("final strategy: %s" % json.dumps(
        [[float(v) for v in row] for row in traj.final]))


@main.command(epilog=_EXIT_CODE_HELP)
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--strategy", "strategy_text", default=None,
              help="Inline strategy, rows ';'-separated: '0.5,0.5;0.2,0.8'.")
@click.option("--from-summary", "summary_path", default=None,
              type=click.Path(), help="Read the strategy from a solve summary.")
@click.option("--seed", type=int, default=None,
              help="Verification seed (default: verify.seed or 0).")
@click.option("--target-eps", type=float, default=None,
              help="Certification target (default: verify.target_eps).")
@click.option("--out", type=click.Path(), default=None,
              help="Directory for certificate.json (default: config/$%s)."
                   % OUT_DIR_ENV)
def verify(config_path, strategy_text, summary_path, seed, target_eps, out):
    """Estimate utilities of a strategy and test the epsilon gap."""
    try:
        config = load_config(config_path)
        model = build_model(_require(config, "model", "config"))
        cycles, arrivals, batches, alpha = _verify_budget(
            _require(config, "verify", "config"))
        if (strategy_text is None) == (summary_path is None):
            raise ConfigurationError(
                "give exactly one of --strategy or --from-summary")
        if strategy_text is not None:
            strategy = _parse_inline_strategy(strategy_text)
        else:
            try:
                with open(summary_path, "r", encoding="utf-8") as fh:
                    summary = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigurationError(
                    "cannot read summary %s: %s" % (summary_path, exc))
            strategy = np.asarray(summary["final_strategy"], dtype=np.float64)
        if target_eps is None:
            target_eps = (config.get("verify") or {}).get("target_eps")
        if target_eps is None:
            raise ConfigurationError(
                "no target epsilon (set verify.target_eps or --target-eps)")
        target_eps = float(target_eps)
        if seed is None:
            seed = int((config.get("verify") or {}).get("seed", 0))
    except ConfigurationError as exc:
        click.echo("config error: %s" % exc, err=True)
        raise SystemExit(EXIT_CONFIG)
    try:
        estimate = verify_mod.estimate_values(
            model, strategy, cycles=cycles, arrivals=arrivals,
            batches=batches, alpha=alpha, seed=seed)
        cert = verify_mod.epsilon_gap(estimate)
    except InstabilityError as exc:
        click.echo("instability: %s" % exc, err=True)
        raise SystemExit(EXIT_INSTABILITY)
    except ConfigurationError as exc:
        click.echo("config error: %s" % exc, err=True)
        raise SystemExit(EXIT_CONFIG)
    certified = bool(cert.eps_hi <= target_eps)
    payload = {
        "estimate": estimate.to_dict(),
        "certificate": cert.to_dict(),
        "target_eps": target_eps,
        "certified": certified,
    }
    out_dir = output_dir(out, config)
    try:
        os.makedirs(out_dir, exist_ok=True)
        cert_path = os.path.join(out_dir, "certificate.json")
        with open(cert_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        click.echo("i/o error: %s" % exc, err=True)
        raise SystemExit(EXIT_IO)
    click.echo(json.dumps(payload, indent=2))
    raise SystemExit(EXIT_OK if certified else EXIT_NOT_CERTIFIED)


@main.command(epilog=_EXIT_CODE_HELP)
@click.option("--lam", type=float, required=True, help="Arrival rate.")
@click.option("--mu", type=float, required=True, help="Service rate.")
@click.option("--reward", type=float, required=True, help="Service reward.")
@click.option("--cost", type=float, required=True, help="Waiting cost rate.")
def oracle(lam, mu, reward, cost):
    """Print closed-form M/M/1 references: p_e and the threshold K."""
    try:
        result = verify_mod.mm1_oracles(lam, mu, reward, cost)
    except ConfigurationError as exc:
        click.echo("config error: %s" % exc, err=True)
        raise SystemExit(EXIT_CONFIG)
    click.echo(json.dumps(result.to_dict()))


def _set_by_path(config, dotted, value):
    node = config
    parts = dotted.split(".")
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
            except ValueError:
                raise ConfigurationError(
                    "%r indexes a list but is not an integer" % dotted)
            if not 0 <= idx < len(node):
                raise ConfigurationError("%r is out of range" % dotted)
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif isinstance(node, dict):
            if last:
                node[part] = value
            else:
                if part not in node or node[part] is None:
                    node[part] = {}
                node = node[part]
        else:
            raise ConfigurationError(
                "%r descends into a scalar" % dotted)


def _sweep_worker(args):
    index, config, overrides = args
    row = {"index": index, "status": "ok", "error": "",
           "final": None, "eps_hat": "", "eps_hi": "", "certified": ""}
    try:
        config = copy.deepcopy(config)
        for key, value in overrides.items():
            _set_by_path(config, key, value)
        model = build_model(_require(config, "model", "config"))
        run_config = build_run_config(_require(config, "run", "config"))
        traj = engine.run(model, run_config)
        row["final"] = [float(v) for v in traj.final.ravel()]
        verify_cfg = config.get("verify")
        if verify_cfg:
            cycles, arrivals, batches, alpha = _verify_budget(verify_cfg)
            seed = int(verify_cfg.get("seed", 0))
            estimate = verify_mod.estimate_values(
                model, traj.final, cycles=cycles, arrivals=arrivals,
                batches=batches, alpha=alpha, seed=seed)
            cert = verify_mod.epsilon_gap(estimate)
            row["eps_hat"] = repr(cert.eps_hat)
            row["eps_hi"] = repr(cert.eps_hi)
            target = verify_cfg.get("target_eps")
            if target is not None:
                certified = bool(cert.eps_hi <= float(target))
                row["certified"] = str(certified).lower()
                if not certified:
                    row["status"] = "not_certified"
                    row["error"] = ("eps_hi %.6g above target %.6g"
                                    % (cert.eps_hi, float(target)))
    except InstabilityError as exc:
        row["status"] = "instability"
        row["error"] = str(exc)
    except ConfigurationError as exc:
        row["status"] = "config_error"
        row["error"] = str(exc)
    except Exception as exc:  # keep the sweep going, report per row
        row["status"] = "failed"
        row["error"] = "%s: %s" % (type(exc).__name__, exc)
    return row


@main.command(epilog=_EXIT_CODE_HELP)
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", type=click.Path(), default=None)
@click.option("--jobs", type=int, default=None,
              help="Worker processes (default: min(cpu count, runs)).")
def sweep(config_path, out, jobs):
    """Run a config grid concurrently and write sweep.csv."""
    try:
        config = load_config(config_path)
        sweep_cfg = _require(config, "sweep", "config")
        if not isinstance(sweep_cfg, dict):
            raise ConfigurationError("sweep block must be a mapping")
        _no_extras(sweep_cfg, {"grid"}, "sweep")
        grid = _require(sweep_cfg, "grid", "sweep")
        if not isinstance(grid, dict):
            raise ConfigurationError("sweep.grid must map paths to lists")
        keys = list(grid)
        for key in keys:
            if not isinstance(grid[key], list):
                raise ConfigurationError(
                    "sweep.grid[%r] must be a list of values" % key)
        base = {k: v for k, v in config.items() if k != "sweep"}
        _require(base, "model", "config")
        _require(base, "run", "config")
        model = build_model(base["model"])  # validates the base model

        combos = [{}]
        for key in keys:
            combos = [dict(c, **{key: v}) for c in combos for v in grid[key]]
        if len(combos) > MAX_SWEEP_RUNS:
            raise ConfigurationError(
                "grid has %d runs, limit is %d" % (len(combos), MAX_SWEEP_RUNS))
    except ConfigurationError as exc:
        click.echo("config error: %s" % exc, err=True)
        raise SystemExit(EXIT_CONFIG)

    strategy_cols = ["p_%d_%d" % (s, a)
                     for s in range(model.signal_count)
                     for a in range(model.k)]
    header = (["index"] + keys + ["status"] + strategy_cols
              + ["eps_hat", "eps_hi", "certified", "error"])

    tasks = [(i, base, combo) for i, combo in enumerate(combos)]
    rows = [None] * len(tasks)
    if tasks:
        workers = jobs if jobs else min(os.cpu_count() or 1, len(tasks))
        workers = max(1, min(workers, len(tasks)))
        if workers == 1:
            for task in tasks:
                rows[task[0]] = _sweep_worker(task)
        else:
            with futures.ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(_sweep_worker, tasks):
                    rows[row["index"]] = row

    out_dir = output_dir(out, config)
    try:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "sweep.csv")
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for i, row in enumerate(rows):
                combo = combos[i]
                final = row["final"]
                if final is None:
                    strat_vals = [""] * len(strategy_cols)
                else:
                    strat_vals = [repr(v) for v in final]
                cells = ([str(i)] + [repr(combo[k]) for k in keys]
                         + [row["status"]] + strat_vals
                         + [row["eps_hat"], row["eps_hi"], row["certified"],
                            '"%s"' % row["error"].replace('"', "'")])
                fh.write(",".join(cells) + "\n")
    except OSError as exc:
        click.echo("i/o error: %s" % exc, err=True)
        raise SystemExit(EXIT_IO)

    failed = [r for r in rows if r["status"] != "ok"]
    click.echo("wrote %s (%d runs, %d failed)"
               % (csv_path, len(rows), len(failed)))
    raise SystemExit(EXIT_SWEEP_FAILURES if failed else EXIT_OK)


if __name__ == "__main__":
    main()
