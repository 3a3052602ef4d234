"""Experiment runner: load or generate a game, validate the step sizes, run
the matching algorithm, and write the trace, summary, and instance files.

Exit codes: 0 success, 2 validation or configuration failure, 3 divergence,
4 I/O failure.  ``GNESOLVE_OUTPUT_DIR`` overrides the configured output
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import benchgames
from .admm import StopRule, run_admm
from .config import DEFAULTS, ExperimentConfig, load_config, parse_edge_list
from .diagnostics import consensus_error, kkt_residual
from .errors import (ConfigError, DivergenceError, GnesolveError,
                     ValidationError)
from .games import EQUALITY, INEQUALITY, Game, game_to_dict, load_game
from .graphs import CommGraph, build_incidence
from .operators import (check_step_sizes_equality, inequality_preconditioner)
from .params import AlgoParams, exact_schedule, inverse_square
from .splitting import run_splitting
from .subgames import InnerSettings, InnerSolver
from .trace import TRACE_COLUMNS, write_trace_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


def _build_game(cfg: ExperimentConfig) -> Game:
    builtin = cfg.get("game.builtin")
    file_path = cfg.get("game.file")
    if builtin and file_path:
        raise ConfigError("give either game.builtin or game.file, not both")
    if file_path:
        return load_game(file_path)
    if not builtin:
        raise ConfigError("missing game.builtin or game.file")
    if builtin not in benchgames.BUILTIN_GAMES:
        raise ConfigError(
            f"unknown builtin game {builtin!r}; "
            f"choices: {sorted(benchgames.BUILTIN_GAMES)}")
    return benchgames.BUILTIN_GAMES[builtin](cfg.get_int("game.seed"))


def _build_graph(cfg: ExperimentConfig, game: Game) -> CommGraph:
    edges = cfg.get("graph.edges")
    if edges:
        return build_incidence(game.n_players, parse_edge_list(edges))
    name = cfg.get("graph.builtin")
    graph = benchgames.benchmark_graph(name)
    if graph.n_nodes != game.n_players:
        # builtin default may not fit desk-scale games; fall back to a chain
        from .graphs import path_graph
        if cfg.values.get("graph.builtin"):
            raise ConfigError(
                f"graph {name!r} has {graph.n_nodes} nodes but the game has "
                f"{game.n_players} players")
        graph = path_graph(game.n_players)
    return graph


def _build_params(cfg: ExperimentConfig, game: Game, graph: CommGraph) -> AlgoParams:
    mu_kind = cfg.get("params.mu")
    if mu_kind == "exact":
        mu = exact_schedule()
    elif mu_kind == "inverse-square":
        mu = inverse_square(cfg.get_float("params.mu0"))
    else:
        raise ConfigError(f"unknown tolerance schedule {mu_kind!r}")
    preset = cfg.get("params.preset")
    if preset == "task-allocation":
        return benchgames.task_allocation_params(
            game, graph, cfg.get_int("params.seed"), mu)
    if preset:
        raise ConfigError(f"unknown params preset {preset!r}")
    return AlgoParams.uniform(
        game, graph, r=cfg.get_float("params.r"), h=cfg.get_float("params.h"),
        w=cfg.get_float("params.w"), rho=cfg.get_float("params.rho"), mu=mu)


def _build_inner(cfg: ExperimentConfig) -> InnerSolver:
    return InnerSolver(InnerSettings(
        mode=cfg.get("inner.mode"),
        gamma=cfg.get_optional_float("inner.gamma"),
        lipschitz=cfg.get_optional_float("inner.lipschitz"),
        cap=cfg.get_int("inner.cap")))


def _algorithm(cfg: ExperimentConfig, game: Game) -> str:
    algorithm = cfg.get("algorithm")
    if algorithm not in ("admm", "splitting"):
        raise ConfigError("algorithm must be 'admm' or 'splitting'")
    needed = EQUALITY if algorithm == "admm" else INEQUALITY
    if game.kind != needed:
        raise ConfigError(
            f"algorithm {algorithm!r} requires a {needed}-coupled game, "
            f"got {game.kind}")
    return algorithm


def _validate(cfg: ExperimentConfig):
    game = _build_game(cfg)
    graph = _build_graph(cfg, game)
    params = _build_params(cfg, game, graph)
    algorithm = _algorithm(cfg, game)
    _build_inner(cfg)   # surfaces bad inner settings at validation time
    if algorithm == "admm":
        check = check_step_sizes_equality(params, game, graph)
        if not check.ok:
            raise ValidationError(
                "step-size conditions failed: "
                f"min eig(R - Lam^T H Lam) = {check.margin_x:.6g}, "
                f"min eig(W^-1 - Vbar^T H Vbar) = {check.margin_z:.6g}")
        margins = {"x": check.margin_x, "z": check.margin_z}
    else:
        report = inequality_preconditioner(params, game, graph)
        margins = report.margins
    return game, graph, params, algorithm, margins


def _parameter_echo(cfg: ExperimentConfig) -> dict:
    """Every effective parameter, defaults included, so a run can be
    reconstructed from its outputs alone."""
    echo = dict(DEFAULTS)
    echo.update(cfg.values)
    return dict(sorted(echo.items()))


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    _, _, _, algorithm, margins = _validate(cfg)
    print(f"ok: {algorithm} step sizes valid; margins: "
          + ", ".join(f"{k}={v:.6g}" for k, v in margins.items()))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    game, graph, params, algorithm, margins = _validate(cfg)
    inner = _build_inner(cfg)
    stop = StopRule(cfg.get_int("stop.max_iter"), cfg.get_float("stop.tol"))
    out_dir = Path(os.environ.get("GNESOLVE_OUTPUT_DIR") or cfg.get("output.dir"))
    out_dir.mkdir(parents=True, exist_ok=True)

    started = time.perf_counter()
    runner = run_admm if algorithm == "admm" else run_splitting
    result = runner(game, graph, params, inner, stop,
                    seed=cfg.get_int("run.seed"),
                    trace_stride=cfg.get_int("trace.stride"))
    wall = time.perf_counter() - started

    write_trace_csv(out_dir / "trace.csv", result.rows)
    with open(out_dir / "instance.json", "w", encoding="utf-8") as fh:
        json.dump(game_to_dict(game), fh, indent=1)
        fh.write("\n")

    state = result.state
    if game.kind == INEQUALITY:
        # relaxation overshoot may leave tiny negative entries in the mean
        lam_arg = np.maximum(state.lam.mean(axis=0), 0.0)
    else:
        lam_arg = state.lam
    kkt = kkt_residual(game, state.x, lam_arg, tol=10.0 * stop.tol)
    summary = {
        "algorithm": algorithm,
        "converged": result.converged,
        "iterations": result.iterations,
        "wall_seconds": wall,
        "validator_margins": margins,
        "consensus_error": consensus_error(state.lam),
        "kkt": {
            "stationarity_per_player": list(kkt.stationarity_per_player),
            "feasibility": kkt.feasibility,
            "consensus": kkt.consensus,
            "complementarity": kkt.complementarity,
            "is_variational": kkt.is_variational,
        },
        "final_residuals": result.residuals.__dict__,
        "parameters": _parameter_echo(cfg),
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    # exhausting the iteration budget is reported, not an error; divergence
    # (non-finite states) raises and maps to its own exit code
    print(f"{algorithm}: {'converged' if result.converged else 'stopped'} "
          f"after {result.iterations} iterations; outputs in {out_dir}")
    return EXIT_OK


def cmd_extract(args) -> int:
    quantity = args.quantity
    if quantity not in TRACE_COLUMNS or quantity == "k":
        raise ConfigError(
            f"unknown quantity {quantity!r}; "
            f"choices: {[c for c in TRACE_COLUMNS if c != 'k']}")
    import csv
    with open(args.trace, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is not None and quantity not in reader.fieldnames:
            raise ConfigError(f"trace file has no column {quantity!r}")
        for row in reader:
            print(f"{row['k']} {row[quantity]}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gnesolve",
        description="Distributed generalized Nash equilibrium experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)
    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)
    p_ext = sub.add_parser("extract", help="extract one trace column as 'k value' rows")
    p_ext.add_argument("trace")
    p_ext.add_argument("quantity")
    p_ext.set_defaults(func=cmd_extract)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GnesolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
