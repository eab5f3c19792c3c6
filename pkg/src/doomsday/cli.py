"""Command-line interface. Exit codes are listed in ``EXIT_CODES``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import warnings
from pathlib import Path
from typing import Sequence

from doomsday.attack import AttackMode, attack_nodes, couple, load_rule_set
from doomsday.exceptions import ConfigError, DoomsdayError, ScenarioSpaceError
from doomsday.io import (
    DisconnectedGraphWarning,
    dumps,
    emit_report_dot,
    graph_to_document,
    load_config,
    parse_epsilon_field,
    parse_graph,
    scenario_to_document,
    write_atomic,
)
from doomsday.metrics import MetricChoice, MetricKind
from doomsday.pipeline import run_pipeline
from doomsday.scenarios import (
    Scenario,
    ScenarioMode,
    bin_scenarios,
    enumerate_scenarios,
    sample_scenarios,
    scenario_count,
)

EXIT_CODES = {
    0: "success",
    1: "unexpected internal error",
    2: "command-line usage error",
    3: "invalid config document",
    4: "invalid graph document or graph precondition",
    5: "invalid rule set",
    6: "scenario space error (e.g. exhaustive cap exceeded)",
    7: "no scenario survived binning",
    8: "attack or coupling error",
    9: "metric error",
}


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="config document (JSON)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="parallel workers; output does not depend on it")
    parser.add_argument("--seed", type=int, default=d, help="sampler seed (u64)")
    parser.add_argument("--metric", choices=[m.value for m in MetricKind], default=d)
    parser.add_argument("--epsilon", default=d, help="tolerance as a decimal string")
    parser.add_argument("--rules", default=d, help="built-in rule set or rule-set document")
    parser.add_argument("--attack-mode", default=d, help="SINGLE, SIMULTANEOUS or SUBSETS:k")
    parser.add_argument("--max-scenarios", type=int, default=d, help="exhaustive enumeration cap")
    parser.add_argument("--allow-disconnected", action="store_true",
                        default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doomsday", description="Doomsday-scenario stress testing of networks.")
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kw) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kw)
        _global_flags(p, suppress=True)
        return p

    p = add("validate", help="check a config and everything it references")
    p.add_argument("config_path", nargs="?", metavar="config")

    p = add("scenarios", help="count, enumerate or sample the scenario space")
    p.add_argument("action", choices=["count", "enumerate", "sample"])
    p.add_argument("--count", type=int, default=None, help="draws for 'sample'")

    add("bin", help="list scenarios retained by binning")

    p = add("attack", help="attack one node of one scenario")
    p.add_argument("--scenario", required=True, help="scenario key, e.g. '0,1|0-1'")
    p.add_argument("--node", type=int, action="append", required=True,
                   help="scenario node to attack (repeat for several)")

    p = add("doomsday", help="run the full search and write the report")
    p.add_argument("--output", default=None, help="report path (default: config 'output' or stdout)")

    p = add("report", help="render a report")
    p.add_argument("--dot", action="store_true", required=True, help="emit DOT of the attacked G")
    p.add_argument("--input", default=None, help="existing report document (otherwise the search is rerun)")
    p.add_argument("--output", default=None)
    return parser


def _load(args):
    path = getattr(args, "config_path", None) or args.config
    if path is None:
        raise ConfigError("no config given; pass --config <path>")
    cfg = load_config(path, {"allow_disconnected": True} if args.allow_disconnected else None)
    b = cfg.binning
    changes = {}
    if args.epsilon is not None:
        changes["epsilon"] = parse_epsilon_field(args.epsilon)
    if args.metric is not None:
        changes["metric"] = MetricChoice(MetricKind(args.metric), b.metric.smoothing)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
        changes["rng_seed"] = args.seed
    if args.max_scenarios is not None:
        changes["exhaustive_cap"] = args.max_scenarios
    if changes:
        cfg = dataclasses.replace(cfg, binning=dataclasses.replace(b, **changes))
    if args.rules is not None:
        cfg = dataclasses.replace(cfg, rule_set=load_rule_set(args.rules))
    if args.attack_mode is not None:
        cfg = dataclasses.replace(cfg, attack_mode=AttackMode.parse(args.attack_mode))
    return cfg


def _emit(text: str, output: str | None) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _generate(cfg):
    b = cfg.binning
    if b.mode is ScenarioMode.EXHAUSTIVE:
        return list(enumerate_scenarios(cfg.seed, b.exhaustive_cap))
    return sample_scenarios(cfg.seed, b.sample_count, b.rng_seed)


def _cmd_validate(args, cfg) -> int:
    total = scenario_count(cfg.seed.n_total, cfg.seed.n_marked)
    print(
        f"ok: G has {cfg.graph.n_vertices} vertices / {cfg.graph.n_edges} edges; "
        f"driver universe {cfg.seed.n_total} ({cfg.seed.n_marked} marked); "
        f"{total} scenarios; rules {cfg.rule_set.name}"
    )
    return 0


def _cmd_scenarios(args, cfg) -> int:
    if args.action == "count":
        print(scenario_count(cfg.seed.n_total, cfg.seed.n_marked))
        return 0
    if args.action == "enumerate":
        items = enumerate_scenarios(cfg.seed, cfg.binning.exhaustive_cap)
    else:
        count = args.count if args.count is not None else cfg.binning.sample_count
        if count < 1:
            raise ScenarioSpaceError(f"--count must be >= 1, got {count}")
        items = sample_scenarios(cfg.seed, count, cfg.binning.rng_seed)
    for s in items:
        sys.stdout.write(json.dumps(scenario_to_document(s), sort_keys=True) + "\n")
    return 0


def _cmd_bin(args, cfg) -> int:
    retained = bin_scenarios(_generate(cfg), cfg.seed, cfg.binning, n_jobs=args.threads)
    for s in retained:
        print(s.key_str)
    return 0 if retained else 7


def _cmd_attack(args, cfg) -> int:
    scenario = Scenario.from_key(args.scenario)
    missing = [a for a in cfg.seed.marked if a not in scenario.included]
    extra = [a for a in scenario.included if a >= cfg.seed.n_total]
    if missing or extra:
        raise ScenarioSpaceError(f"{args.scenario!r} is not a scenario of this seed")
    outcome = attack_nodes(couple(cfg.graph, scenario, cfg.coupling), args.node, cfg.rule_set)
    doc = {
        "version": "1",
        "scenario": scenario.key_str,
        "attacked": list(outcome.attacked),
        "failed": list(outcome.failed),
        "component_count": outcome.component_count,
        "rounds_used": outcome.rounds_used,
        "fixed_point": outcome.fixed_point,
        "change_log": [r.to_document() for r in outcome.change_log],
        "post_g": graph_to_document(outcome.post_g),
    }
    sys.stdout.write(dumps(doc))
    return 0


def _cmd_doomsday(args, cfg) -> int:
    if args.output:
        cfg = dataclasses.replace(cfg, output_path=Path(args.output))
    result = run_pipeline(cfg, n_jobs=args.threads)
    if cfg.output_path is None:
        sys.stdout.write(result.text)
    else:
        top = result.report.doomsday
        print(
            f"doomsday {top.scenario.key_str}: G splits into {top.component_count} components "
            f"({len(result.report.ties)} tied, tau={result.report.tau_doomsday}); report -> {cfg.output_path}"
        )
    return 0


def _cmd_report(args, cfg) -> int:
    if args.input:
        doc = json.loads(Path(args.input).read_text(encoding="utf-8"))
        try:
            # an attacked G is usually disconnected; that is the point
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DisconnectedGraphWarning)
                post_g = parse_graph(doc["doomsday"]["post_g"], require_connected=False)
        except (KeyError, TypeError):
            raise ConfigError(f"{args.input}: not a report document") from None
        dot = emit_report_dot(cfg.graph, post_g)
    else:
        dot = run_pipeline(cfg, n_jobs=args.threads, write=False).dot
    _emit(dot, args.output)
    return 0


COMMANDS = {
    "validate": _cmd_validate,
    "scenarios": _cmd_scenarios,
    "bin": _cmd_bin,
    "attack": _cmd_attack,
    "doomsday": _cmd_doomsday,
    "report": _cmd_report,
}


def _error_prefix() -> str:
    if sys.stderr.isatty() and not os.environ.get("NO_COLOR"):
        return "\033[31merror:\033[0m"
    return "error:"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if args.threads == 0:
        parser.error("--threads must be non-zero")
    try:
        cfg = _load(args)
        return COMMANDS[args.command](args, cfg)
    except DoomsdayError as exc:
        print(f"{_error_prefix()} {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"{_error_prefix()} {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
