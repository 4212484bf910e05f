"""Command-line interface.

Exit codes: 0 success, 1 invalid transitions found, 2 bad input or
configuration, 3 infeasible repair.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Optional

import tomli

from . import __version__
from .abstraction import AbstractionConfig, abstract
from .conformance import DisconnectedModelError, load_model, validate
from .io import (ParseError, format_edits_csv, format_event_csv,
                 format_meta_csv, format_sensor_csv, read_events, read_meta,
                 read_sensor_log, write_text)
from .metrics_report import change_report
from .model import ConfigurationError, HomelogError, InvalidInputError
from .pipeline import MODES, correct, default_methods
from .repair_pm import InfeasibleRepairError, PenaltyConfig
from .repair_rules import (Action, ResolutionPolicy, derive_rules, format_rules,
                           load_rules)
from .simulate import ErrorSpec, SimConfig, evaluate, inject, simulate_trajectory

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3

# key -> type; tables are dicts of str -> value
CONFIG_KEYS = {
    "sensors": str, "meta": str, "events": str, "model": str, "rules": str, "out_dir": str,
    "seed": int, "mode": str, "policy": str, "interactive": bool, "order": list,
    "insert_cost": float, "remove_base": float, "remove_per_support": float,
    "max_consecutive_insertions": int,
    "horizon": int, "pir_period": int, "default_median": float, "default_sigma": float,
    "sensors_per_area": int, "dwell_median": dict, "dwell_sigma": dict,
    "p_miss": float, "p_noise": float, "jitter": int,
    "default_method": str, "rule_methods": dict, "confirm_max_support": int,
    "close_open_tail": bool,
}


class UsageError(HomelogError):
    pass


def load_config(path: Optional[str]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    except tomli.TOMLDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None
    for key, value in data.items():
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}: unknown key {key!r}")
        want = CONFIG_KEYS[key]
        if want is float and isinstance(value, int) and not isinstance(value, bool):
            data[key] = float(value)
        elif not isinstance(value, want) or (want is int and isinstance(value, bool)):
            raise UsageError(f"{path}: {key} must be {want.__name__}")
    return data


def settings(args: argparse.Namespace) -> dict[str, Any]:
    """Config file values overridden by any flag given on the command line."""
    merged = load_config(getattr(args, "config", None))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _need(s: dict, key: str) -> Any:
    if s.get(key) is None:
        raise UsageError(f"missing {key} (give it as an argument or in --config)")
    return s[key]


def _existing(s: dict, key: str) -> Path:
    path = Path(_need(s, key))
    if not path.is_file():
        raise UsageError(f"{key}: no such file {path}")
    return path


def penalty_config(s: dict) -> PenaltyConfig:
    defaults = PenaltyConfig()
    return PenaltyConfig(s.get("insert_cost", defaults.insert_cost),
                         s.get("remove_base", defaults.remove_base),
                         s.get("remove_per_support", defaults.remove_per_support),
                         s.get("max_consecutive_insertions"))


def sim_config(s: dict) -> SimConfig:
    d = SimConfig()
    return SimConfig(seed=s.get("seed", d.seed), horizon=s.get("horizon", d.horizon),
                     pir_period=s.get("pir_period", d.pir_period),
                     dwell_median=s.get("dwell_median", {}),
                     dwell_sigma=s.get("dwell_sigma", {}),
                     default_median=s.get("default_median", d.default_median),
                     default_sigma=s.get("default_sigma", d.default_sigma),
                     sensors_per_area=s.get("sensors_per_area", d.sensors_per_area))


def error_spec(s: dict) -> ErrorSpec:
    d = ErrorSpec()
    return ErrorSpec(s.get("p_miss", d.p_miss), s.get("p_noise", d.p_noise),
                     s.get("jitter", d.jitter))


def _policy(s: dict) -> ResolutionPolicy:
    try:
        return ResolutionPolicy(Action(s.get("policy", "drop")), bool(s.get("interactive", False)))
    except ValueError:
        raise UsageError(f"policy must be one of {[a.value for a in Action]}") from None


# -- commands -----------------------------------------------------------------

def cmd_abstract(args) -> int:
    s = settings(args)
    sensors, meta = _existing(s, "sensors"), _existing(s, "meta")
    log = read_sensor_log(sensors, meta)
    cfg = AbstractionConfig.from_log(log, s.get("close_open_tail", True))
    events = abstract(log, cfg)
    text = format_event_csv(events)
    if args.output:
        write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    s = settings(args)
    events = read_events(_existing(s, "events"))
    model = load_model(_existing(s, "model"))
    report = validate(events, model)
    print(report.summary())
    for i, a, b in report.invalid:
        print(f"  {i}: {a} -> {b}")
    return EXIT_OK if not report.invalid else EXIT_INVALID


def cmd_derive_rules(args) -> int:
    s = settings(args)
    events = read_events(_existing(s, "events"))
    methods = default_methods(events, s.get("default_method", "pct2.5"), s.get("rule_methods"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        text = format_rules(derive_rules(events, methods))
    if args.output:
        write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_repair(args) -> int:
    s = settings(args)
    mode = s.get("mode", "pm")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")
    events_path, model_path = _existing(s, "events"), _existing(s, "model")
    rules_path = _existing(s, "rules") if s.get("rules") else None
    out_dir = Path(_need(s, "out_dir"))
    events = read_events(events_path)
    model = load_model(model_path)
    rules = load_rules(rules_path) if rules_path else None
    cfg = penalty_config(s)
    order = tuple(s.get("order", ("rules", "pm")))
    result, used = correct(events, model, mode, rules, _policy(s), cfg, order,
                           s.get("default_method", "pct2.5"), s.get("rule_methods"),
                           s.get("confirm_max_support"))
    report = change_report(events, result)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_text(out_dir / "corrected.csv", format_event_csv(result.corrected))
    write_text(out_dir / "edits.csv", format_edits_csv(result.edits))
    write_text(out_dir / "report.csv", report.to_csv())
    write_text(out_dir / "days.csv", report.days_csv())
    write_text(out_dir / "report.txt", report.to_text())
    if used and not rules_path:
        write_text(out_dir / "rules.txt", format_rules(used))
    sys.stdout.write(report.to_text())
    print(f"total penalty {result.total_penalty!r}; {len(result.edits)} edits")
    return EXIT_OK


def cmd_simulate(args) -> int:
    s = settings(args)
    model = load_model(_existing(s, "model"))
    out_dir = Path(_need(s, "out_dir"))
    truth, clean = simulate_trajectory(model, sim_config(s))
    write_text(out_dir / "truth.csv", format_event_csv(truth))
    write_text(out_dir / "sensors.csv", format_sensor_csv(clean))
    write_text(out_dir / "meta.csv", format_meta_csv(clean.meta))
    print(f"{len(truth)} events, {len(clean)} readings -> {out_dir}")
    return EXIT_OK


def cmd_inject(args) -> int:
    s = settings(args)
    sensors, meta = _existing(s, "sensors"), _existing(s, "meta")
    model = load_model(_existing(s, "model"))
    log = read_sensor_log(sensors, meta)
    noisy = inject(log, error_spec(s), s.get("seed", 0), model)
    text = format_sensor_csv(noisy)
    if args.output:
        write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _metrics_json(m) -> str:
    data = m.as_dict()
    data["per_location"] = m.per_location
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def cmd_evaluate(args) -> int:
    s = settings(args)
    corrected = read_events(Path(args.corrected))
    truth = read_events(Path(args.truth))
    model = load_model(_existing(s, "model")) if s.get("model") else None
    text = _metrics_json(evaluate(corrected, truth, model))
    if args.output:
        write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    """simulate -> inject -> abstract -> repair -> evaluate, all seeded."""
    s = settings(args)
    model = load_model(_existing(s, "model"))
    out_dir = Path(_need(s, "out_dir"))
    mode = s.get("mode", "hybrid")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")
    sim = sim_config(s)
    truth, clean = simulate_trajectory(model, sim)
    noisy = inject(clean, error_spec(s), sim.seed + 1_000_003, model)
    events = abstract(noisy, AbstractionConfig.from_log(noisy, s.get("close_open_tail", True)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result, used = correct(events, model, mode, None, _policy(s), penalty_config(s),
                               tuple(s.get("order", ("rules", "pm"))),
                               s.get("default_method", "pct2.5"), s.get("rule_methods"),
                               s.get("confirm_max_support"))
    report = change_report(events, result)
    files = {
        "truth.csv": format_event_csv(truth),
        "meta.csv": format_meta_csv(clean.meta),
        "sensors_clean.csv": format_sensor_csv(clean),
        "sensors.csv": format_sensor_csv(noisy),
        "events.csv": format_event_csv(events),
        "corrected.csv": format_event_csv(result.corrected),
        "edits.csv": format_edits_csv(result.edits),
        "report.csv": report.to_csv(),
        "days.csv": report.days_csv(),
        "report.txt": report.to_text(),
        "metrics_abstracted.json": _metrics_json(evaluate(events, truth, model)),
        "metrics.json": _metrics_json(evaluate(result.corrected, truth, model)),
    }
    if used:
        files["rules.txt"] = format_rules(used)
    for name, text in files.items():
        write_text(out_dir / name, text)
    sys.stdout.write(report.to_text())
    sys.stdout.write(files["metrics.json"])
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_penalty(p):
    g = p.add_argument_group("penalties")
    g.add_argument("--insert-cost", dest="insert_cost", type=float)
    g.add_argument("--remove-base", dest="remove_base", type=float)
    g.add_argument("--remove-per-support", dest="remove_per_support", type=float)
    g.add_argument("--max-consecutive-insertions", dest="max_consecutive_insertions", type=int)


def _add_rules(p):
    g = p.add_argument_group("rules")
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--rules", help="rules file; derived from the log when omitted")
    g.add_argument("--policy", choices=[a.value for a in Action])
    g.add_argument("--interactive", action="store_true", default=None,
                   help="confirm each flagged event on the terminal")
    g.add_argument("--order", type=lambda t: t.split(","),
                   help="stage order for hybrid mode, e.g. pm,rules")
    g.add_argument("--default-method", dest="default_method", choices=["mean2std", "pct2.5"])
    g.add_argument("--confirm-max-support", dest="confirm_max_support", type=int,
                   help="only resolve flagged events with at most this many readings")


def _add_sim(p):
    g = p.add_argument_group("simulation")
    g.add_argument("--seed", type=int)
    g.add_argument("--horizon", type=int, help="seconds")
    g.add_argument("--pir-period", dest="pir_period", type=int)
    g.add_argument("--default-median", dest="default_median", type=float)
    g.add_argument("--default-sigma", dest="default_sigma", type=float)


def _add_errors(p):
    g = p.add_argument_group("errors")
    g.add_argument("--p-miss", dest="p_miss", type=float)
    g.add_argument("--p-noise", dest="p_noise", type=float)
    g.add_argument("--jitter", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homelog",
        description="Abstract, validate and repair smart-home location event logs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", help="TOML config file; flags override its values")
        p.set_defaults(func=func)
        return p

    p = command("abstract", cmd_abstract, "sensor CSV + meta CSV -> event CSV")
    p.add_argument("sensors", nargs="?")
    p.add_argument("meta", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("--no-close-tail", dest="close_open_tail", action="store_false", default=None)

    p = command("validate", cmd_validate, "check transitions of an event CSV")
    p.add_argument("events", nargs="?")
    p.add_argument("model", nargs="?")

    p = command("derive-rules", cmd_derive_rules, "duration thresholds from an event CSV")
    p.add_argument("events", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("--default-method", dest="default_method", choices=["mean2std", "pct2.5"])
    p.add_argument("--method", action="append", default=[], metavar="LOCATION=METHOD")

    p = command("repair", cmd_repair, "repair an event CSV")
    p.add_argument("events", nargs="?")
    p.add_argument("model", nargs="?")
    p.add_argument("-o", "--out-dir", dest="out_dir")
    _add_rules(p)
    _add_penalty(p)

    p = command("simulate", cmd_simulate, "ground-truth trajectory and clean sensor log")
    p.add_argument("model", nargs="?")
    p.add_argument("-o", "--out-dir", dest="out_dir")
    _add_sim(p)

    p = command("inject", cmd_inject, "add missed readings, noise and jitter to a sensor CSV")
    p.add_argument("sensors", nargs="?")
    p.add_argument("meta", nargs="?")
    p.add_argument("model", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("--seed", type=int)
    _add_errors(p)

    p = command("evaluate", cmd_evaluate, "score a corrected event CSV against the truth")
    p.add_argument("corrected")
    p.add_argument("truth")
    p.add_argument("--model")
    p.add_argument("-o", "--output")

    p = command("run", cmd_run, "seeded simulate -> inject -> abstract -> repair -> evaluate")
    p.add_argument("model", nargs="?")
    p.add_argument("-o", "--out-dir", dest="out_dir")
    _add_sim(p)
    _add_errors(p)
    _add_rules(p)
    _add_penalty(p)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "method", None):
        extra = {}
        for item in args.method:
            loc, sep, method = item.partition("=")
            if not sep:
                parser.error(f"--method expects LOCATION=METHOD, got {item!r}")
            extra[loc] = method
        args.rule_methods = extra
    try:
        return args.func(args)
    except (InfeasibleRepairError, DisconnectedModelError) as exc:
        print(f"homelog: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParseError, ConfigurationError, InvalidInputError, UsageError, ValueError) as exc:
        print(f"homelog: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"homelog: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
