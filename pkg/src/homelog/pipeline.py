"""End-to-end runs: simulate, corrupt, abstract, repair, score."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .abstraction import AbstractionConfig, abstract
from .conformance import validate
from .model import EventLog, RepairResult, SensorLog, TransitionModel
from .repair_pm import PenaltyConfig, repair
from .repair_rules import (DurationRule, ResolutionPolicy, RuleMethod,
                           confirm_by_support, derive_rules, flag, hybrid,
                           resolve)
from .simulate import (ErrorSpec, QualityMetrics, SimConfig, evaluate, inject,
                       simulate_trajectory)

MODES = ("pm", "rules", "hybrid")


def default_methods(log: EventLog, default: str = "pct2.5",
                    overrides: Optional[Mapping[str, str]] = None) -> dict[str, RuleMethod]:
    methods = {loc: RuleMethod(default) for loc in set(log.locations)}
    for loc, m in (overrides or {}).items():
        methods[loc] = RuleMethod(m)
    return methods


def correct(log: EventLog, model: TransitionModel, mode: str = "hybrid",
            rules: Optional[Sequence[DurationRule]] = None,
            policy: Optional[ResolutionPolicy] = None,
            cfg: Optional[PenaltyConfig] = None,
            order: Sequence[str] = ("rules", "pm"),
            default_method: str = "pct2.5",
            rule_methods: Optional[Mapping[str, str]] = None,
            confirm_max_support: Optional[int] = None) -> tuple[RepairResult, list]:
    """Repair ``log`` in one of the three modes; returns ``(result, rules used)``.

    When ``rules`` is None and the mode needs them, they are derived from
    ``log`` itself. ``confirm_max_support`` keeps flagged events that rest on
    more readings than that.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    policy = policy or ResolutionPolicy()
    cfg = cfg or PenaltyConfig()
    if mode == "pm":
        return repair(log, model, cfg), []
    if rules is None:
        rules = derive_rules(log, default_methods(log, default_method, rule_methods))
    confirm = None if confirm_max_support is None else confirm_by_support(confirm_max_support)
    if mode == "rules":
        return resolve(log, flag(log, rules), policy, model, cfg, confirm), list(rules)
    return hybrid(log, rules, policy, model, cfg, order, confirm), list(rules)


@dataclass(frozen=True)
class RunOutput:
    truth: EventLog
    clean: SensorLog
    noisy: SensorLog
    abstracted: EventLog
    result: RepairResult
    rules: tuple
    raw_metrics: QualityMetrics
    metrics: QualityMetrics


def run(model: TransitionModel, sim: SimConfig, errors: ErrorSpec,
        mode: str = "hybrid", **kwargs) -> RunOutput:
    """One seeded simulate -> inject -> abstract -> repair -> evaluate pass.

    The injection seed is derived from ``sim.seed`` so a single seed fixes
    the whole run.
    """
    truth, clean = simulate_trajectory(model, sim)
    noisy = inject(clean, errors, seed=sim.seed + 1_000_003, model=model)
    events = abstract(noisy, AbstractionConfig.from_log(noisy))
    result, rules = correct(events, model, mode, **kwargs)
    raw = evaluate(events, truth, model)
    fixed = evaluate(result.corrected, truth, model)
    return RunOutput(truth, clean, noisy, events, result, tuple(rules), raw, fixed)


def residual_invalid_rate(log: EventLog, model: TransitionModel) -> float:
    return validate(log, model).invalid_rate
