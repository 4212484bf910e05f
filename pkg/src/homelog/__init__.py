"""Location event logs from binary smart-home sensors: abstraction,
transition checks, and minimum-penalty / rule-based repair."""

from .abstraction import AbstractionConfig, abstract
from .conformance import (DisconnectedModelError, TransitionReport, load_model,
                          parse_model, shortest_connector, validate)
from .metrics_report import ChangeReport, change_report
from .model import (ConfigurationError, EditKind, EditOp, EventLog, HomelogError,
                    InvalidInputError, LocationEvent, Origin, RepairResult,
                    SensorKind, SensorLog, SensorMeta, SensorReading,
                    TransitionModel, fuse_adjacent)
from .repair_pm import (InfeasibleRepairError, PenaltyConfig,
                        brute_force_repair, repair)
from .repair_rules import (Action, DurationRule, ResolutionPolicy, RuleMethod,
                           derive_rules, flag, hybrid, resolve)
from .simulate import ErrorSpec, SimConfig, evaluate, inject, simulate_trajectory

__version__ = "0.1.0"
