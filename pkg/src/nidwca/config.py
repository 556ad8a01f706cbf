"""Run configuration: JSON file with the same layout as a report's config echo."""
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .dataset import Mode
from .engine import EvolutionParams
from .errors import ConfigError
from .ga import GaConfig
from .report import DEFAULT_TARGETS, ExperimentPlan
from .tree import TreeConfig

UNLABELED_TARGET_BASINS = 8

_SECTIONS = {"tree", "ga", "evolution", "seed", "plan"}


@dataclass(frozen=True)
class RunConfig:
    tree: TreeConfig
    plan: ExperimentPlan
    seed: int


def default_tree_config(mode=Mode.LABELED):
    mode = Mode(mode)
    if mode is Mode.UNLABELED:
        return TreeConfig(mode=mode, ga=GaConfig(target_basins_k=UNLABELED_TARGET_BASINS))
    return TreeConfig()


def _section(cls, values, name, base):
    if not isinstance(values, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(unknown))}")
    try:
        return replace(base, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name!r} section: {exc}") from exc


def parse_config(data, seed=None, mode=None):
    """Validate a config mapping; command-line ``seed`` / ``mode`` take precedence."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    tree_raw = data.get("tree", {})
    if not isinstance(tree_raw, dict):
        raise ConfigError("config section 'tree' must be an object")
    stray = set(tree_raw) - {"impurity_threshold", "min_split", "max_depth", "mode"}
    if stray:
        raise ConfigError(f"unknown keys in 'tree': {', '.join(sorted(stray))}")
    tree_raw = dict(tree_raw)
    if mode is not None:
        tree_raw["mode"] = mode
    try:
        chosen_mode = Mode(tree_raw.get("mode", Mode.LABELED.value))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    base = default_tree_config(chosen_mode)
    ga_raw = data.get("ga", {})
    if "seed" in ga_raw:
        raise ConfigError("put the seed at the top level, not inside 'ga'")
    ga = _section(GaConfig, ga_raw, "ga", base.ga)
    evolution = _section(EvolutionParams, data.get("evolution", {}), "evolution", base.evolution)
    if seed is None:
        seed = data.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    tree_raw["mode"] = chosen_mode
    tree = _section(TreeConfig, tree_raw, "tree",
                    replace(base, ga=replace(ga, seed=seed), evolution=evolution))
    targets = DEFAULT_TARGETS
    if "plan" in data:
        plan_raw = data["plan"]
        if not isinstance(plan_raw, dict) or set(plan_raw) - {"targets"}:
            raise ConfigError("plan section accepts only 'targets'")
        targets = plan_raw.get("targets", DEFAULT_TARGETS)
    try:
        plan = ExperimentPlan(tuple((str(n), tuple(c)) for n, c in targets), tree, seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid plan: {exc}") from exc
    return RunConfig(tree, plan, seed)


def load_config(path=None, seed=None, mode=None):
    if path is None:
        return parse_config({}, seed, mode)
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data, seed, mode)
