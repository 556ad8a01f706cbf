"""Canonical JSON persistence of trained basin trees.

Keys are sorted, separators fixed, integral floats are written as integers
and every other float is rounded to 9 significant digits, so saving the
same model twice yields the same bytes.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .dataset import Mode
from .engine import BasinId, EvolutionParams
from .errors import CorruptModelError, ModelLoadError, ModelVersionError, OutputError, SchemaError
from .kdd import Normalizer
from .rules import RuleId, RuleVector
from .tree import BasinStats, TreeNode

FORMAT_VERSION = 1


@dataclass
class ModelFile:
    tree: TreeNode
    normalizer: Normalizer = None
    taxonomy_digest: str = ""
    mode: Mode = Mode.LABELED
    config: dict = None
    seed: int = 0
    format_version: int = FORMAT_VERSION


def _canon(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite value in model")
        if obj.is_integer() and abs(obj) < 2**53:
            return int(obj)
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def node_to_dict(node):
    ordered = node.sorted_basins
    position = {b: i for i, b in enumerate(ordered)}
    return {
        "codes": [r.code for r in node.chromosome.rules],
        "complemented": [int(r.complemented) for r in node.chromosome.rules],
        "feature_order": list(node.feature_order),
        "depth": node.depth,
        "basins": [{
            "fingerprint": list(b.fingerprint),
            "cycle_length": b.cycle_length,
            "n_total": node.basins[b].n_total,
            "n_attack": node.basins[b].n_attack,
            "r_q": node.basins[b].r_q,
        } for b in ordered],
        "children": [{"basin": position[b], "node": node_to_dict(node.children[b])}
                     for b in sorted(node.children)],
    }


def node_from_dict(d, mode, evolution):
    rules = RuleVector(tuple(RuleId(int(c), bool(f))
                             for c, f in zip(d["codes"], d["complemented"], strict=True)))
    order = tuple(int(v) for v in d["feature_order"])
    if sorted(order) != list(range(rules.n_cells)):
        raise SchemaError("feature_order is not a permutation of the cells")
    ordered = []
    raw = []
    for b in d["basins"]:
        bid = BasinId(tuple(int(v) for v in b["fingerprint"]), int(b["cycle_length"]))
        if not bid.is_overflow and len(bid.fingerprint) != rules.n_cells:
            raise SchemaError("basin fingerprint length differs from the rule vector")
        ordered.append(bid)
        raw.append(b)
    if mode is Mode.LABELED:
        basins = {bid: BasinStats.labeled(bid, int(b["n_total"]), int(b["n_attack"]))
                  for bid, b in zip(ordered, raw)}
    else:
        n_largest = max((int(b["n_total"]) for b in raw), default=0)
        basins = {bid: BasinStats.unlabeled(bid, int(b["n_total"]), n_largest)
                  for bid, b in zip(ordered, raw)}
    node = TreeNode(rules, order, basins, {}, int(d["depth"]), mode, evolution)
    for child in d["children"]:
        node.children[ordered[int(child["basin"])]] = node_from_dict(child["node"], mode, evolution)
    return node


def model_to_dict(model):
    return {
        "format_version": model.format_version,
        "mode": model.mode.value,
        "seed": model.seed,
        "config": model.config or {},
        "normalizer": None if model.normalizer is None else model.normalizer.as_dict(),
        "taxonomy_digest": model.taxonomy_digest,
        "tree": node_to_dict(model.tree),
    }


def dumps_model(model):
    return json.dumps(_canon(model_to_dict(model)), sort_keys=True,
                      separators=(",", ":"), ensure_ascii=True) + "\n"


def save_model(model, path):
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(dumps_model(model))
    except OSError as exc:
        raise OutputError(f"cannot write model to {path}: {exc}") from exc


def loads_model(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(d, dict) or "format_version" not in d:
        raise SchemaError("model file lacks format_version")
    if d["format_version"] != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format_version {d['format_version']!r}; "
                                f"this build reads {FORMAT_VERSION}")
    try:
        mode = Mode(d["mode"])
        config = d["config"]
        evolution = EvolutionParams(**config["evolution"]) if "evolution" in config \
            else EvolutionParams(quantization_eps=1.0 / 8)
        norm = None if d["normalizer"] is None else Normalizer.from_dict(d["normalizer"])
        return ModelFile(
            tree=node_from_dict(d["tree"], mode, evolution),
            normalizer=norm,
            taxonomy_digest=str(d["taxonomy_digest"]),
            mode=mode,
            config=config,
            seed=int(d["seed"]),
            format_version=FORMAT_VERSION,
        )
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"model file violates the schema: {exc!r}") from exc


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelLoadError(f"cannot read model {path}: {exc.strerror or exc}") from exc
    return loads_model(text)
