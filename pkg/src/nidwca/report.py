"""Detection metrics, threshold sweeps and the three-classifier experiment."""
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import Label
from .errors import DatasetError, DimensionError, OutputError
from .ga import derive_seed
from .kdd import Category, fuzzify_many, fit_normalizer
from .tree import TreeConfig, build_tree, classify_many

CURVE_HEADER = "threshold,detection_rate,false_positive_rate,precision,accuracy"
GRID = tuple(i / 100 for i in range(101))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def _ratio(num, den):
    return num / den if den else 0.0


@dataclass(frozen=True)
class Metrics:
    detection_rate: float
    false_positive_rate: float
    precision: float
    accuracy: float


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    metrics: Metrics
    counts: ConfusionCounts = None


def _as_attack(values):
    return np.array([int(Label.coerce(v)) for v in values], dtype=bool)


def confusion(predictions, truths):
    if len(predictions) != len(truths):
        raise DimensionError(f"{len(predictions)} predictions for {len(truths)} truths")
    p = _as_attack(predictions)
    t = _as_attack(truths)
    return ConfusionCounts(int((p & t).sum()), int((p & ~t).sum()),
                           int((~p & ~t).sum()), int((~p & t).sum()))


def metrics(c):
    return Metrics(_ratio(c.tp, c.tp + c.fn), _ratio(c.fp, c.fp + c.tn),
                   _ratio(c.tp, c.tp + c.fp), _ratio(c.tp + c.tn, c.total))


def sweep_threshold(scores, truths, grid=GRID):
    if len(scores) != len(truths):
        raise DimensionError(f"{len(scores)} scores for {len(truths)} truths")
    grid = list(grid)
    if not grid:
        raise ValueError("threshold grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("threshold grid must be sorted ascending")
    s = np.asarray(scores, dtype=np.float64)
    t = _as_attack(truths)
    points = []
    for thr in grid:
        p = s >= thr
        c = ConfusionCounts(int((p & t).sum()), int((p & ~t).sum()),
                            int((~p & ~t).sum()), int((~p & t).sum()))
        points.append(CurvePoint(float(thr), metrics(c), c))
    return points


def best_point(curve):
    """Maximal DR - FPR, ties to the lower threshold."""
    return min(curve, key=lambda p: (-(p.metrics.detection_rate - p.metrics.false_positive_rate),
                                     p.threshold))


# ---------------------------------------------------------------- experiment

DEFAULT_TARGETS = (
    ("classifier_I", (Category.DOS,)),
    ("classifier_II", (Category.PROBE,)),
    ("classifier_III", (Category.R2L, Category.U2R)),
)


@dataclass(frozen=True)
class ExperimentPlan:
    classifier_targets: tuple = DEFAULT_TARGETS
    tree: TreeConfig = TreeConfig()
    seed: int = 0

    def __post_init__(self):
        targets = tuple((name, tuple(Category(c) if not isinstance(c, Category) else c
                                     for c in cats))
                        for name, cats in self.classifier_targets)
        if not targets:
            raise ValueError("an experiment needs at least one classifier target")
        seen = set()
        for name, cats in targets:
            if not cats or Category.NORMAL in cats:
                raise ValueError(f"target {name!r} needs attack categories only")
            if seen & set(cats):
                raise ValueError("classifier targets must be disjoint")
            seen |= set(cats)
        if len({n for n, _ in targets}) != len(targets):
            raise ValueError("classifier names must be unique")
        object.__setattr__(self, "classifier_targets", targets)


@dataclass
class ClassifierResult:
    name: str
    positives: tuple
    train_seconds: float
    curve: list
    n_train: int
    n_test: int

    @property
    def best(self):
        return best_point(self.curve)

    @property
    def curve_file(self):
        return f"{self.name}.csv"


@dataclass
class ExperimentReport:
    config: dict
    input_digests: dict
    classifiers: list = field(default_factory=list)

    def summary(self, include_timing=True):
        rows = []
        for c in self.classifiers:
            b = c.best
            rows.append({
                "name": c.name,
                "train_seconds": round(c.train_seconds, 3) if include_timing else None,
                "curve_file": c.curve_file,
                "best": {"threshold": b.threshold,
                         "detection_rate": b.metrics.detection_rate,
                         "false_positive_rate": b.metrics.false_positive_rate},
            })
        return {"config": self.config, "input_digests": self.input_digests,
                "classifiers": rows}

    def canonical(self, include_timing=False):
        """Deterministic text form; wall-clock fields are dropped unless asked for."""
        body = {"summary": self.summary(include_timing),
                "curves": {c.name: curve_csv(c.curve) for c in self.classifiers}}
        return json.dumps(body, sort_keys=True, indent=1)


def curve_csv(curve):
    lines = [CURVE_HEADER]
    for p in curve:
        m = p.metrics
        lines.append(f"{p.threshold:.6f},{m.detection_rate:.6f},{m.false_positive_rate:.6f},"
                     f"{m.precision:.6f},{m.accuracy:.6f}")
    return "\n".join(lines) + "\n"


def parse_curve_csv(text):
    lines = text.split("\n")
    if lines[0] != CURVE_HEADER:
        raise ValueError("unexpected curve header")
    rows = []
    for line in lines[1:]:
        if line:
            t, dr, fpr, prec, acc = (float(v) for v in line.split(","))
            rows.append((t, Metrics(dr, fpr, prec, acc)))
    return rows


def array_digest(states, labels):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(states, dtype="<f8").tobytes())
    if labels is not None:
        h.update(np.ascontiguousarray(labels, dtype=np.int8).tobytes())
    return h.hexdigest()


def config_echo(tree_config, plan=None, seed=None):
    t = tree_config
    echo = {
        "tree": {"impurity_threshold": t.impurity_threshold, "min_split": t.min_split,
                 "max_depth": t.max_depth, "mode": t.mode.value},
        "ga": {k: v for k, v in asdict(t.ga).items() if k != "seed"},
        "evolution": asdict(t.evolution),
        "seed": t.ga.seed if seed is None else seed,
    }
    if plan is not None:
        echo["plan"] = {"targets": [[name, [c.value for c in cats]]
                                    for name, cats in plan.classifier_targets]}
    return echo


def _binary_subset(records, positives, taxonomy):
    keep, labels = [], []
    for r in records:
        cat = r.category_in(taxonomy)
        if cat is Category.NORMAL or cat in positives:
            keep.append(r)
            labels.append(int(cat in positives))
    return keep, np.array(labels, dtype=np.int8)


def run_experiment(train_records, test_records, plan=ExperimentPlan(), taxonomy=None,
                   input_digests=None, backend=None):
    """Train and evaluate one basin tree per classifier target.

    Each target sees Normal records plus its positive categories; the
    normalizer is fitted on that target's training subset only.
    """
    from .kdd import load_taxonomy
    taxonomy = taxonomy if taxonomy is not None else load_taxonomy()
    train_records = list(train_records)
    test_records = list(test_records)
    if any(r.label is None for r in train_records + test_records):
        raise DatasetError("the experiment needs labeled training and test records")
    present = {r.category_in(taxonomy) for r in train_records}
    for name, cats in plan.classifier_targets:
        missing = [c.display for c in cats if c not in present]
        if missing:
            raise DatasetError(f"{name}: categor{'y' if len(missing) == 1 else 'ies'} "
                               f"{', '.join(missing)} absent from the training data")
    if Category.NORMAL not in present:
        raise DatasetError("no Normal records in the training data")

    digests = dict(input_digests or {})
    report = ExperimentReport(config_echo(plan.tree, plan, plan.seed), digests)
    for index, (name, cats) in enumerate(plan.classifier_targets):
        train, y_train = _binary_subset(train_records, cats, taxonomy)
        test, y_test = _binary_subset(test_records, cats, taxonomy)
        norm = fit_normalizer(train)
        x_train = fuzzify_many(train, norm)
        x_test = fuzzify_many(test, norm)
        cfg = replace(plan.tree, ga=replace(plan.tree.ga, seed=derive_seed(plan.seed, index)))
        t0 = time.perf_counter()
        tree = build_tree((x_train, y_train), cfg, backend)
        elapsed = time.perf_counter() - t0
        verdicts = classify_many(x_test, tree, backend=backend) if len(test) else []
        curve = sweep_threshold([v.score for v in verdicts], y_test.tolist(), GRID)
        if not input_digests:
            digests[f"{name}.train"] = array_digest(x_train, y_train)
            digests[f"{name}.test"] = array_digest(x_test, y_test)
        report.classifiers.append(ClassifierResult(name, cats, elapsed, curve,
                                                   len(train), len(test)))
    return report


def emit_report(report, out_dir):
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for c in report.classifiers:
            path = out / c.curve_file
            with open(path, "w", newline="\n") as fh:
                fh.write(curve_csv(c.curve))
            written.append(path)
        path = out / "summary.json"
        with open(path, "w", newline="\n") as fh:
            fh.write(json.dumps(report.summary(), sort_keys=True, indent=2) + "\n")
        written.append(path)
    except OSError as exc:
        raise OutputError(f"cannot write report to {out}: {exc}") from exc
    return written
