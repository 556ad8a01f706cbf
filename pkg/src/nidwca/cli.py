"""Command-line front end.

Exit status: 0 success, 1 data/model/config error, 2 usage error.  Errors
are printed to stderr as one line: ``nidwca-error: <Kind>: <message>``.
"""
import argparse
import sys

import numpy as np

from . import __version__
from .config import load_config
from .dataset import Label, Mode
from .errors import DatasetError, NidwcaError
from .kdd import (Category, SyntheticSpec, file_digest, fit_normalizer, fuzzify_many,
                  generate_synthetic, load_taxonomy, parse_record, read_records,
                  synthetic_to_records, taxonomy_digest, write_records, N_FEATURES)
from .model_io import ModelFile, load_model, save_model
from .report import (ClassifierResult, ExperimentReport, GRID, config_echo, emit_report,
                     run_experiment, sweep_threshold)
from .rules import build_dependency_matrix, format_dependency_matrix
from .tree import build_tree, classify_many


def _parser():
    p = argparse.ArgumentParser(prog="nidwca", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nidwca {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, taxonomy=True):
        if taxonomy:
            sp.add_argument("--taxonomy", help="label/category table overriding the bundled one")

    t = sub.add_parser("train", help="train a basin tree and write a model file")
    t.add_argument("--data", required=True)
    t.add_argument("--config")
    t.add_argument("--seed", type=int)
    t.add_argument("--mode", choices=[m.value for m in Mode])
    t.add_argument("--out", required=True)
    common(t)

    e = sub.add_parser("evaluate", help="run the classifier experiment, or score a model")
    e.add_argument("--data", help="training records (experiment mode)")
    e.add_argument("--test", required=True)
    e.add_argument("--model", help="evaluate an existing model instead of training")
    e.add_argument("--config")
    e.add_argument("--seed", type=int)
    e.add_argument("--out", required=True)
    common(e)

    c = sub.add_parser("classify", help="one verdict line per input record")
    c.add_argument("--model", required=True)
    c.add_argument("--data", help="records file (default: stdin)")
    c.add_argument("--threshold", type=float, default=0.5)

    i = sub.add_parser("inspect", help="human-readable dump of a model")
    i.add_argument("--model", required=True)

    g = sub.add_parser("gen-synthetic", help="write a two-cluster dataset in KDD format")
    g.add_argument("--out", required=True)
    g.add_argument("--n-normal", type=int, default=500)
    g.add_argument("--n-attack", type=int, default=500)
    g.add_argument("--spread", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--attack-label", default="smurf")
    return p


def _labels_for(records, taxonomy):
    return np.array([int(r.category_in(taxonomy) is not Category.NORMAL) for r in records],
                    dtype=np.int8)


def cmd_train(args):
    run = load_config(args.config, args.seed, args.mode)
    taxonomy = load_taxonomy(args.taxonomy)
    records = read_records(args.data)
    if not records:
        raise DatasetError(f"{args.data} holds no records")
    labels = None
    if run.tree.mode is Mode.LABELED:
        if any(r.label is None for r in records):
            raise DatasetError("labeled training needs a label on every record")
        labels = _labels_for(records, taxonomy)
    norm = fit_normalizer(records)
    states = fuzzify_many(records, norm)
    tree = build_tree((states, labels), run.tree)
    model = ModelFile(tree=tree, normalizer=norm, taxonomy_digest=taxonomy_digest(args.taxonomy),
                      mode=run.tree.mode, config=config_echo(run.tree), seed=run.seed)
    save_model(model, args.out)
    print(f"wrote {args.out}: {sum(1 for _ in tree.iter_nodes())} node(s), "
          f"{len(tree.basins)} root basin(s)")
    return 0


def cmd_evaluate(args):
    taxonomy = load_taxonomy(args.taxonomy)
    test = read_records(args.test, labeled=True)
    if args.model:
        model = load_model(args.model)
        states = fuzzify_many(test, model.normalizer)
        truth = _labels_for(test, taxonomy)
        scores = [v.score for v in classify_many(states, model.tree)] if test else []
        report = ExperimentReport(model.config, {"test": file_digest(args.test),
                                                 "model": file_digest(args.model)})
        report.classifiers.append(ClassifierResult(
            "model", (), 0.0, sweep_threshold(scores, truth.tolist(), GRID), 0, len(test)))
    else:
        if not args.data:
            raise DatasetError("evaluate needs --data (training records) or --model")
        run = load_config(args.config, args.seed)
        train = read_records(args.data, labeled=True)
        digests = {"train": file_digest(args.data), "test": file_digest(args.test)}
        report = run_experiment(train, test, run.plan, taxonomy, digests)
    for path in emit_report(report, args.out):
        print(f"wrote {path}")
    return 0


def _verdict_line(v, tree):
    positions = []
    node = tree
    for basin in v.path:
        if node is not None and basin in node.basins:
            positions.append(str(node.basin_position(basin)))
            node = node.children.get(basin)
        else:
            positions.append("?")
            node = None
    path = "/".join(positions) + ("~" if v.fallback else "")
    label = "attack" if v.label is Label.ATTACK else "normal"
    return f"{label},{v.score:.6f},{path}"


def cmd_classify(args):
    model = load_model(args.model)
    if args.data:
        records = read_records(args.data)
        if records:
            states = fuzzify_many(records, model.normalizer)
            for v in classify_many(states, model.tree, args.threshold):
                print(_verdict_line(v, model.tree))
        return 0
    for n, line in enumerate(sys.stdin, 1):
        if not line.strip():
            continue
        rec = parse_record(line, line.count(",") == N_FEATURES, n)
        state = fuzzify_many([rec], model.normalizer)
        v = classify_many(state, model.tree, args.threshold)[0]
        print(_verdict_line(v, model.tree), flush=True)
    return 0


def cmd_inspect(args):
    model = load_model(args.model)
    print(f"model format {model.format_version}, mode {model.mode.value}, seed {model.seed}")
    print(f"taxonomy digest {model.taxonomy_digest}")
    stack = [("root", model.tree)]
    while stack:
        name, node = stack.pop(0)
        print()
        print(f"== node {name} (depth {node.depth}) ==")
        print(f"rule vector: {node.chromosome}")
        print(f"feature order: {' '.join(str(v) for v in node.feature_order)}")
        print("dependency matrix:")
        print(format_dependency_matrix(build_dependency_matrix(node.chromosome)))
        print("basins:")
        print("  idx  n_total  n_attack     r_q  label   cycle  child")
        for j, b in enumerate(node.sorted_basins):
            s = node.basins[b]
            child = f"{name}/{j}" if b in node.children else "-"
            cycle = "overflow" if b.is_overflow else str(b.cycle_length)
            print(f"  {j:3d}  {s.n_total:7d}  {s.n_attack:8d}  {s.r_q:.4f}  "
                  f"{s.label.value:6s}  {cycle:>6s}  {child}")
        for j, b in enumerate(node.sorted_basins):
            if b in node.children:
                stack.append((f"{name}/{j}", node.children[b]))
    return 0


def cmd_gen_synthetic(args):
    spec = SyntheticSpec.random_centers(args.n_normal, args.n_attack, args.spread, args.seed)
    records = synthetic_to_records(generate_synthetic(spec), args.attack_label)
    write_records(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "classify": cmd_classify,
    "inspect": cmd_inspect,
    "gen-synthetic": cmd_gen_synthetic,
}


def run_command(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except NidwcaError as exc:
        msg = " ".join(str(exc).split())
        print(f"nidwca-error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command())
