"""Inverted basin tree: evolve a rule vector, distribute records into basins,
score each basin's malicious index and refine impure basins recursively.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Label, Mode, as_arrays
from .engine import OVERFLOW_BASIN, EvolutionParams, evolve_many
from .errors import DatasetError, DimensionError, ModeError
from .ga import GaConfig, derive_seed, evolve_population


@dataclass(frozen=True)
class BasinStats:
    basin: object
    n_total: int
    n_attack: int
    r_q: float
    label: Label

    @classmethod
    def labeled(cls, basin, n_total, n_attack):
        r_q = n_attack / n_total if n_total else 0.0
        return cls(basin, n_total, n_attack, r_q,
                   Label.ATTACK if r_q >= 0.5 else Label.NORMAL)

    @classmethod
    def unlabeled(cls, basin, n_total, n_largest):
        r_q = 1.0 - n_total / n_largest if n_largest else 1.0
        return cls(basin, n_total, 0, r_q, Label.ATTACK if r_q >= 0.5 else Label.NORMAL)

    @property
    def impurity(self):
        return min(self.r_q, 1.0 - self.r_q)


@dataclass(frozen=True)
class TreeConfig:
    impurity_threshold: float = 0.05
    min_split: int = 20
    max_depth: int = 4
    mode: Mode = Mode.LABELED
    ga: GaConfig = GaConfig()
    # coarser than the engine default: at 1/256 most trajectories of random
    # rule vectors never revisit a fingerprint within max_steps
    evolution: EvolutionParams = EvolutionParams(quantization_eps=1.0 / 8)

    def __post_init__(self):
        if not 0.0 <= self.impurity_threshold < 0.5:
            raise ValueError("impurity_threshold must lie in [0, 0.5)")
        if self.min_split < 0:
            raise ValueError("min_split must be >= 0")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass
class TreeNode:
    chromosome: object
    feature_order: tuple
    basins: dict
    children: dict = field(default_factory=dict)
    depth: int = 0
    mode: Mode = Mode.LABELED
    evolution: EvolutionParams = TreeConfig.evolution

    def __post_init__(self):
        self._index = None

    @property
    def n_cells(self):
        return self.chromosome.n_cells

    @property
    def sorted_basins(self):
        return sorted(self.basins)

    @property
    def n_largest(self):
        return max((s.n_total for s in self.basins.values()), default=0)

    def iter_nodes(self):
        yield self
        for b in sorted(self.children):
            yield from self.children[b].iter_nodes()

    def _lookup(self):
        if self._index is None:
            ordered = self.sorted_basins
            regular = [b for b in ordered if not b.is_overflow]
            fps = np.array([b.fingerprint for b in regular], dtype=np.int64).reshape(
                len(regular), self.n_cells)
            self._index = ({b: i for i, b in enumerate(ordered)}, regular, fps)
        return self._index

    def resolve(self, basin, fingerprint):
        """Map a landing basin to a training basin; returns (basin, used_fallback)."""
        if basin in self.basins:
            return basin, False
        _, regular, fps = self._lookup()
        if not regular:
            return OVERFLOW_BASIN, True
        dist = np.abs(fps - np.asarray(fingerprint, dtype=np.int64)).sum(axis=1)
        # regular is in BasinId order, so argmin's first-minimum rule breaks ties low
        return regular[int(np.argmin(dist))], True

    def basin_position(self, basin):
        return self._lookup()[0][basin]


@dataclass(frozen=True)
class Verdict:
    label: Label
    score: float
    path: tuple
    fallback: bool = False


def distribute(dataset, chromosome, evolution=EvolutionParams(), backend=None):
    """Group record indices by the basin their attractor falls in."""
    states = _states_only(dataset)
    if states.shape[0] == 0:
        return {}
    if states.shape[1] != chromosome.n_cells:
        raise DimensionError(f"records have {states.shape[1]} cells, "
                             f"chromosome has {chromosome.n_cells}")
    evo = evolve_many(states, chromosome, evolution, backend)
    groups = {}
    for i in range(len(evo)):
        groups.setdefault(evo.basin_id(i), []).append(i)
    return dict(sorted(groups.items()))


def _states_only(dataset):
    if isinstance(dataset, np.ndarray):
        return np.asarray(dataset, dtype=np.float64)
    states, _ = as_arrays(list(dataset))
    return states


def malicious_index(member_labels):
    labels = [Label.coerce(v) for v in member_labels]
    if not labels:
        return 0.0
    return sum(v is Label.ATTACK for v in labels) / len(labels)


def rank_features(states, labels):
    """Feature indices by decreasing |mean(attack) - mean(normal)|, ties to lower index."""
    attack = labels == 1
    if attack.all() or not attack.any():
        return np.arange(states.shape[1])
    gap = np.abs(states[attack].mean(axis=0) - states[~attack].mean(axis=0))
    return np.argsort(-gap, kind="stable")


def center_positions(n):
    """Cell positions ordered by distance from the lattice centre, ties to lower index."""
    return np.argsort(np.abs(np.arange(n) - (n - 1) / 2.0), kind="stable")


def reorder_features(states, labels):
    """Permutation placing the most discriminative features at the central cells."""
    ranked = rank_features(states, labels)
    order = np.empty(states.shape[1], dtype=np.int64)
    order[center_positions(states.shape[1])] = ranked
    return tuple(int(v) for v in order)


def build_tree(dataset, config=TreeConfig(), backend=None):
    states, labels = as_arrays(dataset)
    if states.shape[0] == 0:
        raise DatasetError("cannot build a tree from an empty dataset")
    if config.mode is Mode.LABELED and labels is None:
        raise ModeError("labeled mode needs a label on every record")
    if config.mode is Mode.UNLABELED:
        labels = None
    identity = tuple(range(states.shape[1]))
    return _build(states, labels, np.arange(states.shape[0]), identity, 0,
                  config.ga.seed, config, backend)


def _build(states, labels, idx, feature_order, depth, seed, config, backend):
    x = states[idx][:, list(feature_order)]
    y = labels[idx] if labels is not None else None
    ga = replace(config.ga, seed=seed)
    chromosome, _ = evolve_population((x, y), x.shape[1], ga, config.evolution, backend)
    evo = evolve_many(x, chromosome, config.evolution, backend)

    members = {}
    for i in range(len(evo)):
        members.setdefault(evo.basin_id(i), []).append(i)
    ordered = sorted(members)
    if y is None:
        n_largest = max(len(v) for v in members.values())
        basins = {b: BasinStats.unlabeled(b, len(members[b]), n_largest) for b in ordered}
    else:
        basins = {b: BasinStats.labeled(b, len(members[b]), int(y[members[b]].sum()))
                  for b in ordered}
    node = TreeNode(chromosome, tuple(feature_order), basins, {}, depth, config.mode,
                    config.evolution)

    if y is None or depth >= config.max_depth:
        return node
    for j, b in enumerate(ordered):
        stats = basins[b]
        if stats.impurity <= config.impurity_threshold or stats.n_total < config.min_split:
            continue
        sub = idx[np.asarray(members[b])]
        order = reorder_features(states[sub], labels[sub])
        node.children[b] = _build(states, labels, sub, order, depth + 1,
                                  derive_seed(seed, depth + 1, j), config, backend)
    return node


def _descend(states, tree, backend, evolution):
    """Yield (record index, leaf node, resolved basin, path, fallback) for every record."""
    out = [None] * states.shape[0]
    stack = [(tree, np.arange(states.shape[0]), [[] for _ in range(states.shape[0])],
              np.zeros(states.shape[0], dtype=bool))]
    while stack:
        node, idx, paths, fell_back = stack.pop()
        if idx.size == 0:
            continue
        x = states[idx][:, list(node.feature_order)]
        evo = evolve_many(x, node.chromosome, evolution, backend)
        routed = {}
        for j in range(idx.size):
            landed = evo.basin_id(j)
            if node.mode is Mode.UNLABELED and landed not in node.basins:
                out[idx[j]] = (node, None, tuple(paths[j] + [landed]), True)
                continue
            basin, fb = node.resolve(landed, evo.fingerprints[j])
            path = paths[j] + [basin]
            fb = bool(fell_back[j] or fb)
            if basin in node.children:
                routed.setdefault(basin, []).append((idx[j], path, fb))
            else:
                out[idx[j]] = (node, basin, tuple(path), fb)
        for basin, items in routed.items():
            stack.append((node.children[basin],
                          np.array([t[0] for t in items]),
                          [t[1] for t in items],
                          np.array([t[2] for t in items])))
    return out


def classify_many(states, tree, threshold=0.5, evolution=None, backend=None):
    """Verdicts for a batch of records.  Each verdict depends only on its own record."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if states.shape[1] != tree.n_cells:
        raise DimensionError(f"records have {states.shape[1]} cells, model has {tree.n_cells}")
    evolution = evolution or tree.evolution
    verdicts = []
    for node, basin, path, fb in _descend(states, tree, backend, evolution):
        score = 1.0 if basin is None else node.basins[basin].r_q
        verdicts.append(Verdict(Label.ATTACK if score >= threshold else Label.NORMAL,
                                score, path, fb))
    return verdicts


def classify(record, tree, threshold=0.5, evolution=None, backend=None):
    record = np.asarray(record, dtype=np.float64)
    if record.ndim != 1:
        raise DimensionError("classify takes a single record; use classify_many for batches")
    return classify_many(record[None, :], tree, threshold, evolution, backend)[0]


def anomaly_score(record, tree, evolution=None, backend=None):
    """1 - n(landing basin) / n(largest basin); unseen basins score 1."""
    if tree.mode is not Mode.UNLABELED:
        raise ModeError("anomaly_score needs a tree built in unlabeled mode")
    return classify(record, tree, 0.5, evolution, backend).score
