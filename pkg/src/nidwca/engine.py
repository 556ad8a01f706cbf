"""Synchronous null-boundary FCA evolution, attractors and basin identifiers."""
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from . import kernels
from .errors import DimensionError
from .rules import RuleVector


@dataclass(frozen=True)
class EvolutionParams:
    max_steps: int = 64
    quantization_eps: float = 1.0 / 256
    max_cycle_len: int = 16

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if not 0.0 < self.quantization_eps < 1.0:
            raise ValueError("quantization_eps must lie in (0, 1)")
        if not 1 <= self.max_cycle_len <= self.max_steps:
            raise ValueError("max_cycle_len must be in [1, max_steps]")


@dataclass(frozen=True)
class AttractorResult:
    """Where a trajectory settled.

    ``attractor_state`` is the cycle member with the lexicographically
    smallest fingerprint.  Truncated runs carry the last visited state and
    ``cycle_length == 1``.
    """

    attractor_state: np.ndarray
    cycle_length: int
    transient_length: int
    truncated: bool
    fingerprint: tuple = None


@total_ordering
@dataclass(frozen=True)
class BasinId:
    fingerprint: tuple
    cycle_length: int

    @property
    def is_overflow(self):
        return self.cycle_length == 0

    def sort_key(self):
        return (self.cycle_length == 0, self.fingerprint, self.cycle_length)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def l1(self, other):
        return sum(abs(a - b) for a, b in zip(self.fingerprint, other.fingerprint))


# reserved basin for runs that hit max_steps or exceed max_cycle_len
OVERFLOW_BASIN = BasinId((), 0)


def _as_rules(rules):
    return rules if isinstance(rules, RuleVector) else RuleVector(tuple(rules))


def _as_state(state, n_cells):
    x = np.asarray(state, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n_cells:
        raise DimensionError(f"state has shape {x.shape}, rule vector has {n_cells} cells")
    if np.any((x < 0.0) | (x > 1.0)) or not np.all(np.isfinite(x)):
        raise ValueError("state components must lie in [0, 1]")
    return x


def step(state, rules, backend=None):
    rules = _as_rules(rules)
    x = _as_state(state, rules.n_cells)
    return kernels.step_batch(x[None, :], rules.genes, backend)[0]


def evolve_to_attractor(state, rules, params=EvolutionParams(), backend=None):
    rules = _as_rules(rules)
    x = _as_state(state, rules.n_cells)
    att, fp, cyc, trans, trunc = kernels.evolve_batch(
        x[None, :], rules.genes, params.max_steps, params.quantization_eps,
        params.max_cycle_len, backend)
    return AttractorResult(
        attractor_state=att[0],
        cycle_length=int(cyc[0]),
        transient_length=int(trans[0]),
        truncated=bool(trunc[0]),
        fingerprint=tuple(int(v) for v in fp[0]),
    )


def basin_fingerprint(result, params=EvolutionParams()):
    if result.truncated:
        return OVERFLOW_BASIN
    q = np.rint(np.asarray(result.attractor_state) / params.quantization_eps).astype(np.int64)
    return BasinId(tuple(int(v) for v in q), int(result.cycle_length))


@dataclass
class BatchEvolution:
    """Attractor data for many records evolved under one rule vector."""

    attractors: np.ndarray
    fingerprints: np.ndarray
    cycle_lengths: np.ndarray
    transients: np.ndarray
    truncated: np.ndarray

    def __len__(self):
        return self.attractors.shape[0]

    def basin_id(self, i):
        if self.truncated[i]:
            return OVERFLOW_BASIN
        return BasinId(tuple(int(v) for v in self.fingerprints[i]), int(self.cycle_lengths[i]))

    def keys(self):
        """One int64 row per record: fingerprint then cycle length (overflow rows are -1)."""
        k = np.empty((len(self), self.fingerprints.shape[1] + 1), dtype=np.int64)
        k[:, :-1] = self.fingerprints
        k[:, -1] = self.cycle_lengths
        k[self.truncated] = -1
        return k


def evolve_many(states, rules, params=EvolutionParams(), backend=None):
    rules = _as_rules(rules)
    x = np.asarray(states, dtype=np.float64)
    if x.ndim != 2:
        if x.size == 0:
            x = x.reshape(0, rules.n_cells)
        else:
            raise DimensionError("states must be a 2-D array of records")
    if x.shape[1] != rules.n_cells:
        raise DimensionError(f"records have {x.shape[1]} cells, rule vector has {rules.n_cells}")
    return BatchEvolution(*kernels.evolve_batch(
        x, rules.genes, params.max_steps, params.quantization_eps,
        params.max_cycle_len, backend))


def group_rows(keys):
    """Group identical int64 rows.  Returns (inverse, counts) with arbitrary group order."""
    keys = np.ascontiguousarray(keys)
    if keys.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    view = keys.view(np.dtype((np.void, keys.dtype.itemsize * keys.shape[1]))).ravel()
    _, inverse, counts = np.unique(view, return_inverse=True, return_counts=True)
    return inverse.ravel(), counts
