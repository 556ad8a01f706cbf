"""Fuzzy CA rule alphabet, local next-state function and dependency matrices.

Every rule in the alphabet is a bounded sum (fuzzy OR) over some subset of
the 3-neighbourhood ``(left, self, right)``, optionally complemented.  The
Wolfram number of a non-complemented rule is the bitwise OR of the numbers of
the single-neighbour rules it reads: 240 (left), 204 (self), 170 (right).

Fuzzy connectives: ``OR(a, b) = min(1, a + b)``, ``NOT(a) = 1 - a``,
``AND(a, b) = a * b``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, UnknownRuleError

LEFT, SELF, RIGHT = 240, 204, 170

# Non-complemented codes in gene order; gene = 2 * position + complemented.
CODES = (0, 170, 204, 238, 240, 250, 252, 254)
N_GENES = 2 * len(CODES)

_CODE_INDEX = {c: i for i, c in enumerate(CODES)}
_COMPLEMENT_INDEX = {255 - c: i for i, c in enumerate(CODES)}


def fuzzy_or(*values):
    return min(1.0, sum(values))


def fuzzy_and(a, b):
    return a * b


def fuzzy_not(a):
    return 1.0 - a


class Boundary(Enum):
    NULL = "null"


@dataclass(frozen=True, order=True)
class RuleId:
    """One cell's rule: a code from ``CODES`` plus a complement flag.

    ``RuleId(238, True)`` is the rule numbered 17.
    """

    code: int
    complemented: bool = False

    def __post_init__(self):
        if self.code not in _CODE_INDEX:
            raise UnknownRuleError(f"rule code {self.code!r} is not in the alphabet {CODES}")
        object.__setattr__(self, "complemented", bool(self.complemented))

    @classmethod
    def from_number(cls, number):
        """Build from a Wolfram number in either column of the alphabet."""
        if number in _CODE_INDEX:
            return cls(number, False)
        if number in _COMPLEMENT_INDEX:
            return cls(CODES[_COMPLEMENT_INDEX[number]], True)
        raise UnknownRuleError(f"rule number {number!r} is not in the alphabet")

    @classmethod
    def from_gene(cls, gene):
        gene = int(gene)
        if not 0 <= gene < N_GENES:
            raise UnknownRuleError(f"gene {gene} outside 0..{N_GENES - 1}")
        return cls(CODES[gene // 2], bool(gene % 2))

    @property
    def number(self):
        return 255 - self.code if self.complemented else self.code

    @property
    def gene(self):
        return 2 * _CODE_INDEX[self.code] + int(self.complemented)

    @property
    def reads(self):
        """``(left, self, right)`` booleans: which neighbours the rule reads."""
        return (
            self.code & LEFT == LEFT,
            self.code & SELF == SELF,
            self.code & RIGHT == RIGHT,
        )

    def __str__(self):
        return str(self.number)


def _as_rule(rule):
    if isinstance(rule, RuleId):
        return rule
    if isinstance(rule, (int, np.integer)):
        return RuleId.from_number(int(rule))
    raise UnknownRuleError(f"cannot interpret {rule!r} as a rule")


def rule_next_state(rule, left, self_, right):
    """Next fuzzy state of one cell.  Absent neighbours at a null boundary are 0."""
    rule = _as_rule(rule)
    for v in (left, self_, right):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"cell value {v!r} outside [0, 1]")
    read_l, read_s, read_r = rule.reads
    acc = 0.0
    if read_l:
        acc += left
    if read_s:
        acc += self_
    if read_r:
        acc += right
    acc = min(1.0, acc)
    return 1.0 - acc if rule.complemented else acc


# lookup tables indexed by gene, consumed by the kernels
GENE_READS = np.array(
    [RuleId.from_gene(g).reads for g in range(N_GENES)], dtype=np.bool_
)
GENE_COMPLEMENT = np.array([g % 2 == 1 for g in range(N_GENES)], dtype=np.bool_)


@dataclass(frozen=True)
class RuleVector:
    """Per-cell rule assignment of a hybrid null-boundary FCA.

    Also serves as the GA chromosome: one gene per cell.
    """

    rules: tuple
    boundary: Boundary = Boundary.NULL

    def __post_init__(self):
        rules = tuple(_as_rule(r) for r in self.rules)
        if not rules:
            raise DimensionError("a rule vector needs at least one cell")
        object.__setattr__(self, "rules", rules)

    @classmethod
    def from_numbers(cls, numbers):
        return cls(tuple(RuleId.from_number(int(n)) for n in numbers))

    @classmethod
    def from_genes(cls, genes):
        return cls(tuple(RuleId.from_gene(g) for g in genes))

    @property
    def n_cells(self):
        return len(self.rules)

    @property
    def genes(self):
        return np.array([r.gene for r in self.rules], dtype=np.int64)

    @property
    def numbers(self):
        return tuple(r.number for r in self.rules)

    def __len__(self):
        return len(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    def __str__(self):
        return "<" + ", ".join(str(r) for r in self.rules) + ">"


Chromosome = RuleVector


def build_dependency_matrix(rules):
    """n x n 0/1 matrix; row i marks the cells that cell i's rule reads."""
    if not isinstance(rules, RuleVector):
        rules = RuleVector(tuple(rules))
    n = rules.n_cells
    m = np.zeros((n, n), dtype=np.int8)
    for i, rule in enumerate(rules.rules):
        for offset, read in zip((-1, 0, 1), rule.reads):
            j = i + offset
            if read and 0 <= j < n:
                m[i, j] = 1
    return m


def format_dependency_matrix(matrix):
    return "\n".join(" ".join(str(int(v)) for v in row) for row in matrix)
