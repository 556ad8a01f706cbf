"""KDD Cup 99 connection records: parsing, normalisation, fuzzification,
attack taxonomy and synthetic fixtures.
"""
import gzip
import hashlib
import io
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DatasetError, FormatError, ParseError, UnknownLabelError

FEATURE_NAMES = (
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in",
    "num_compromised", "root_shell", "su_attempted", "num_root",
    "num_file_creations", "num_shells", "num_access_files", "num_outbound_cmds",
    "is_host_login", "is_guest_login", "count", "srv_count", "serror_rate",
    "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate",
    "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate", "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
)
N_FEATURES = len(FEATURE_NAMES)
CATEGORICAL = (1, 2, 3)
NUMERIC = tuple(i for i in range(N_FEATURES) if i not in CATEGORICAL)


class Category(Enum):
    NORMAL = "normal"
    DOS = "dos"
    PROBE = "probe"
    R2L = "r2l"
    U2R = "u2r"

    @property
    def display(self):
        return {"normal": "Normal", "dos": "DoS", "probe": "Probe",
                "r2l": "R2L", "u2r": "U2R"}[self.value]

    @classmethod
    def parse(cls, text):
        t = text.strip().lower()
        try:
            return cls(t)
        except ValueError:
            raise DatasetError(f"unknown attack category {text!r}") from None


# ---------------------------------------------------------------- taxonomy

def _taxonomy_text(path=None):
    if path is None:
        return resources.files("nidwca").joinpath("data/kdd_taxonomy.txt").read_text()
    return Path(path).read_text()


def parse_taxonomy(text):
    table = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise FormatError("taxonomy lines need exactly two columns", n)
        label, cat = parts
        label = label.rstrip(".")
        if label in table:
            raise FormatError(f"label {label!r} listed twice", n)
        table[label] = Category.parse(cat)
    return table


_DEFAULT_TAXONOMY = None


def load_taxonomy(path=None):
    global _DEFAULT_TAXONOMY
    if path is None:
        if _DEFAULT_TAXONOMY is None:
            _DEFAULT_TAXONOMY = parse_taxonomy(_taxonomy_text())
        return _DEFAULT_TAXONOMY
    return parse_taxonomy(_taxonomy_text(path))


def taxonomy_digest(path=None):
    return hashlib.sha256(_taxonomy_text(path).encode()).hexdigest()


def label_category(label, taxonomy=None):
    table = taxonomy if taxonomy is not None else load_taxonomy()
    key = label.strip().rstrip(".")
    try:
        return table[key]
    except KeyError:
        raise UnknownLabelError(f"unknown label {label!r}") from None


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class ConnectionRecord:
    """41 raw features (floats, with strings in the 3 categorical slots)."""

    features: tuple
    label: str = None

    @property
    def category(self):
        return None if self.label is None else label_category(self.label)

    def category_in(self, taxonomy):
        return None if self.label is None else label_category(self.label, taxonomy)


def parse_record(line, labeled, line_number=None):
    fields = line.rstrip("\r\n").split(",")
    expected = N_FEATURES + 1 if labeled else N_FEATURES
    if len(fields) != expected:
        raise FormatError(f"expected {expected} fields, found {len(fields)}", line_number)
    values = []
    for i in range(N_FEATURES):
        raw = fields[i].strip()
        if i in CATEGORICAL:
            if not raw:
                raise ParseError(f"empty value for {FEATURE_NAMES[i]}", line_number)
            values.append(raw)
            continue
        try:
            v = float(raw)
        except ValueError:
            raise ParseError(f"non-numeric value {raw!r} for {FEATURE_NAMES[i]}",
                             line_number) from None
        if not np.isfinite(v) or v < 0:
            raise ParseError(f"value {raw!r} for {FEATURE_NAMES[i]} must be a "
                             "finite non-negative number", line_number)
        values.append(v)
    label = None
    if labeled:
        label = fields[-1].strip().rstrip(".")
        if not label:
            raise ParseError("empty label", line_number)
    return ConnectionRecord(tuple(values), label)


def read_records(source, labeled=None):
    """Parse every non-blank line of a path, file object or iterable of lines.

    ``labeled=None`` accepts 41-field and 42-field lines alike.
    """
    if isinstance(source, (str, Path)):
        opener = gzip.open if str(source).endswith(".gz") else open
        try:
            with opener(source, "rt") as fh:
                return read_records(fh, labeled)
        except OSError as exc:
            raise DatasetError(f"cannot read {source}: {exc.strerror or exc}") from exc
    records = []
    for n, line in enumerate(source, 1):
        if not line.strip():
            continue
        if labeled is None:
            has_label = line.count(",") == N_FEATURES
            records.append(parse_record(line, has_label, n))
        else:
            records.append(parse_record(line, labeled, n))
    return records


def format_record(record):
    parts = []
    for i, v in enumerate(record.features):
        if i in CATEGORICAL:
            parts.append(v)
        elif float(v).is_integer():
            parts.append(str(int(v)))
        else:
            parts.append(f"{v:.6f}".rstrip("0"))
    if record.label is not None:
        parts.append(record.label + ".")
    return ",".join(parts)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------- normalisation

@dataclass(frozen=True)
class Normalizer:
    mins: tuple
    maxs: tuple
    categories: tuple  # one sorted tuple of observed values per categorical feature

    def as_dict(self):
        return {"mins": list(self.mins), "maxs": list(self.maxs),
                "categories": [list(c) for c in self.categories]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(float(v) for v in d["mins"]), tuple(float(v) for v in d["maxs"]),
                   tuple(tuple(str(v) for v in c) for c in d["categories"]))


def fit_normalizer(records):
    records = list(records)
    if not records:
        raise DatasetError("cannot fit a normalizer on zero records")
    num = np.array([[r.features[i] for i in NUMERIC] for r in records], dtype=np.float64)
    cats = tuple(tuple(sorted({r.features[i] for r in records})) for i in CATEGORICAL)
    return Normalizer(tuple(float(v) for v in num.min(axis=0)),
                      tuple(float(v) for v in num.max(axis=0)), cats)


def _check_schema(record, norm):
    if len(record.features) != N_FEATURES or len(norm.mins) != len(NUMERIC) \
            or len(norm.categories) != len(CATEGORICAL):
        raise DatasetError("record or normalizer does not follow the 41-feature schema")


def fuzzify(record, norm):
    _check_schema(record, norm)
    return fuzzify_many([record], norm)[0]


def fuzzify_many(records, norm):
    """(n_records, 41) array of fuzzy states in [0, 1]."""
    records = list(records)
    out = np.empty((len(records), N_FEATURES), dtype=np.float64)
    if not records:
        return out
    for r in records:
        _check_schema(r, norm)
    num = np.array([[r.features[i] for i in NUMERIC] for r in records], dtype=np.float64)
    lo = np.asarray(norm.mins)
    hi = np.asarray(norm.maxs)
    span = hi - lo
    scaled = np.zeros_like(num)
    live = span > 0
    scaled[:, live] = (num[:, live] - lo[live]) / span[live]
    out[:, list(NUMERIC)] = np.clip(scaled, 0.0, 1.0)
    for slot, i in enumerate(CATEGORICAL):
        vocab = norm.categories[slot]
        rank = {v: k for k, v in enumerate(vocab)}
        denom = len(vocab) - 1
        col = []
        for r in records:
            k = rank.get(r.features[i])
            if k is None:
                col.append(1.0)  # unseen category sentinel
            else:
                col.append(k / denom if denom > 0 else 0.0)
        out[:, i] = col
    return out


# ---------------------------------------------------------------- synthetic data

@dataclass(frozen=True)
class SyntheticSpec:
    n_normal: int
    n_attack: int
    center_normal: tuple
    center_attack: tuple
    spread: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_normal < 0 or self.n_attack < 0:
            raise ValueError("record counts must be >= 0")
        if self.spread < 0:
            raise ValueError("spread must be >= 0")
        for c in (self.center_normal, self.center_attack):
            if len(c) != N_FEATURES or any(not 0.0 <= v <= 1.0 for v in c):
                raise ValueError(f"centers must be {N_FEATURES} values in [0, 1]")

    @classmethod
    def random_centers(cls, n_normal, n_attack, spread=0.05, seed=0, min_gap=0.3):
        """Centers drawn per seed; the two differ by at least ``min_gap`` in L-infinity."""
        rng = np.random.default_rng([int(seed), 1])
        while True:
            a, b = rng.random(N_FEATURES), rng.random(N_FEATURES)
            if np.abs(a - b).max() >= min_gap:
                return cls(n_normal, n_attack, tuple(float(v) for v in a),
                           tuple(float(v) for v in b), spread, seed)


def generate_synthetic(spec):
    """Normal records first, then attack records; labels are 'normal' / 'attack'."""
    rng = np.random.default_rng(spec.seed)
    out = []
    for center, n, label in ((spec.center_normal, spec.n_normal, "normal"),
                             (spec.center_attack, spec.n_attack, "attack")):
        c = np.asarray(center, dtype=np.float64)
        noise = rng.uniform(-spec.spread, spec.spread, size=(n, N_FEATURES))
        pts = np.clip(c + noise, 0.0, 1.0)
        out.extend((p, label) for p in pts)
    return out


def synthetic_to_records(dataset, attack_label="smurf"):
    """Render fuzzy states as KDD-format records.

    Numeric slots carry the state value; categorical slots carry the token
    ``c<d>`` with ``d = floor(10 * value)`` clipped to 9, whose lexicographic
    order follows the value order.
    """
    records = []
    for state, label in dataset:
        feats = []
        for i, v in enumerate(state):
            if i in CATEGORICAL:
                feats.append(f"c{min(9, int(v * 10))}")
            else:
                feats.append(float(round(float(v), 6)))
        lab = None if label is None else ("normal" if label == "normal" else attack_label)
        records.append(ConnectionRecord(tuple(feats), lab))
    return records


def write_records(records, out):
    text = "".join(format_record(r) + "\n" for r in records)
    if isinstance(out, io.TextIOBase):
        out.write(text)
    else:
        Path(out).write_text(text)


def stratified_sample(records, n, seed, min_per_category=10, taxonomy=None):
    """Sample ``n`` labeled records keeping category proportions.

    Every category present gets at least ``min(min_per_category, available)``
    records; the remainder is allocated proportionally by largest remainder.
    """
    by_cat = {}
    for i, r in enumerate(records):
        by_cat.setdefault(r.category_in(taxonomy or load_taxonomy()), []).append(i)
    total = len(records)
    if n >= total:
        return list(records)
    cats = sorted(by_cat, key=lambda c: c.value)
    floor = {c: min(min_per_category, len(by_cat[c])) for c in cats}
    rest = n - sum(floor.values())
    if rest < 0:
        raise DatasetError("sample size too small for the per-category minimum")
    share = {c: rest * len(by_cat[c]) / total for c in cats}
    alloc = {c: min(len(by_cat[c]), floor[c] + int(share[c])) for c in cats}
    left = n - sum(alloc.values())
    for c in sorted(cats, key=lambda c: (-(share[c] - int(share[c])), c.value)):
        if left <= 0:
            break
        if alloc[c] < len(by_cat[c]):
            alloc[c] += 1
            left -= 1
    rng = np.random.default_rng(seed)
    picked = []
    for c in cats:
        picked.extend(rng.choice(by_cat[c], size=alloc[c], replace=False).tolist())
    return [records[i] for i in sorted(picked)]


def stratified_split(records, test_fraction, seed, taxonomy=None):
    by_cat = {}
    for i, r in enumerate(records):
        by_cat.setdefault(r.category_in(taxonomy or load_taxonomy()), []).append(i)
    rng = np.random.default_rng(seed)
    test = []
    for c in sorted(by_cat, key=lambda c: c.value):
        idx = np.array(by_cat[c])
        k = int(round(len(idx) * test_fraction))
        if len(idx) > 1:
            k = min(max(k, 1), len(idx) - 1)
        test.extend(rng.choice(idx, size=k, replace=False).tolist())
    test_set = set(test)
    return ([r for i, r in enumerate(records) if i not in test_set],
            [r for i, r in enumerate(records) if i in test_set])
