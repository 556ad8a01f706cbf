"""Binary labels and conversion of (state, label) sequences to arrays."""
from enum import Enum

import numpy as np

from .errors import DatasetError


class Label(Enum):
    NORMAL = "normal"
    ATTACK = "attack"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            v = value.strip().lower()
            if v in ("normal", "0"):
                return cls.NORMAL
            if v in ("attack", "1"):
                return cls.ATTACK
            raise DatasetError(f"cannot read {value!r} as a binary label")
        return cls.ATTACK if bool(value) else cls.NORMAL

    def __int__(self):
        return int(self is Label.ATTACK)


class Mode(Enum):
    LABELED = "labeled"
    UNLABELED = "unlabeled"


def as_arrays(dataset):
    """Split a dataset into ``(states, labels)``.

    ``dataset`` is either a ``(states, labels)`` pair of arrays (labels may be
    None) or a sequence of ``state`` / ``(state, label)`` items.  ``labels`` is
    an int8 array with 1 = attack, or None when no record is labeled.
    """
    if isinstance(dataset, tuple) and len(dataset) == 2 and isinstance(dataset[0], np.ndarray):
        states, labels = dataset
        states = np.asarray(states, dtype=np.float64)
        if labels is not None:
            labels = np.asarray(labels)
            if labels.dtype.kind in "biu":
                labels = (labels != 0).astype(np.int8)
            else:
                labels = np.array([int(Label.coerce(v)) for v in labels], dtype=np.int8)
            if labels.shape[0] != states.shape[0]:
                raise DatasetError("states and labels differ in length")
        return states, labels

    rows, labels = [], []
    for item in dataset:
        if isinstance(item, tuple) and len(item) == 2 and not np.isscalar(item[0]):
            state, label = item
        else:
            state, label = item, None
        rows.append(np.asarray(state, dtype=np.float64))
        labels.append(label)
    n_labeled = sum(lab is not None for lab in labels)
    if 0 < n_labeled < len(labels):
        raise DatasetError("dataset mixes labeled and unlabeled records")
    if not rows:
        return np.empty((0, 0)), None
    lengths = {r.shape for r in rows}
    if len(lengths) != 1:
        raise DatasetError(f"records have differing shapes {sorted(lengths)}")
    states = np.vstack(rows)
    if n_labeled == 0:
        return states, None
    return states, np.array([int(Label.coerce(v)) for v in labels], dtype=np.int8)
