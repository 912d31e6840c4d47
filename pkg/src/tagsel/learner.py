"""Online margin-based learning over hashed sparse features.

Weights live in a per-feature-key table of class-score vectors.  Updates
follow the passive-aggressive rule: given gold and predicted outcomes
with a loss, the step size is

    tau = min(C, max(0, (loss - margin) / ||delta_phi||^2))

where margin is the current score difference and delta_phi the joint
feature-vector difference.  Gold features gain tau, predicted features
lose tau.  An averaged copy of the weights (the running mean over all
update steps) is used for evaluation decoding.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

MAGIC = b"TSEL"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file is truncated, corrupt or version-incompatible."""


@dataclass(frozen=True, slots=True)
class TrainConfig:
    iterations: int = 12
    C: float = 1.0
    seed: int = 1
    loss: str = "zero-one"  # "zero-one" or "hamming"

    def __post_init__(self):
        if self.loss not in ("zero-one", "hamming"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.C <= 0:
            raise ValueError("C must be positive")


def _as_bag(features, outcome) -> dict[tuple[int, int], float]:
    """Joint feature counts for an outcome.

    ``outcome`` is either one class label with ``features`` a key sequence,
    or a sequence of labels with ``features`` a parallel sequence of key
    sequences (one group per decision).
    """
    bag: dict[tuple[int, int], float] = {}
    if isinstance(outcome, (list, tuple)):
        if len(features) != len(outcome):
            raise ValueError("features and outcome sequences differ in length")
        groups = zip(outcome, features)
    else:
        groups = [(outcome, features)]
    for cls, keys in groups:
        for k in keys:
            cell = (cls, k)
            bag[cell] = bag.get(cell, 0.0) + 1.0
    return bag


class WeightStore:
    """Sparse weights per (class, feature key) with lazy averaging."""

    def __init__(self, classes: Sequence[str]):
        self.classes = tuple(classes)
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate class labels")
        self.index = {c: i for i, c in enumerate(self.classes)}
        self.n_classes = len(self.classes)
        self.frozen = False
        self.step = 0
        self._w: dict[int, np.ndarray] = {}
        self._acc: dict[int, np.ndarray] = {}
        self._last: dict[int, int] = {}
        self._warned_degenerate = False

    def class_index(self, cls: str) -> int:
        try:
            return self.index[cls]
        except KeyError:
            raise KeyError(f"unknown class {cls!r}") from None

    def score(self, features: Iterable[int], cls: str) -> float:
        ci = self.class_index(cls)
        w = self._w
        total = 0.0
        for k in features:
            vec = w.get(k)
            if vec is not None:
                total += vec[ci]
        return total

    def score_all(self, features: Iterable[int]) -> np.ndarray:
        """Score vector over the whole class vocabulary."""
        out = np.zeros(self.n_classes)
        w = self._w
        for k in features:
            vec = w.get(k)
            if vec is not None:
                out += vec
        return out

    def tick(self) -> None:
        """Advance the averaging clock by one instance."""
        if self.frozen:
            raise RuntimeError("frozen weight store")
        self.step += 1

    def _touch(self, key: int) -> np.ndarray:
        vec = self._w.get(key)
        if vec is None:
            vec = np.zeros(self.n_classes)
            self._w[key] = vec
            self._acc[key] = np.zeros(self.n_classes)
            self._last[key] = self.step - 1 if self.step else 0
            return vec
        pending = (self.step - 1 if self.step else 0) - self._last[key]
        if pending > 0:
            self._acc[key] += vec * pending
            self._last[key] += pending
        return vec

    def mira_update(self, features_gold, features_pred, gold, pred, loss: float, C: float = 1.0) -> float:
        """Apply one passive-aggressive update; returns the step size tau."""
        if self.frozen:
            raise RuntimeError("frozen weight store")
        bag_gold = _as_bag(features_gold, gold)
        bag_pred = _as_bag(features_pred, pred)
        diff: dict[tuple[int, int], float] = dict(bag_gold)
        for cell, cnt in bag_pred.items():
            d = diff.get(cell, 0.0) - cnt
            if d:
                diff[cell] = d
            elif cell in diff:
                del diff[cell]
        if not diff:
            if not self._warned_degenerate:
                log.warning(
                    "degenerate update: gold and predicted features identical; "
                    "skipped (reported once per weight store)"
                )
                self._warned_degenerate = True
            else:
                log.debug("degenerate update skipped")
            return 0.0
        margin = 0.0
        sq = 0.0
        for (cls, key), d in diff.items():
            vec = self._w.get(key)
            if vec is not None:
                margin += d * vec[self.class_index(cls)]
            sq += d * d
        gap = loss - margin
        if gap <= 0:
            return 0.0
        tau = min(C, gap / sq)
        for (cls, key), d in diff.items():
            self._touch(key)[self.class_index(cls)] += tau * d
        return tau

    def average_and_freeze(self) -> "WeightStore":
        """Frozen store holding the mean weight vector over all steps.

        Averaging a frozen store returns an identical frozen copy, so the
        operation is idempotent.  With no recorded steps the raw weights
        are kept as-is.
        """
        out = WeightStore(self.classes)
        out.frozen = True
        out.step = self.step
        if self.frozen or self.step == 0:
            out._w = {k: v.copy() for k, v in self._w.items()}
            return out
        T = self.step
        for key, vec in self._w.items():
            acc = self._acc[key] + vec * (T - self._last[key])
            avg = acc / T
            if np.any(avg):
                out._w[key] = avg
        return out

    def nonzero_count(self) -> int:
        return sum(int(np.count_nonzero(v)) for v in self._w.values())


def _write_block(fh, payload: bytes) -> None:
    fh.write(struct.pack("<Q", len(payload)))
    fh.write(payload)


def _read_exact(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ModelFormatError("truncated model file")
    return data


def _read_block(fh) -> bytes:
    (n,) = struct.unpack("<Q", _read_exact(fh, 8))
    return _read_exact(fh, n)


def save_model(path: str | Path, metadata: dict, sections: dict[str, WeightStore]) -> None:
    """Write a versioned binary model file.

    Layout: magic, version, JSON metadata block (template text, active ids,
    run configuration, ...), then one weight section per store: a JSON
    header with the class vocabulary followed by sparse
    (class index, key, weight) triples.
    """
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        _write_block(fh, json.dumps(metadata, sort_keys=True).encode("utf-8"))
        fh.write(struct.pack("<I", len(sections)))
        for name, ws in sections.items():
            head = {"name": name, "classes": list(ws.classes)}
            _write_block(fh, json.dumps(head, sort_keys=True).encode("utf-8"))
            cls_idx: list[int] = []
            keys: list[int] = []
            weights: list[float] = []
            for key in sorted(ws._w):
                vec = ws._w[key]
                for ci in np.nonzero(vec)[0]:
                    cls_idx.append(int(ci))
                    keys.append(key)
                    weights.append(float(vec[ci]))
            fh.write(struct.pack("<Q", len(keys)))
            fh.write(np.asarray(cls_idx, dtype="<u4").tobytes())
            fh.write(np.asarray(keys, dtype="<u8").tobytes())
            fh.write(np.asarray(weights, dtype="<f8").tobytes())


def load_model(path: str | Path) -> tuple[dict, dict[str, WeightStore]]:
    """Read a model file back into (metadata, weight sections)."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ModelFormatError(f"bad magic {magic!r}; not a model file")
        (version,) = struct.unpack("<I", _read_exact(fh, 4))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format version {version}")
        metadata = json.loads(_read_block(fh).decode("utf-8"))
        (n_sections,) = struct.unpack("<I", _read_exact(fh, 4))
        sections: dict[str, WeightStore] = {}
        for _ in range(n_sections):
            head = json.loads(_read_block(fh).decode("utf-8"))
            ws = WeightStore(head["classes"])
            ws.frozen = True
            (count,) = struct.unpack("<Q", _read_exact(fh, 8))
            cls_idx = np.frombuffer(_read_exact(fh, 4 * count), dtype="<u4")
            keys = np.frombuffer(_read_exact(fh, 8 * count), dtype="<u8")
            weights = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8")
            for ci, key, wt in zip(cls_idx, keys, weights):
                vec = ws._w.get(int(key))
                if vec is None:
                    vec = np.zeros(ws.n_classes)
                    ws._w[int(key)] = vec
                vec[int(ci)] = float(wt)
            sections[head["name"]] = ws
        return metadata, sections
