"""Multi-pass left-to-right tagger with per-token n-best output.

Decoding makes k passes over the sentence (k=2 is the usual setting).
Within a pass, positions left of the cursor expose this pass's fresh
predictions; the cursor position and everything right of it expose the
previous pass's predictions (nothing on pass 1).  The final pass emits,
per token, the full tag vocabulary sorted by score, ties broken by
vocabulary index.  Scores are softmax-normalized per token so that
downstream candidate filters operate on a bounded scale; normalization
does not change the ordering.

Training is online: per token the current 1-best is decoded under the
same pass regime and a passive-aggressive update is applied against the
gold tag when they disagree (zero-one loss).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from tagsel import __version__
from tagsel.corpus import Sentence, kfold_indices, morph_label, parse_feats
from tagsel.learner import TrainConfig, WeightStore, load_model, save_model
from tagsel.templates import Extractor, TemplateSet, parse_template_spec

log = logging.getLogger(__name__)

# A per-token n-best list: (tag, normalized score) sorted best-first.
NBest = list[tuple[str, float]]


@dataclass
class TaggerModel:
    templates: TemplateSet
    active_ids: tuple[int, ...]
    classes: tuple[str, ...]
    weights: WeightStore
    passes: int = 2
    target: str = "pos"  # "pos" or "morph"
    attributes: tuple[str, ...] | None = None
    config: TrainConfig = TrainConfig()


def gold_label(token, target: str, attributes: Sequence[str] | None) -> str:
    if target == "pos":
        return token.pos
    return morph_label(token.morph, attributes)


class _PassContext:
    """Tag lookups for one decoding pass; see the module docstring."""

    __slots__ = ("target_is_pos", "fresh", "prev", "cursor", "base_pos", "base_morph")

    def __init__(self, sentence: Sentence, target: str, prev: list):
        n = len(sentence)
        self.target_is_pos = target == "pos"
        self.fresh: list[str | None] = [None] * n
        self.prev = prev
        self.cursor = 0
        self.base_pos = [t.pos or None for t in sentence]
        self.base_morph = [morph_label(t.morph) for t in sentence]

    def pos_at(self, p: int) -> str | None:
        if self.target_is_pos:
            return self.fresh[p] if p < self.cursor else self.prev[p]
        return self.base_pos[p]

    def morph_at(self, p: int) -> str | None:
        if not self.target_is_pos:
            return self.fresh[p] if p < self.cursor else self.prev[p]
        return self.base_morph[p]


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = np.exp(scores - scores.max())
    return z / z.sum()


def _decode_sentence(
    ws: WeightStore,
    prepared,
    sentence: Sentence,
    classes: tuple[str, ...],
    passes: int,
    target: str,
    train_gold: list[str] | None = None,
    C: float = 1.0,
) -> tuple[list[str], list[NBest]]:
    """Run the multi-pass regime; with train_gold given, update online."""
    n = len(sentence)
    prev: list[str | None] = [None] * n
    nbest: list[NBest] = []
    for pass_no in range(passes):
        ctx = _PassContext(sentence, target, prev)
        final = pass_no == passes - 1
        for t in range(n):
            ctx.cursor = t
            keys = prepared.keys(t, ctx)
            scores = ws.score_all(keys)
            pred_i = int(np.argmax(scores))  # first maximum = lowest vocab index
            pred = classes[pred_i]
            if train_gold is not None:
                ws.tick()
                if pred != train_gold[t]:
                    ws.mira_update(keys, keys, train_gold[t], pred, 1.0, C)
            if final:
                probs = _softmax(scores)
                order = np.argsort(-probs, kind="stable")
                nbest.append([(classes[int(i)], float(probs[int(i)])) for i in order])
            ctx.fresh[t] = pred
        prev = ctx.fresh
    return [p for p in prev], nbest  # type: ignore[misc]


def train_tagger(
    sentences: Sequence[Sentence],
    templates: TemplateSet,
    active_ids: Sequence[int],
    config: TrainConfig = TrainConfig(),
    *,
    passes: int = 2,
    target: str = "pos",
    attributes: Sequence[str] | None = None,
    classes: Sequence[str] | None = None,
) -> TaggerModel:
    """Train a multi-pass tagger; evaluation weights are averaged."""
    if target not in ("pos", "morph"):
        raise ValueError(f"unknown target {target!r}")
    if not sentences:
        raise ValueError("empty training corpus")
    gold = [[gold_label(t, target, attributes) for t in s] for s in sentences]
    if classes is None:
        classes = tuple(sorted({g for sent in gold for g in sent}))
    else:
        classes = tuple(classes)
        known = set(classes)
        for sent in gold:
            for g in sent:
                if g not in known:
                    raise ValueError(f"gold tag {g!r} missing from the supplied vocabulary")
    ws = WeightStore(classes)
    extractor = Extractor(templates, active_ids)
    prepared = [extractor.prepare(s) for s in sentences]
    rng = random.Random(config.seed)
    order = list(range(len(sentences)))
    for _ in range(config.iterations):
        rng.shuffle(order)
        for i in order:
            _decode_sentence(
                ws, prepared[i], sentences[i], classes, passes, target,
                train_gold=gold[i], C=config.C,
            )
    return TaggerModel(
        templates=templates,
        active_ids=tuple(sorted(active_ids)),
        classes=classes,
        weights=ws.average_and_freeze(),
        passes=passes,
        target=target,
        attributes=tuple(attributes) if attributes is not None else None,
        config=config,
    )


def tag_sentence(model: TaggerModel, sentence: Sentence) -> tuple[list[str], list[NBest]]:
    """Predicted tags and final-pass n-best lists for one sentence."""
    extractor = Extractor(model.templates, model.active_ids)
    prepared = extractor.prepare(sentence)
    return _decode_sentence(
        model.weights, prepared, sentence, model.classes, model.passes, model.target
    )


def apply_tags(sentence: Sentence, tags: Sequence[str], target: str) -> Sentence:
    """Copy of the sentence with the target field replaced by predictions."""
    if target == "pos":
        toks = tuple(replace(t, pos=tag) for t, tag in zip(sentence, tags))
    else:
        toks = tuple(replace(t, morph=parse_feats(tag)) for t, tag in zip(sentence, tags))
    return Sentence(toks)


def tag_corpus(
    model: TaggerModel, sentences: Sequence[Sentence]
) -> tuple[list[Sentence], list[list[NBest]]]:
    tagged = []
    all_nbest = []
    extractor = Extractor(model.templates, model.active_ids)
    for s in sentences:
        prepared = extractor.prepare(s)
        tags, nbest = _decode_sentence(
            model.weights, prepared, s, model.classes, model.passes, model.target
        )
        tagged.append(apply_tags(s, tags, model.target))
        all_nbest.append(nbest)
    return tagged, all_nbest


def jackknife_nbest(
    sentences: Sequence[Sentence],
    templates: TemplateSet,
    active_ids: Sequence[int],
    config: TrainConfig = TrainConfig(),
    *,
    passes: int = 2,
    target: str = "pos",
    attributes: Sequence[str] | None = None,
    folds: int = 10,
    classes: Sequence[str] | None = None,
) -> list[list[NBest]]:
    """N-best lists for a training corpus without oracle contamination.

    Each fold's lists come from a tagger trained on the other folds.  The
    result is aligned with the input order.
    """
    n = len(sentences)
    folds = min(folds, n)
    if folds < 2:
        raise ValueError("jackknifing needs at least 2 sentences")
    out: list[list[NBest] | None] = [None] * n
    if classes is None:
        classes = tuple(
            sorted({gold_label(t, target, attributes) for s in sentences for t in s})
        )
    for train_idx, test_idx in kfold_indices(n, folds, config.seed):
        fold_model = train_tagger(
            [sentences[i] for i in train_idx], templates, active_ids, config,
            passes=passes, target=target, attributes=attributes, classes=classes,
        )
        extractor = Extractor(templates, fold_model.active_ids)
        for i in test_idx:
            prepared = extractor.prepare(sentences[i])
            _, nbest = _decode_sentence(
                fold_model.weights, prepared, sentences[i],
                fold_model.classes, passes, target,
            )
            out[i] = nbest
    return out  # type: ignore[return-value]


def accuracy(
    pred: Sequence[Sentence],
    gold: Sequence[Sentence],
    field: str = "pos",
    attributes: Sequence[str] | None = None,
) -> float:
    """Token-level accuracy in percent.

    Morph comparison is set equality of attribute=value pairs, optionally
    restricted to a declared attribute subset.
    """
    if len(pred) != len(gold):
        raise ValueError("corpus size mismatch")
    correct = total = 0
    keep = set(attributes) if attributes is not None else None
    for ps, gs in zip(pred, gold):
        if len(ps) != len(gs):
            raise ValueError("sentence length mismatch")
        for pt, gt in zip(ps, gs):
            total += 1
            if field == "pos":
                correct += pt.pos == gt.pos
            else:
                pm = {x for x in pt.morph if keep is None or x[0] in keep}
                gm = {x for x in gt.morph if keep is None or x[0] in keep}
                correct += pm == gm
    if total == 0:
        raise ValueError("empty corpus")
    return 100.0 * correct / total


def save_tagger(path: str | Path, model: TaggerModel, extra: dict | None = None) -> None:
    metadata = {
        **(extra or {}),
        "kind": "tagger",
        "code_version": __version__,
        "template_text": model.templates.text,
        "active_ids": list(model.active_ids),
        "passes": model.passes,
        "target": model.target,
        "attributes": list(model.attributes) if model.attributes is not None else None,
        "config": {
            "iterations": model.config.iterations,
            "C": model.config.C,
            "seed": model.config.seed,
            "loss": model.config.loss,
        },
    }
    save_model(path, metadata, {"tagger": model.weights})


def load_tagger(path: str | Path) -> TaggerModel:
    metadata, sections = load_model(path)
    if metadata.get("kind") != "tagger":
        raise ValueError(f"not a tagger model: kind={metadata.get('kind')!r}")
    ws = sections["tagger"]
    cfg = metadata["config"]
    return TaggerModel(
        templates=parse_template_spec(metadata["template_text"]),
        active_ids=tuple(metadata["active_ids"]),
        classes=ws.classes,
        weights=ws,
        passes=metadata["passes"],
        target=metadata["target"],
        attributes=tuple(metadata["attributes"]) if metadata["attributes"] is not None else None,
        config=TrainConfig(cfg["iterations"], cfg["C"], cfg["seed"], cfg["loss"]),
    )
